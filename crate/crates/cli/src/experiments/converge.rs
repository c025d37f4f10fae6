//! Convergence suite: increments, exact conditional law, string coordinate
//! at infinity, weight law and walk tail.

use std::path::Path;

use alcove_core::RngStream;

use super::{csv_line, write_svg};
use crate::criteria::{
    condlaw, convergence_lemmas, fourth_moment_probe, string_at_infinity, string_infinity_samples,
    tail_decay, weight_exponential_limit,
};
use crate::report::{Check, RunReport};
use crate::svg::LineChart;
use crate::{CliError, ExperimentConfig};

/// Walk scale for the limit-law comparisons.
pub const LIMIT_M: f64 = 50.0;
pub const MOMENT_DRAWS: usize = 100_000;
pub const KS_SAMPLES: usize = 10_000;
pub const TAIL_M: usize = 10;
pub const TAIL_SAMPLES: usize = 100_000;

pub(super) fn run(
    report: &mut RunReport,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<(), CliError> {
    let rs = cfg.root_system()?;
    let n = rs.rank();
    let pairings = cfg.drift(&rs).checked_pairings(&rs)?;
    report.metric("nu_hat_pairings", &pairings);
    let ranks = [n];
    let seed = cfg.seed;

    report.extend(convergence_lemmas(&ranks, &cfg.m, MOMENT_DRAWS, seed).checks);
    if n <= 2 {
        let prefix = format!("rank {n},");
        report.extend(
            condlaw(&cfg.m)
                .checks
                .into_iter()
                .filter(|c| c.name.starts_with(&prefix) || c.status == crate::Status::Error),
        );
    } else {
        report.push(
            Check::report("conditional Laplace transform", f64::NAN)
                .with_detail("catalogs are built for n <= 2 only"),
        );
    }
    report.extend(string_at_infinity(&ranks, LIMIT_M, KS_SAMPLES, seed).checks);
    report.extend(weight_exponential_limit(&ranks, LIMIT_M, cfg.k_cut, KS_SAMPLES, seed).checks);
    report.extend(tail_decay(&ranks, TAIL_M, TAIL_SAMPLES, seed).checks);
    report.extend(fourth_moment_probe(&ranks, &cfg.m));

    let nu_hat = cfg.nu_hat(&rs)?;
    let s = string_infinity_samples(
        &rs,
        &nu_hat,
        LIMIT_M,
        KS_SAMPLES,
        0.05,
        RngStream::new(seed, 2),
    )?;
    let mut walk = s.walk.clone();
    let mut bm = s.brownian.clone();
    walk.sort_by(f64::total_cmp);
    bm.sort_by(f64::total_cmp);
    let q = |xs: &[f64]| xs[((xs.len() as f64 * 0.995) as usize).min(xs.len() - 1)];
    let x_max = q(&walk).max(q(&bm));
    let cdf = |xs: &[f64], x: f64| xs.partition_point(|&v| v <= x) as f64 / xs.len() as f64;
    let rate = 2.0 * s.drift / s.variance;
    let mut csv = String::from("x,walk_cdf,brownian_cdf,exponential_cdf\n");
    let mut walk_pts = Vec::new();
    let mut bm_pts = Vec::new();
    let mut exp_pts = Vec::new();
    for k in 0..cfg.steps {
        let x = x_max * k as f64 / (cfg.steps - 1).max(1) as f64;
        let (a, b, e) = (cdf(&walk, x), cdf(&bm, x), 1.0 - (-rate * x).exp());
        csv_line(
            &mut csv,
            [x.to_string(), a.to_string(), b.to_string(), e.to_string()],
        );
        walk_pts.push((x, a));
        bm_pts.push((x, b));
        exp_pts.push((x, e));
    }
    report.write_file(dir, &format!("{}.csv", cfg.name), &csv)?;
    report.metric("string_infinity_rate", rate);
    let mut chart = LineChart::new(
        &format!("x_0(infinity): walk at m = {LIMIT_M} vs Brownian, rank {n}"),
        "x",
        "CDF",
    );
    chart.add("walk / m", "#1f4e9c", walk_pts);
    chart.add("Brownian infimum", "#d4a017", bm_pts);
    chart.add("exponential", "#888888", exp_pts);
    write_svg(report, dir, &format!("{}.svg", cfg.name), &chart)
}
