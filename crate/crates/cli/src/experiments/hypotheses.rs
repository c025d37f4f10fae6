//! Conjecture probes along deep cascades. Nothing here gates except the
//! dominant-path sanity check.

use std::path::Path;

use alcove_core::crystal::LimitOmegaSampler;
use alcove_core::sampling::sample_brownian;
use alcove_core::{string_coordinates, DirectionSequence, PiecewiseLinearPath, RngStream};
use rayon::prelude::*;

use super::{csv_line, mean_se, write_svg};
use crate::report::{Check, RunReport};
use crate::svg::LineChart;
use crate::{CliError, ExperimentConfig};

/// Per path: `(x_0..x_depth, bracket_0..bracket_depth)`.
type Row = (Vec<f64>, Vec<f64>);

pub(super) fn run(
    report: &mut RunReport,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<(), CliError> {
    let rs = cfg.root_system()?;
    let n = rs.rank();
    let nu_hat = cfg.nu_hat(&rs)?;
    let nu = nu_hat.finite.to_vec();
    let seq = DirectionSequence::cyclic(n);
    let depth = cfg.depths.iter().copied().max().unwrap_or(0);
    let omega = LimitOmegaSampler::new(&rs, &nu_hat, cfg.k_cut)?;
    let stream = RngStream::new(cfg.seed, 3);

    let rows: Vec<Row> = (0..cfg.particles as u64)
        .into_par_iter()
        .map(|k| -> Result<_, CliError> {
            let mut rng = stream.child(k).rng();
            let path = sample_brownian(&rs, cfg.horizon, cfg.dt, &nu, &mut rng)?;
            let x = string_coordinates(&rs, &path, &seq, depth).values;
            let mut partial = omega.sample(&mut rng);
            let brackets = (0..=depth)
                .map(|p| {
                    let i = seq.index(p);
                    let mut v = partial.clone();
                    v.axpy(-0.5 * x[p], &rs.alpha(i));
                    partial.axpy(-x[p], &rs.alpha(i));
                    rs.pair(&v, i)
                })
                .collect();
            Ok((x, brackets))
        })
        .collect::<Result<_, _>>()?;

    let column = |p: usize, pick: fn(&Row) -> &Vec<f64>| -> Vec<f64> {
        rows.iter().map(|r| pick(r)[p]).collect()
    };
    let mut csv = String::from("p,index,x_mean,x_se,bracket_mean,bracket_se\n");
    let mut x_pts = Vec::new();
    let mut x_lo = Vec::new();
    let mut x_hi = Vec::new();
    let mut b_pts = Vec::new();
    let mut stats = Vec::new();
    for p in 0..=depth {
        let (xm, xs) = mean_se(&column(p, |r| &r.0));
        let (bm, bs) = mean_se(&column(p, |r| &r.1));
        csv_line(
            &mut csv,
            [
                p.to_string(),
                seq.index(p).to_string(),
                xm.to_string(),
                xs.to_string(),
                bm.to_string(),
                bs.to_string(),
            ],
        );
        x_pts.push((p as f64, xm));
        x_lo.push((p as f64, xm - 2.0 * xs));
        x_hi.push((p as f64, xm + 2.0 * xs));
        b_pts.push((p as f64, bm));
        stats.push((xm, xs, bm, bs));
    }
    report.write_file(dir, &format!("{}.csv", cfg.name), &csv)?;
    report.metric("x_mean", stats.iter().map(|s| s.0).collect::<Vec<_>>());
    report.metric(
        "bracket_mean",
        stats.iter().map(|s| s.2).collect::<Vec<_>>(),
    );

    let (xm, xs, bm, bs) = stats[depth];
    report.push(
        Check::report(format!("x_{depth} mean"), xm).with_detail(format!(
            "+- {xs:.3e}, {} paths, T = {}",
            cfg.particles, cfg.horizon
        )),
    );
    if n == 1 {
        report.push(
            Check::report(
                format!("|x_{depth} mean - 2| in standard errors"),
                (xm - 2.0).abs() / xs,
            )
            .with_detail("conjectured limit 2 for rank 1"),
        );
    }
    report.push(
        Check::report(format!("bracket at p = {depth}"), bm).with_detail(format!("+- {bs:.3e}")),
    );
    if depth > n {
        let period_back = stats[depth - n - 1].0;
        report.push(
            Check::report("x_p change over the last period", xm - period_back)
                .with_detail(format!("p = {} to {depth}", depth - n - 1)),
        );
    }

    let straight = PiecewiseLinearPath::straight(&rs.barycentric_drift(), cfg.horizon);
    let trivial = string_coordinates(&rs, &straight, &seq, depth).values;
    let worst = trivial.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    report.push(Check::gate(
        "dominant straight path has zero string",
        worst,
        "<= 1e-12",
        worst <= 1e-12,
    ));

    let mut chart = LineChart::new(&format!("string coordinates x_p(T), rank {n}"), "p", "x_p");
    chart.add("mean", "#1f4e9c", x_pts);
    chart.add("mean - 2 se", "#9fc5e8", x_lo);
    chart.add("mean + 2 se", "#9fc5e8", x_hi);
    if n == 1 {
        chart.add("2", "#cc0000", vec![(0.0, 2.0), (depth as f64, 2.0)]);
    }
    write_svg(report, dir, &format!("{}.svg", cfg.name), &chart)?;
    let mut chart = LineChart::new(&format!("omega bracket, rank {n}"), "p", "bracket");
    chart.add("mean", "#d4a017", b_pts);
    write_svg(report, dir, &format!("{}_bracket.svg", cfg.name), &chart)
}
