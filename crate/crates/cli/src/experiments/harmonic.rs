//! Harmonicity of `Ψ`, truncation stability, and the conditioned process.

use std::path::Path;

use alcove_core::harmonic::default_m_cut;
use alcove_core::sampling::{one_step_ratios, sample_conditioned_a, SmcConfig};
use alcove_core::{harmonicity_residual, psi_frenkel, Ensemble, HarmonicPsi, RngStream};

use super::write_svg;
use crate::criteria::{harmonicity, mean_z_check};
use crate::report::{Check, RunReport};
use crate::svg::LineChart;
use crate::{CliError, ExperimentConfig};

const LEVEL: f64 = 3.0;
const STEP: f64 = 1e-3;
const ONE_STEP_DT: f64 = 1e-3;
const ONE_STEP_SAMPLES: usize = 20_000;

pub(super) fn run(
    report: &mut RunReport,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<(), CliError> {
    let rs = cfg.root_system()?;
    let n = rs.rank();
    let nu_hat = cfg.nu_hat(&rs)?;
    report.extend(harmonicity(&[n], LEVEL, STEP, cfg.m_cut).checks);

    let cut = cfg.m_cut.unwrap_or_else(|| default_m_cut(&rs, LEVEL + 1.0));
    // (deviation, allowed) at the level where deviation / allowed is largest
    let mut worst = (0.0f64, 1e-14);
    for level in [1.0, 2.0, LEVEL] {
        let lambda = rs.barycentric_drift() * level;
        let (a, tail) = psi_frenkel(&rs, &nu_hat, &lambda, cut)?;
        let (b, _) = psi_frenkel(&rs, &nu_hat, &lambda, 2.0 * cut)?;
        let dev = (a.ratio(&b) - 1.0).abs();
        let bound = tail.max(1e-14);
        if dev / bound >= worst.0 / worst.1 {
            worst = (dev, bound);
        }
    }
    let (worst, allowed) = worst;
    report.push(
        Check::gate(
            "truncation at M_cut vs 2 M_cut",
            worst,
            format!("<= {allowed:.2e}"),
            worst <= allowed,
        )
        .with_detail(format!("M_cut = {cut:.3}, levels 1, 2, {LEVEL}")),
    );

    let psi = HarmonicPsi::new(&rs, &nu_hat, cut)?;
    let start = rs.barycentric_drift();
    let ratios = one_step_ratios(
        &psi,
        &start,
        ONE_STEP_DT,
        ONE_STEP_SAMPLES,
        RngStream::new(cfg.seed, 4),
    )?;
    report.push(mean_z_check(
        "one-step reweighted survival mean".into(),
        &ratios,
        1.0,
    ));

    let hs: [f64; 8] = [0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001];
    let lambda = rs.barycentric_drift() * LEVEL;
    let mut residuals = Vec::new();
    for h in hs {
        residuals.push((
            h.log10(),
            harmonicity_residual(&psi, &lambda, h)?.abs().log10(),
        ));
    }
    report.metric("residual_log10", &residuals);
    let mut chart = LineChart::new(
        &format!("harmonicity residual, rank {n}"),
        "log10 h",
        "log10 |residual|",
    );
    chart.add("residual", "#1f4e9c", residuals);
    write_svg(report, dir, &format!("{}.svg", cfg.name), &chart)?;

    let smc = SmcConfig {
        horizon: cfg.horizon,
        dt: cfg.dt,
        particles: cfg.particles,
        m_cut: Some(cut),
        ..SmcConfig::default()
    };
    let ens = sample_conditioned_a(&rs, &nu_hat, &smc, RngStream::new(cfg.seed, 5))?;
    let half = SmcConfig {
        dt: cfg.dt / 2.0,
        ..smc.clone()
    };
    let ens_half = sample_conditioned_a(&rs, &nu_hat, &half, RngStream::new(cfg.seed, 6))?;
    let (m1, m2) = (final_mean(&ens), final_mean(&ens_half));
    let gap = m1
        .iter()
        .zip(&m2)
        .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
    report.push(
        Check::report("final mean, dt vs dt/2", gap)
            .with_detail(format!("dt {:e}: {m1:?}, dt/2: {m2:?}", cfg.dt)),
    );
    let min_ess = ens.ess.iter().copied().fold(f64::INFINITY, f64::min);
    report.push(Check::report(
        "minimum ESS fraction",
        min_ess / cfg.particles as f64,
    ));
    report.metric("resamplings", ens.resamplings);
    report.metric("final_mean", &m1);
    report.write_file(
        dir,
        &format!("{}.csv", cfg.name),
        &thinned_csv(&ens, cfg.steps),
    )?;

    let mut chart = LineChart::new("effective sample size", "t", "ESS");
    chart.add(
        "ESS",
        "#d4a017",
        ens.times[1..]
            .iter()
            .copied()
            .zip(ens.ess.iter().copied())
            .collect(),
    );
    write_svg(report, dir, &format!("{}_ess.svg", cfg.name), &chart)
}

fn final_mean(ens: &Ensemble) -> Vec<f64> {
    let last = ens.times.len() - 1;
    let n = ens.rank;
    let mut out = vec![0.0; n];
    for (p, w) in ens.weights.iter().enumerate() {
        for (o, x) in out.iter_mut().zip(&ens.states[p][last * n..(last + 1) * n]) {
            *o += w * x;
        }
    }
    out
}

/// Same columns as [`Ensemble::to_csv`] on about `points` of the time steps.
fn thinned_csv(ens: &Ensemble, points: usize) -> String {
    let last = ens.times.len() - 1;
    let mut idx: Vec<usize> = (0..=points)
        .map(|j| ((j * last) as f64 / points.max(1) as f64).round() as usize)
        .collect();
    idx.dedup();
    let mut out = String::from("particle,t,level");
    for j in 1..=ens.rank {
        out.push_str(&format!(",finite_{j}"));
    }
    out.push_str(",weight\n");
    for (p, w) in ens.weights.iter().enumerate() {
        for &k in &idx {
            let t = ens.times[k];
            out.push_str(&format!("{p},{t},{t}"));
            for c in &ens.states[p][k * ens.rank..(k + 1) * ens.rank] {
                out.push_str(&format!(",{c}"));
            }
            out.push_str(&format!(",{w}\n"));
        }
    }
    out
}
