//! Explosion metric `E_k` over an ensemble of seeds.

use std::path::Path;

use super::{csv_line, median, write_svg};
use crate::criteria::{explosion_checks, explosion_ensemble, explosion_fractions};
use crate::report::RunReport;
use crate::svg::LineChart;
use crate::{CliError, ExperimentConfig};

pub const SEEDS: usize = 20;

pub(super) fn run(
    report: &mut RunReport,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<(), CliError> {
    let rs = cfg.root_system()?;
    let n = rs.rank();
    let nu = cfg.nu_hat(&rs)?.finite.to_vec();
    let ensemble = explosion_ensemble(&rs, &nu, cfg.horizon, cfg.dt, SEEDS, cfg.seed)?;
    report.extend(explosion_checks(n, &ensemble));
    let [yp, bp, ys, bs] = explosion_fractions(n, &ensemble);
    report.metric("fraction_yellow_decreasing", yp);
    report.metric("fraction_blue_increasing", bp);
    report.metric("fraction_yellow_decreasing_lag1", ys);
    report.metric("fraction_blue_increasing_lag1", bs);
    report.metric("seeds", SEEDS);

    let mut csv = String::from("seed,series,lag,k,E\n");
    for s in &ensemble {
        for (series, lag, values) in [
            ("blue", n + 1, &s.blue_period),
            ("yellow", n + 1, &s.yellow_period),
            ("blue", 1, &s.blue_step),
            ("yellow", 1, &s.yellow_step),
        ] {
            for (k, e) in values.iter().enumerate() {
                csv_line(
                    &mut csv,
                    [
                        s.seed.to_string(),
                        series.into(),
                        lag.to_string(),
                        k.to_string(),
                        e.to_string(),
                    ],
                );
            }
        }
    }
    report.write_file(dir, &format!("{}.csv", cfg.name), &csv)?;

    let medians = |pick: &dyn Fn(&crate::criteria::ExplosionSeries) -> &Vec<f64>| {
        let len = ensemble.iter().map(|s| pick(s).len()).min().unwrap_or(0);
        let series: Vec<(f64, f64)> = (0..len)
            .map(|k| {
                let mut col: Vec<f64> = ensemble.iter().map(|s| pick(s)[k]).collect();
                (k as f64, median(&mut col))
            })
            .collect();
        series
    };
    let blue_med = medians(&|s| &s.blue_period);
    let yellow_med = medians(&|s| &s.yellow_period);
    report.metric(
        "median_blue_period",
        blue_med.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    report.metric(
        "median_yellow_period",
        yellow_med.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    let mut chart = LineChart::new(
        &format!("median E_k over {SEEDS} seeds, rank {n}"),
        "k",
        &format!("sup distance between depths k and k+{}", n + 1),
    );
    chart.add("Pitman cascade", "#1f4e9c", blue_med);
    chart.add("corrected cascade", "#d4a017", yellow_med);
    write_svg(report, dir, &format!("{}.svg", cfg.name), &chart)
}
