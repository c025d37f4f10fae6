//! One Brownian path, its Pitman cascade (blue), corrected cascade (yellow)
//! and dominant projection (red), evaluated on every `α_i^∨`.

use std::path::Path;

use alcove_core::path::{corrected_cascades, sup_pairing_distance, uniform_grid};
use alcove_core::sampling::sample_brownian;
use alcove_core::{
    dominant_projection, is_dominant, DirectionSequence, PiecewiseLinearPath, RngStream, RootSystem,
};

use super::{blue, csv_line, write_svg, yellow};
use crate::report::{Check, RunReport};
use crate::svg::LineChart;
use crate::{CliError, ExperimentConfig};

const MAX_SWEEPS: usize = 10_000;

struct Curve<'a> {
    series: &'static str,
    depth: Option<usize>,
    path: &'a PiecewiseLinearPath,
}

pub(super) fn run(
    report: &mut RunReport,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<(), CliError> {
    let rs = cfg.root_system()?;
    let n = rs.rank();
    let nu = cfg.nu_hat(&rs)?.finite.to_vec();
    let mut rng = RngStream::new(cfg.seed, 1).rng();
    let path = sample_brownian(&rs, cfg.horizon, cfg.dt, &nu, &mut rng)?;
    report.write_file(dir, &format!("{}_input.csv", cfg.name), &path.to_csv())?;

    let seq = DirectionSequence::cyclic(n);
    let u = rs.correction_vector(&seq)?;
    let depth = cfg.depths.iter().copied().max().unwrap_or(0);
    let (blues, yellows) = corrected_cascades(&rs, &path, &seq, &u, depth);
    let red = match dominant_projection(&rs, &path, &seq, cfg.horizon, MAX_SWEEPS) {
        Ok((red, sweeps)) => {
            report.metric("dominant_sweeps", sweeps);
            report.push(Check::gate(
                "dominant projection is dominant",
                f64::from(u8::from(is_dominant(&rs, &red, 1e-9))),
                "= 1",
                is_dominant(&rs, &red, 1e-9),
            ));
            Some(red)
        }
        Err(e) => {
            report.push(Check::error("dominant projection", e));
            None
        }
    };

    let mut curves = vec![Curve {
        series: "input",
        depth: None,
        path: &path,
    }];
    for &d in &cfg.depths {
        curves.push(Curve {
            series: "blue",
            depth: Some(d),
            path: &blues[d],
        });
        curves.push(Curve {
            series: "yellow",
            depth: Some(d),
            path: &yellows[d],
        });
    }
    if let Some(red) = &red {
        curves.push(Curve {
            series: "red",
            depth: None,
            path: red,
        });
    }

    let grid = uniform_grid(cfg.horizon, cfg.steps);
    let mut csv = String::from("t");
    for i in 0..=n {
        csv.push_str(&format!(",pair_{i}"));
    }
    csv.push_str(",series,depth\n");
    let evaluated: Vec<Vec<Vec<f64>>> = curves
        .iter()
        .map(|c| {
            c.path
                .evaluate_sorted(&grid)
                .iter()
                .map(|v| rs.pairings(v))
                .collect()
        })
        .collect();
    for (c, rows) in curves.iter().zip(&evaluated) {
        for (t, p) in grid.iter().zip(rows) {
            csv_line(
                &mut csv,
                std::iter::once(t.to_string())
                    .chain(p.iter().map(f64::to_string))
                    .chain([
                        c.series.to_string(),
                        c.depth.map_or_else(String::new, |d| d.to_string()),
                    ]),
            );
        }
    }
    report.write_file(dir, &format!("{}.csv", cfg.name), &csv)?;

    for i in 0..=n {
        let mut chart = LineChart::new(
            &format!("successive transformations, rank {n}"),
            "t",
            &format!("<., alpha_{i}^vee>"),
        );
        for (k, (c, rows)) in curves.iter().zip(&evaluated).enumerate() {
            let color = match c.series {
                "blue" => blue(k / 2),
                "yellow" => yellow(k / 2),
                "red" => "#cc0000",
                _ => "#888888",
            };
            let label = match c.depth {
                Some(d) => format!("{} {d}", c.series),
                None => c.series.to_string(),
            };
            let pts = grid.iter().zip(rows).map(|(&t, p)| (t, p[i])).collect();
            chart.add(&label, color, pts);
        }
        let file = if i == 1 {
            format!("{}.svg", cfg.name)
        } else {
            format!("{}_alpha{i}.svg", cfg.name)
        };
        write_svg(report, dir, &file, &chart)?;
    }

    report.extend(period_differences(&rs, &blues, &yellows, &cfg.depths));
    if let Some(red) = &red {
        let last = cfg.depths.iter().copied().max().unwrap_or(0);
        report.push(
            Check::report(
                "sup distance from the deepest corrected cascade to the dominant projection",
                sup_pairing_distance(&rs, &yellows[last], red),
            )
            .with_detail(format!("depth {last}")),
        );
    }
    Ok(())
}

/// Sup-differences `E_k` between depths `k` and `k + n + 1` at the first and
/// last requested depths where both exist.
fn period_differences(
    rs: &RootSystem,
    blues: &[PiecewiseLinearPath],
    yellows: &[PiecewiseLinearPath],
    depths: &[usize],
) -> Vec<Check> {
    let lag = rs.rank() + 1;
    let valid: Vec<usize> = depths
        .iter()
        .copied()
        .filter(|&d| d + lag < blues.len())
        .collect();
    let mut out = Vec::new();
    for (series, cascade) in [("blue", blues), ("yellow", yellows)] {
        for &d in valid
            .first()
            .into_iter()
            .chain(valid.last().filter(|_| valid.len() > 1))
        {
            out.push(
                Check::report(
                    format!("{series} E_{d}"),
                    sup_pairing_distance(rs, &cascade[d], &cascade[d + lag]),
                )
                .with_detail(format!("depth {d} vs {}", d + lag)),
            );
        }
    }
    out
}
