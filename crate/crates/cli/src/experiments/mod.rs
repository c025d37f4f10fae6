//! The six `alcove` subcommands. Each writes `<out>/<experiment>/<name>.csv`,
//! one or more SVG charts and `report.json`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::report::{Check, RunReport};
use crate::{CliError, ExperimentConfig};

mod cones;
mod converge;
mod explosion;
mod figures;
mod harmonic;
mod hypotheses;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Figures,
    Explosion,
    Converge,
    Hypotheses,
    Cones,
    Harmonic,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Figures,
        Experiment::Explosion,
        Experiment::Converge,
        Experiment::Hypotheses,
        Experiment::Cones,
        Experiment::Harmonic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Figures => "figures",
            Experiment::Explosion => "explosion",
            Experiment::Converge => "converge",
            Experiment::Hypotheses => "hypotheses",
            Experiment::Cones => "cones",
            Experiment::Harmonic => "harmonic",
        }
    }

    pub fn output_dir(self, config: &ExperimentConfig) -> PathBuf {
        config.out.join(self.name())
    }
}

/// Runs `experiment` and saves its report. Failures inside the driver become
/// an `ERROR` check; only I/O on the output directory itself is returned as
/// an error.
pub fn run(experiment: Experiment, config: &ExperimentConfig) -> Result<RunReport, CliError> {
    let dir = experiment.output_dir(config);
    std::fs::create_dir_all(&dir)?;
    let mut report = RunReport::new(experiment.name(), config);
    let result = match experiment {
        Experiment::Figures => figures::run(&mut report, config, &dir),
        Experiment::Explosion => explosion::run(&mut report, config, &dir),
        Experiment::Converge => converge::run(&mut report, config, &dir),
        Experiment::Hypotheses => hypotheses::run(&mut report, config, &dir),
        Experiment::Cones => cones::run(&mut report, config, &dir),
        Experiment::Harmonic => harmonic::run(&mut report, config, &dir),
    };
    if let Err(e) = result {
        report.push(Check::error(experiment.name(), e));
    }
    report.save(&dir)?;
    Ok(report)
}

pub(crate) const PALETTE: [&str; 8] = [
    "#1f4e9c", "#3a7bd5", "#6fa8dc", "#9fc5e8", "#d4a017", "#e6b800", "#f1c232", "#ffd966",
];

pub(crate) fn blue(k: usize) -> &'static str {
    PALETTE[k % 4]
}

pub(crate) fn yellow(k: usize) -> &'static str {
    PALETTE[4 + k % 4]
}

fn csv_line(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let line: Vec<String> = fields.into_iter().collect();
    let _ = writeln!(out, "{}", line.join(","));
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn write_svg(
    report: &mut RunReport,
    dir: &Path,
    file: &str,
    chart: &crate::svg::LineChart,
) -> Result<(), CliError> {
    report.write_file(dir, file, &chart.render())
}
