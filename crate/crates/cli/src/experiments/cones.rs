//! Module catalogs for ranks 1 and 2 and their exact self-tests.

use std::path::Path;

use super::{csv_line, write_svg};
use crate::criteria::{audit_catalog, audit_checks, build_catalog, CATALOG_SHAPES};
use crate::report::RunReport;
use crate::svg::LineChart;
use crate::{CliError, ExperimentConfig};

pub(super) fn run(
    report: &mut RunReport,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<(), CliError> {
    let mut csv = String::from(
        "rank,drift_scale,cutoff,vertices,tail_bound,string_mismatches,duplicates,\
         own_weight_disagreements,suffix_complement_disagreements,halfstep_disagreements\n",
    );
    let mut chart = LineChart::new("catalog growth", "(omega | nu_hat)", "vertices");
    for (k, (n, scale)) in CATALOG_SHAPES.into_iter().enumerate() {
        let (rs, cat) = build_catalog(n, scale, cfg.e_max)?;
        let audit = audit_catalog(&rs, &cat)?;
        report.extend(audit_checks(n, &audit));
        csv_line(
            &mut csv,
            [
                n.to_string(),
                scale.to_string(),
                cat.cutoff.to_string(),
                audit.vertices.to_string(),
                audit.tail_bound.to_string(),
                audit.string_mismatches.to_string(),
                audit.duplicates.to_string(),
                audit.own_weight_disagreements.to_string(),
                audit.suffix_complement_disagreements.to_string(),
                audit.halfstep_disagreements.to_string(),
            ],
        );
        report.write_file(dir, &format!("{}_rank{n}.csv", cfg.name), &cat.to_csv())?;
        let mut energies: Vec<f64> = cat.vertices.iter().map(|v| v.weight_exponent).collect();
        energies.sort_by(f64::total_cmp);
        let pts = energies
            .iter()
            .enumerate()
            .map(|(j, &e)| (e, (j + 1) as f64))
            .collect();
        chart.add(&format!("rank {n}"), ["#1f4e9c", "#d4a017"][k % 2], pts);
    }
    report.write_file(dir, &format!("{}.csv", cfg.name), &csv)?;
    write_svg(report, dir, &format!("{}.svg", cfg.name), &chart)
}
