//! Run artifacts against oracle artifacts of the same schema.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::output::{read_farfield, read_json, FARFIELD, REPORT};
use crate::pipeline::{amplitude_l2_error, relative};
use crate::CliError;

const DIRECTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSectionError {
    pub name: String,
    pub run: f64,
    pub oracle: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub directions: usize,
    pub amplitude_l2_error: f64,
    pub cross_sections: Vec<CrossSectionError>,
    pub amplitude_tolerance: f64,
    pub cross_section_tolerance: f64,
    pub passed: bool,
}

fn tolerance(report: &Value, key: &str, default: f64) -> f64 {
    report["config"]["oracle"][key].as_f64().unwrap_or(default)
}

/// Compares `farfield.csv` and the cross sections of `report.json`.
/// Tolerances come from the run's recorded config (oracle section).
pub fn compare(run_dir: &Path, oracle_dir: &Path) -> Result<Comparison, CliError> {
    let run = read_farfield(&run_dir.join(FARFIELD))?;
    let oracle = read_farfield(&oracle_dir.join(FARFIELD))?;
    if run.directions.len() != oracle.directions.len() {
        return Err(CliError::Compare(format!(
            "grid mismatch: {} run directions, {} oracle directions",
            run.directions.len(),
            oracle.directions.len()
        )));
    }
    if let Some(i) = run
        .directions
        .iter()
        .zip(&oracle.directions)
        .position(|(a, b)| (a - b).norm() > DIRECTION_TOLERANCE)
    {
        return Err(CliError::Compare(format!("grid mismatch at direction {i}")));
    }
    let amplitude = amplitude_l2_error(&run.amplitudes, &oracle.amplitudes, &oracle.weights);
    let run_report = read_json(&run_dir.join(REPORT))?;
    let oracle_report = read_json(&oracle_dir.join(REPORT))?;
    let mut cross_sections = Vec::new();
    for name in ["sigma_scattering", "sigma_extinction", "sigma_absorption"] {
        let (a, b) = (
            &run_report["cross_sections"][name],
            &oracle_report["cross_sections"][name],
        );
        if let (Some(a), Some(b)) = (a.as_f64(), b.as_f64()) {
            cross_sections.push(CrossSectionError {
                name: name.into(),
                run: a,
                oracle: b,
                relative_error: relative(a - b, b),
            });
        }
    }
    let amplitude_tolerance = tolerance(&run_report, "amplitude_tolerance", 0.1);
    let cross_section_tolerance = tolerance(&run_report, "cross_section_tolerance", 0.1);
    // extinction is reported but not judged, as in the run's own Mie check
    let passed = amplitude <= amplitude_tolerance
        && cross_sections
            .iter()
            .filter(|c| c.name != "sigma_extinction")
            .all(|c| c.relative_error <= cross_section_tolerance);
    Ok(Comparison {
        directions: run.directions.len(),
        amplitude_l2_error: amplitude,
        cross_sections,
        amplitude_tolerance,
        cross_section_tolerance,
        passed,
    })
}
