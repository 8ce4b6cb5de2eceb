//! Batch driver: config → mesh → assembly → solve → fields → report.
//!
//! Exit codes: 0 success, 1 comparison outside tolerance, 2 invalid
//! configuration or input, 3 solve or evaluation failure, 4 I/O failure.
//! Failures print one JSON object on stderr.

pub mod compare;
pub mod config;
pub mod output;
pub mod pipeline;

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Config { field: String, message: String },
    #[error("{message}")]
    Solve {
        message: String,
        diagnostics: Option<Value>,
    },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{0}")]
    Compare(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Compare(_) => 2,
            CliError::Solve { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> Value {
        let mut e = json!({
            "code": self.exit_code(),
            "message": self.to_string(),
        });
        let (kind, extra) = match self {
            CliError::Config { field, .. } => ("config", json!({ "field": field })),
            CliError::Solve { diagnostics, .. } => ("solve", json!({ "diagnostics": diagnostics })),
            CliError::Io { path, .. } => ("io", json!({ "path": path })),
            CliError::Compare(_) => ("compare", json!({})),
        };
        e["kind"] = json!(kind);
        if let (Value::Object(e), Value::Object(extra)) = (&mut e, extra) {
            e.extend(extra);
        }
        json!({ "error": e })
    }
}

impl From<bie_core::solve::SolveError> for CliError {
    fn from(e: bie_core::solve::SolveError) -> Self {
        use bie_core::solve::SolveError;
        match e {
            SolveError::Incident(m) => CliError::Config {
                field: "incident".into(),
                message: m,
            },
            SolveError::Media(m) => CliError::Config {
                field: "media".into(),
                message: m.to_string(),
            },
            SolveError::Residual {
                ref diagnostics, ..
            } => CliError::Solve {
                message: e.to_string(),
                diagnostics: serde_json::to_value(diagnostics).ok(),
            },
            other => CliError::Solve {
                message: other.to_string(),
                diagnostics: None,
            },
        }
    }
}

impl From<bie_core::fields::FieldError> for CliError {
    fn from(e: bie_core::fields::FieldError) -> Self {
        CliError::Solve {
            message: format!("field evaluation: {e}"),
            diagnostics: None,
        }
    }
}

impl From<bie_core::operators::OperatorError> for CliError {
    fn from(e: bie_core::operators::OperatorError) -> Self {
        CliError::Solve {
            message: format!("assembly: {e}"),
            diagnostics: None,
        }
    }
}

/// `run`: every case of the config, written under the output directory.
pub fn run_command(
    config_path: &Path,
    output: Option<&Path>,
    workers: usize,
) -> Result<Vec<pipeline::CaseResult>, CliError> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(dir) = output {
        config.output.directory = dir.to_path_buf();
    }
    let root = config.output.directory.clone();
    output::ensure_dir(&root)?;
    let mut results = Vec::new();
    let mut summary = Vec::new();
    for case in pipeline::cases(&config) {
        let dir = output::case_dir(&root, &case);
        output::ensure_dir(&dir)?;
        let dump = config
            .output
            .dump_operator
            .then(|| dir.join(output::OPERATOR));
        let r = pipeline::run_case(&config, &case, dump.as_deref())?;
        output::write_case(&dir, &config, &r, workers)?;
        summary.push(json!({
            "case": case.name,
            "level": case.level,
            "omega": case.omega,
            "unknowns": r.solution.diagnostics.unknowns,
            "relative_residual": r.solution.diagnostics.relative_residual,
            "rank": r.solution.diagnostics.rank,
            "sigma_scattering": r.far_field.sigma_scattering,
            "mie_amplitude_l2_error": r.mie.as_ref().map(|m| m.2.amplitude_l2_error),
            "mie_sigma_scattering_error": r.mie.as_ref().map(|m| m.2.sigma_scattering.relative_error),
        }));
        results.push(r);
    }
    if config.sweep.is_some() {
        let errors: Vec<Option<f64>> = results
            .iter()
            .map(|r| r.mie.as_ref().map(|m| m.2.amplitude_l2_error))
            .collect();
        let monotone = errors
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
            .map(|e| e.windows(2).all(|w| w[1] < w[0]));
        output::write_json(
            &root.join(output::SWEEP),
            json!({ "cases": summary, "mie_error_decreasing": monotone }),
        )?;
    }
    Ok(results)
}

/// `mie`: the Mie oracle for a sphere config, in the far-field schema of a
/// run. Frequency sweeps get one subdirectory per frequency, named as in
/// the run; level sweeps share one oracle.
pub fn mie_command(config_path: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let sphere = config.geometry.sphere.ok_or_else(|| CliError::Config {
        field: "geometry.sphere".into(),
        message: "the Mie oracle needs a sphere".into(),
    })?;
    let root = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.output.directory.join("mie"));
    let grid = bie_core::fields::DirectionGrid::icosahedral(config.fields.directions).ok_or_else(
        || CliError::Config {
            field: "fields.directions".into(),
            message: "must be 20·4^L".into(),
        },
    )?;
    let frequency_sweep = config
        .sweep
        .as_ref()
        .is_some_and(|s| s.frequencies.is_some());
    let cases: Vec<pipeline::Case> = match frequency_sweep {
        true => pipeline::cases(&config),
        false => vec![pipeline::Case {
            name: None,
            level: None,
            omega: config.media.omega,
        }],
    };
    for case in cases {
        let dir = output::case_dir(&root, &case);
        output::ensure_dir(&dir)?;
        let medium = config.medium(case.omega)?;
        let incident = config.incident(case.omega)?;
        let sol = pipeline::solve_mie(&config, &medium, sphere.radius)?;
        let amplitudes = pipeline::mie_amplitudes(&sol, &incident, &grid);
        output::write_json(&dir.join(output::REPORT), output::mie_report(&sol))?;
        output::write_farfield(
            &dir.join(output::FARFIELD),
            &grid.directions,
            &grid.weights,
            &amplitudes,
            incident.amplitude.norm_sqr(),
        )?;
    }
    Ok(())
}

/// `compare`: writes `comparison.json` into the run directory and returns
/// the comparison.
pub fn compare_command(run_dir: &Path, oracle_dir: &Path) -> Result<compare::Comparison, CliError> {
    let c = compare::compare(run_dir, oracle_dir)?;
    output::write_json(
        &run_dir.join("comparison.json"),
        serde_json::to_value(&c).unwrap_or(Value::Null),
    )?;
    Ok(c)
}

/// Worker count from the flag, else `BIE_WORKERS`, else all cores.
pub fn resolve_workers(flag: Option<usize>) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("BIE_WORKERS") {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Config {
                field: "BIE_WORKERS".into(),
                message: format!("not a worker count: {v:?}"),
            })?,
            Err(_) => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
        },
    };
    if n == 0 {
        return Err(CliError::Config {
            field: "workers".into(),
            message: "must be at least 1".into(),
        });
    }
    Ok(n)
}
