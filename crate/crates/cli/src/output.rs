//! Artifact files: `report.json`, `currents.csv`, `farfield.csv`,
//! `timing.json`, and for sweeps a top-level `sweep.json`.
//!
//! Floats are written with 17 significant digits. `report.json` holds no
//! timings, so identical inputs reproduce it byte for byte.

use std::path::{Path, PathBuf};

use bie_core::fields::FarField;
use bie_core::operators::CurrentKind;
use bie_core::{cnorm, CVec3, Vec3};
use bie_mie::MieSolution;
use serde::Serialize;
use serde_json::{json, Number, Value};

use crate::config::RunConfig;
use crate::pipeline::{pair, Case, CaseResult};
use crate::CliError;

pub const REPORT: &str = "report.json";
pub const CURRENTS: &str = "currents.csv";
pub const FARFIELD: &str = "farfield.csv";
pub const TIMING: &str = "timing.json";
pub const SWEEP: &str = "sweep.json";
pub const OPERATOR: &str = "operator.bin";

pub const FARFIELD_HEADER: [&str; 11] = [
    "beta_x",
    "beta_y",
    "beta_z",
    "A_x_re",
    "A_x_im",
    "A_y_re",
    "A_y_im",
    "A_z_re",
    "A_z_im",
    "dsigma_dOmega",
    "weight",
];

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rewrites every non-integer number to 17 significant digits; non-finite
/// values become `null`.
pub fn fix_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if x.is_finite() {
                float(x)
                    .parse::<Number>()
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            } else {
                Value::Null
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(fix_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, fix_floats(v))).collect()),
        other => other,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

pub fn write_json(path: &Path, value: Value) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(&fix_floats(value)).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

pub fn case_dir(root: &Path, case: &Case) -> PathBuf {
    match &case.name {
        Some(n) => root.join(n),
        None => root.to_path_buf(),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Effective config of one case: sweep removed, level and ω pinned.
pub fn case_config(config: &RunConfig, case: &Case) -> RunConfig {
    let mut c = config.clone();
    c.sweep = None;
    c.media.omega = case.omega;
    if let (Some(s), Some(l)) = (c.geometry.sphere.as_mut(), case.level) {
        s.level = l;
    }
    c
}

pub fn report(config: &RunConfig, r: &CaseResult) -> Value {
    let f = &r.far_field;
    let d = &r.solution.diagnostics;
    json!({
        "config": to_value(&case_config(config, &r.case)),
        "mesh": to_value(&r.mesh.stats()),
        "body_radius": r.body_radius,
        "wavenumbers": {
            "exterior": pair(r.wavenumbers.exterior),
            "interior": pair(r.wavenumbers.interior),
        },
        "effective_permittivity": r.medium.effective_permittivity().map(pair).ok(),
        "diagnostics": to_value(d),
        "cpv_half_delta_check": {
            "interior": to_value(&r.delta_checks[0]),
            "exterior": to_value(&r.delta_checks[1]),
        },
        "cross_sections": {
            "sigma_scattering": f.sigma_scattering,
            "sigma_extinction": f.sigma_extinction,
            "sigma_absorption": r.absorption,
            "optical_theorem_mismatch": r.medium.is_lossless().then(|| r.optical_theorem_mismatch()),
        },
        "transversality": f.transversality(),
        "radiation_residual": r.radiation_residual.iter().map(|(radius, v)| json!({ "radius": radius, "residual": v })).collect::<Vec<_>>(),
        "radiation_residual_monotone": r.radiation_monotone(),
        "mie": r.mie.as_ref().map(|(_, _, c)| to_value(c)),
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))
}

fn push_complex(rec: &mut Vec<String>, v: &CVec3) {
    for z in v.iter() {
        rec.push(float(z.re));
        rec.push(float(z.im));
    }
}

pub fn write_farfield(
    path: &Path,
    directions: &[Vec3],
    weights: &[f64],
    amplitudes: &[CVec3],
    e0: f64,
) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let io = |e: csv::Error| CliError::io(path, e);
    w.write_record(FARFIELD_HEADER).map_err(io)?;
    for ((b, wt), a) in directions.iter().zip(weights).zip(amplitudes) {
        let mut rec: Vec<String> = b.iter().map(|v| float(*v)).collect();
        push_complex(&mut rec, a);
        rec.push(float(cnorm(a).powi(2) / e0));
        rec.push(float(*wt));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Far-field table as written by [`write_farfield`].
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldTable {
    pub directions: Vec<Vec3>,
    pub amplitudes: Vec<CVec3>,
    pub weights: Vec<f64>,
}

pub fn read_farfield(path: &Path) -> Result<FarFieldTable, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let mut t = FarFieldTable {
        directions: Vec::new(),
        amplitudes: Vec::new(),
        weights: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::io(path, e))?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::io(path, e))?;
        if v.len() != FARFIELD_HEADER.len() {
            return Err(CliError::io(
                path,
                format!(
                    "expected {} columns, found {}",
                    FARFIELD_HEADER.len(),
                    v.len()
                ),
            ));
        }
        let c = |i: usize| num_complex::Complex64::new(v[i], v[i + 1]);
        t.directions.push(Vec3::new(v[0], v[1], v[2]));
        t.amplitudes.push(CVec3::new(c(3), c(5), c(7)));
        t.weights.push(v[10]);
    }
    Ok(t)
}

fn write_currents(path: &Path, r: &CaseResult) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let io = |e: csv::Error| CliError::io(path, e);
    let mut header = vec!["node".to_string(), "x".into(), "y".into(), "z".into()];
    for name in ["j", "J"] {
        for c in ["x", "y", "z"] {
            header.push(format!("{name}_{c}_re"));
            header.push(format!("{name}_{c}_im"));
        }
    }
    w.write_record(&header).map_err(io)?;
    let ext = r
        .solution
        .currents
        .cartesian(&r.frames, CurrentKind::Exterior);
    let int = r
        .solution
        .currents
        .cartesian(&r.frames, CurrentKind::Interior);
    for (s, p) in r.mesh.centroids().iter().enumerate() {
        let mut rec = vec![s.to_string()];
        rec.extend(p.iter().map(|v| float(*v)));
        push_complex(&mut rec, &ext[s]);
        push_complex(&mut rec, &int[s]);
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_case(
    dir: &Path,
    config: &RunConfig,
    r: &CaseResult,
    workers: usize,
) -> Result<(), CliError> {
    ensure_dir(dir)?;
    write_json(&dir.join(REPORT), report(config, r))?;
    write_currents(&dir.join(CURRENTS), r)?;
    let f: &FarField = &r.far_field;
    write_farfield(
        &dir.join(FARFIELD),
        &f.directions,
        &f.weights,
        &f.amplitudes,
        r.incident.amplitude.norm_sqr(),
    )?;
    let mut timing = to_value(&r.timing);
    timing["workers"] = json!(workers);
    write_json(&dir.join(TIMING), timing)
}

pub fn mie_report(sol: &MieSolution) -> Value {
    json!({
        "oracle": "mie",
        "radius": sol.radius,
        "size_parameter": sol.size_parameter,
        "relative_index": pair(sol.relative_index),
        "truncation": sol.truncation(),
        "cross_sections": {
            "sigma_scattering": sol.sigma_scattering,
            "sigma_extinction": sol.sigma_extinction,
            "sigma_absorption": sol.sigma_absorption,
        },
        "a": sol.a.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
        "b": sol.b.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn floats_have_seventeen_digits() {
        let v = fix_floats(json!({ "a": 0.1, "b": [1.0, -2.5e-300], "n": 3, "bad": f64::NAN }));
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(
            text,
            r#"{"a":1.0000000000000001e-1,"b":[1.0000000000000000e+0,-2.5000000000000000e-300],"bad":null,"n":3}"#
        );
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn farfield_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(FARFIELD);
        let dirs = vec![Vec3::z(), Vec3::x()];
        let amps = vec![
            CVec3::new(
                Complex64::new(0.1, -0.2),
                Complex64::new(1.0 / 3.0, 0.0),
                Complex64::new(0.0, 1e-300),
            ),
            CVec3::zeros(),
        ];
        write_farfield(&p, &dirs, &[0.25, 0.75], &amps, 2.0).unwrap();
        let t = read_farfield(&p).unwrap();
        assert_eq!(t.directions, dirs);
        assert_eq!(t.amplitudes, amps);
        assert_eq!(t.weights, vec![0.25, 0.75]);
    }
}
