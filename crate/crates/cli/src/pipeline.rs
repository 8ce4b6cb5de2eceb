//! One solve per case: build the mesh, assemble, solve, evaluate fields and
//! compare with the Mie series when the body is a sphere.

use std::path::Path;
use std::time::Instant;

use bie_core::fields::{DirectionGrid, FarField, FieldOptions, Scatterer};
use bie_core::media::{Medium, WaveNumbers};
use bie_core::mesh::{
    load_mesh, make_unit_sphere, refine, tangent_frames, MeshFormat, SurfaceMesh, TangentFrame,
};
use bie_core::operators::DeltaCheck;
use bie_core::solve::{assemble_system, solve_system, IncidentField, Solution};
use bie_core::{cnorm, CVec3, Complex64, Vec3};
use bie_mie::{mie_far_field, mie_solve, MieIncidence, MieMedium, MieSolution};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// One point of a sweep (or the single run).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    /// Output subdirectory; `None` writes into the output directory itself.
    pub name: Option<String>,
    pub level: Option<usize>,
    pub omega: f64,
}

pub fn cases(config: &RunConfig) -> Vec<Case> {
    let level = config.geometry.sphere.map(|s| s.level);
    let omega = config.media.omega;
    match &config.sweep {
        Some(s) if s.levels.is_some() => s
            .levels
            .iter()
            .flatten()
            .map(|&l| Case {
                name: Some(format!("level-{l}")),
                level: Some(l),
                omega,
            })
            .collect(),
        Some(s) if s.frequencies.is_some() => s
            .frequencies
            .iter()
            .flatten()
            .enumerate()
            .map(|(i, &w)| Case {
                name: Some(format!("omega-{i}")),
                level,
                omega: w,
            })
            .collect(),
        _ => vec![Case {
            name: None,
            level,
            omega,
        }],
    }
}

/// Mesh for a case and the radius of the body about the origin. For a mesh
/// file the case level counts flat refinements.
pub fn build_mesh(config: &RunConfig, case: &Case) -> Result<(SurfaceMesh, f64), CliError> {
    let bad = |field: &str, e: bie_core::mesh::MeshError| CliError::Config {
        field: field.into(),
        message: e.to_string(),
    };
    if let Some(s) = config.geometry.sphere {
        let unit = make_unit_sphere(case.level.unwrap_or(s.level))
            .map_err(|e| bad("geometry.sphere", e))?;
        let vertices = unit.vertices().iter().map(|v| v * s.radius).collect();
        let mesh = SurfaceMesh::new(vertices, unit.triangles().to_vec())
            .map_err(|e| bad("geometry.sphere", e))?;
        return Ok((mesh, s.radius));
    }
    let path = config
        .geometry
        .mesh
        .as_deref()
        .ok_or_else(|| CliError::Config {
            field: "geometry".into(),
            message: "missing sphere or mesh".into(),
        })?;
    let format = MeshFormat::from_path(path).ok_or_else(|| CliError::Config {
        field: "geometry.mesh".into(),
        message: "unknown mesh format".into(),
    })?;
    let mut mesh = load_mesh(path, format).map_err(|e| bad("geometry.mesh", e))?;
    let levels = match &config.sweep {
        Some(s) if s.levels.is_some() => case.level.unwrap_or(0),
        _ => config.geometry.refine,
    };
    for _ in 0..levels {
        mesh = refine(&mesh, None);
    }
    let radius = mesh.bounding_radius();
    Ok((mesh, radius))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    pub fields_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeError {
    pub bie: f64,
    pub mie: f64,
    pub relative_error: f64,
}

impl RelativeError {
    pub fn new(bie: f64, mie: f64) -> Self {
        Self {
            bie,
            mie,
            relative_error: relative(bie - mie, mie),
        }
    }
}

/// `|d| / |scale|`, or `|d|` when the scale vanishes.
pub fn relative(d: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        d.abs()
    } else {
        (d / scale).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MieComparison {
    pub truncation: usize,
    pub size_parameter: f64,
    /// `(Σ w |A − A_mie|² / Σ w |A_mie|²)^½` over the direction grid.
    pub amplitude_l2_error: f64,
    pub sigma_scattering: RelativeError,
    pub sigma_extinction: RelativeError,
    pub sigma_absorption: Option<RelativeError>,
    pub passed: bool,
}

/// Everything a case produces.
pub struct CaseResult {
    pub case: Case,
    pub mesh: SurfaceMesh,
    pub frames: Vec<TangentFrame>,
    pub medium: Medium,
    pub wavenumbers: WaveNumbers,
    pub incident: IncidentField,
    pub body_radius: f64,
    pub solution: Solution,
    pub delta_checks: [DeltaCheck; 2],
    pub far_field: FarField,
    pub radiation_residual: Vec<(f64, f64)>,
    pub absorption: Option<f64>,
    pub mie: Option<(MieSolution, Vec<CVec3>, MieComparison)>,
    pub timing: Timing,
}

impl CaseResult {
    pub fn scatterer(&self) -> Scatterer<'_> {
        Scatterer {
            mesh: &self.mesh,
            frames: &self.frames,
            currents: &self.solution.currents,
            medium: &self.medium,
            incident: &self.incident,
        }
    }

    /// `σ_ext − σ_s` relative to `σ_ext`, for lossless bodies where the two
    /// should agree.
    pub fn optical_theorem_mismatch(&self) -> f64 {
        let f = &self.far_field;
        relative(f.sigma_extinction - f.sigma_scattering, f.sigma_extinction)
    }

    pub fn radiation_monotone(&self) -> bool {
        self.radiation_residual.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

pub fn mie_medium(medium: &Medium) -> MieMedium {
    MieMedium {
        epsilon_interior: medium.epsilon_interior,
        epsilon_exterior: medium.epsilon_exterior,
        sigma: medium.sigma,
        mu0: medium.mu0,
        omega: medium.omega,
    }
}

pub fn mie_incidence(incident: &IncidentField) -> MieIncidence {
    let p = incident.polarization;
    let d = incident.direction;
    MieIncidence {
        polarization: [p.x, p.y, p.z],
        direction: [d.x, d.y, d.z],
        amplitude: incident.amplitude,
    }
}

/// Mie amplitudes on a direction grid.
pub fn mie_amplitudes(
    sol: &MieSolution,
    incident: &IncidentField,
    grid: &DirectionGrid,
) -> Vec<CVec3> {
    let dirs: Vec<[f64; 3]> = grid.directions.iter().map(|d| [d.x, d.y, d.z]).collect();
    mie_far_field(sol, &mie_incidence(incident), &dirs)
        .into_iter()
        .map(|a| CVec3::new(a[0], a[1], a[2]))
        .collect()
}

pub fn amplitude_l2_error(got: &[CVec3], want: &[CVec3], weights: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((a, b), w) in got.iter().zip(want).zip(weights) {
        num += w * cnorm(&(a - b)).powi(2);
        den += w * cnorm(b).powi(2);
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

pub fn solve_mie(
    config: &RunConfig,
    medium: &Medium,
    radius: f64,
) -> Result<MieSolution, CliError> {
    mie_solve(radius, &mie_medium(medium), config.oracle.truncation).map_err(|e| CliError::Config {
        field: "oracle".into(),
        message: e.to_string(),
    })
}

/// Runs one case. The assembled matrix is written to `dump` when given.
pub fn run_case(
    config: &RunConfig,
    case: &Case,
    dump: Option<&Path>,
) -> Result<CaseResult, CliError> {
    let start = Instant::now();
    let (mesh, body_radius) = build_mesh(config, case)?;
    let frames = tangent_frames(&mesh);
    let medium = config.medium(case.omega)?;
    let wavenumbers = medium.wavenumbers().map_err(|e| CliError::Config {
        field: "media".into(),
        message: e.to_string(),
    })?;
    let incident = config.incident(case.omega)?;

    let system = assemble_system(&mesh, &frames, &medium, &incident, &config.system_options())?;
    if let Some(path) = dump {
        bie_core::operators::write_operator(path, &system.matrix)
            .map_err(|e| CliError::io(path, e))?;
    }
    let assembled = Instant::now();
    let solution = solve_system(&system, &config.solve_options())?;
    let delta_checks = system.delta_checks;
    drop(system);
    let solved = Instant::now();

    let opts = FieldOptions {
        regular_degree: config.solver.regular_degree,
        ..FieldOptions::default()
    };
    let scatterer = Scatterer {
        mesh: &mesh,
        frames: &frames,
        currents: &solution.currents,
        medium: &medium,
        incident: &incident,
    };
    let grid =
        DirectionGrid::icosahedral(config.fields.directions).ok_or_else(|| CliError::Config {
            field: "fields.directions".into(),
            message: "must be 20·4^L".into(),
        })?;
    let far_field = scatterer.far_field(&grid, &opts)?;
    let radii: Vec<f64> = config
        .fields
        .radiation_radii
        .iter()
        .map(|r| r * body_radius)
        .collect();
    let rdirs = DirectionGrid::icosahedral(config.fields.radiation_directions)
        .map(|g| g.directions)
        .unwrap_or_else(|| vec![Vec3::z()]);
    let residual = scatterer.radiation_residual(&radii, &rdirs, &opts)?;
    let radiation_residual: Vec<(f64, f64)> = radii.into_iter().zip(residual).collect();
    let absorption = match config.fields.absorption.unwrap_or(medium.sigma > 0.0) {
        true => Some(scatterer.absorption_cross_section(
            config.fields.absorption_radius * body_radius,
            config.fields.absorption_points,
            &opts,
        )?),
        false => None,
    };

    let mie = match (config.geometry.sphere, config.oracle.mie) {
        (Some(s), true) => {
            let sol = solve_mie(config, &medium, s.radius)?;
            let amplitudes = mie_amplitudes(&sol, &incident, &grid);
            let amplitude_l2_error =
                amplitude_l2_error(&far_field.amplitudes, &amplitudes, &grid.weights);
            let sigma_scattering =
                RelativeError::new(far_field.sigma_scattering, sol.sigma_scattering);
            let sigma_extinction =
                RelativeError::new(far_field.sigma_extinction, sol.sigma_extinction);
            let sigma_absorption = absorption.map(|a| RelativeError::new(a, sol.sigma_absorption));
            let tol = config.oracle.cross_section_tolerance;
            let passed = amplitude_l2_error <= config.oracle.amplitude_tolerance
                && sigma_scattering.relative_error <= tol
                && sigma_absorption.is_none_or(|a| a.relative_error <= tol);
            let cmp = MieComparison {
                truncation: sol.truncation(),
                size_parameter: sol.size_parameter,
                amplitude_l2_error,
                sigma_scattering,
                sigma_extinction,
                sigma_absorption,
                passed,
            };
            Some((sol, amplitudes, cmp))
        }
        _ => None,
    };
    let done = Instant::now();
    let timing = Timing {
        assembly_seconds: (assembled - start).as_secs_f64(),
        solve_seconds: (solved - assembled).as_secs_f64(),
        fields_seconds: (done - solved).as_secs_f64(),
        total_seconds: (done - start).as_secs_f64(),
    };
    Ok(CaseResult {
        case: case.clone(),
        mesh,
        frames,
        medium,
        wavenumbers,
        incident,
        body_radius,
        solution,
        delta_checks,
        far_field,
        radiation_residual,
        absorption,
        mie,
        timing,
    })
}

/// Complex number as `[re, im]`.
pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}
