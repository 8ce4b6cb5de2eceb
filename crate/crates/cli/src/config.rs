//! Run configuration (TOML).
//!
//! ```toml
//! [geometry]
//! sphere = { level = 2, radius = 1.0 }   # or: mesh = "body.obj", refine = 0
//!
//! [media]
//! epsilon = 2.25      # interior permittivity
//! sigma = 0.0         # interior conductivity
//! omega = 1.0
//! epsilon0 = 1.0      # optional, default 1
//! mu0 = 1.0           # optional, default 1
//!
//! [incident]
//! polarization = [1.0, 0.0, 0.0]
//! direction = [0.0, 0.0, 1.0]
//! amplitude = [1.0, 0.0]                 # re, im
//!
//! [solver]              # all optional
//! method = "direct-lsq"                  # direct-lsq | direct-lu | iterative
//! residual_threshold = 1e-6
//! rcond = 1e-10
//! normal_eq_weighting = "eq3"            # eq3 | eq15
//! regular_degree = 5
//! cpv_order = 12
//! gmres_restart = 200
//! gmres_max_iterations = 20000
//! gmres_tolerance = 1e-12
//!
//! [fields]              # all optional
//! directions = 320                       # 20·4^L
//! radiation_radii = [10.0, 20.0, 40.0]   # multiples of the body radius
//! radiation_directions = 20
//! absorption = true                      # default: on when sigma > 0
//! absorption_radius = 3.0                # multiple of the body radius
//! absorption_points = 16
//!
//! [oracle]              # spheres only, all optional
//! mie = true
//! truncation = 30
//! amplitude_tolerance = 0.1
//! cross_section_tolerance = 0.1
//!
//! [output]
//! directory = "out"                      # relative to the config file
//! dump_operator = false
//!
//! [sweep]               # optional, one of
//! levels = [1, 2, 3]
//! frequencies = [0.5, 1.0]
//! ```

use std::path::{Path, PathBuf};

use bie_core::media::Medium;
use bie_core::operators::NormalWeighting;
use bie_core::solve::{SolveMethod, SolveOptions, SystemOptions};
use bie_core::{Complex64, Vec3};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub media: MediaConfig,
    pub incident: IncidentConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub fields: FieldsConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub sphere: Option<SphereConfig>,
    pub mesh: Option<PathBuf>,
    /// Flat midpoint refinements applied to a mesh file.
    #[serde(default)]
    pub refine: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    pub level: usize,
    #[serde(default = "one")]
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediaConfig {
    pub epsilon: f64,
    #[serde(default)]
    pub sigma: f64,
    pub omega: f64,
    #[serde(default = "one")]
    pub epsilon0: f64,
    #[serde(default = "one")]
    pub mu0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentConfig {
    pub polarization: [f64; 3],
    pub direction: [f64; 3],
    #[serde(default = "unit_amplitude")]
    pub amplitude: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: SolveMethod,
    pub residual_threshold: f64,
    pub rcond: f64,
    pub normal_eq_weighting: NormalWeighting,
    pub regular_degree: usize,
    pub cpv_order: usize,
    pub gmres_restart: usize,
    pub gmres_max_iterations: usize,
    pub gmres_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolveOptions::default();
        let a = SystemOptions::default();
        Self {
            method: s.method,
            residual_threshold: s.residual_threshold,
            rcond: s.rcond,
            normal_eq_weighting: a.weighting,
            regular_degree: a.assembly.regular_degree,
            cpv_order: a.assembly.cpv_order,
            gmres_restart: s.gmres_restart,
            gmres_max_iterations: s.gmres_max_iterations,
            gmres_tolerance: s.gmres_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsConfig {
    pub directions: usize,
    pub radiation_radii: Vec<f64>,
    pub radiation_directions: usize,
    pub absorption: Option<bool>,
    pub absorption_radius: f64,
    pub absorption_points: usize,
}

impl Default for FieldsConfig {
    fn default() -> Self {
        Self {
            directions: 320,
            radiation_radii: vec![10.0, 20.0, 40.0],
            radiation_directions: 20,
            absorption: None,
            absorption_radius: 3.0,
            absorption_points: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub mie: bool,
    pub truncation: Option<usize>,
    pub amplitude_tolerance: f64,
    pub cross_section_tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            mie: true,
            truncation: None,
            amplitude_tolerance: 0.1,
            cross_section_tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub dump_operator: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("bie-output"),
            dump_operator: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub levels: Option<Vec<usize>>,
    pub frequencies: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

impl RunConfig {
    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(mesh) = &config.geometry.mesh {
            config.geometry.mesh = Some(base.join(mesh));
        }
        config.output.directory = base.join(&config.output.directory);
        config.validate()?;
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| text[s].trim().to_string())
                .unwrap_or_default();
            invalid(
                if field.is_empty() { "config" } else { &field },
                e.message(),
            )
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.geometry;
        match (&g.sphere, &g.mesh) {
            (Some(_), Some(_)) => {
                return Err(invalid("geometry", "give either sphere or mesh, not both"))
            }
            (None, None) => return Err(invalid("geometry", "missing sphere or mesh")),
            (Some(s), None) => {
                if !(s.radius.is_finite() && s.radius > 0.0) {
                    return Err(invalid("geometry.sphere.radius", "must be positive"));
                }
                if s.level > 6 {
                    return Err(invalid("geometry.sphere.level", "at most 6"));
                }
            }
            (None, Some(p)) => {
                if !p.exists() {
                    return Err(invalid(
                        "geometry.mesh",
                        format!("{} does not exist", p.display()),
                    ));
                }
                if bie_core::mesh::MeshFormat::from_path(p).is_none() {
                    return Err(invalid(
                        "geometry.mesh",
                        "unknown mesh format (expected .obj or .msh)",
                    ));
                }
            }
        }
        let m = &self.media;
        for (name, v) in [
            ("media.epsilon", m.epsilon),
            ("media.omega", m.omega),
            ("media.epsilon0", m.epsilon0),
            ("media.mu0", m.mu0),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "must be positive"));
            }
        }
        if !(m.sigma.is_finite() && m.sigma >= 0.0) {
            return Err(invalid("media.sigma", "must be non-negative"));
        }
        self.medium(m.omega)?;
        self.incident(m.omega)?;
        let s = &self.solver;
        for (name, v) in [
            ("solver.residual_threshold", s.residual_threshold),
            ("solver.rcond", s.rcond),
            ("solver.gmres_tolerance", s.gmres_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "must be positive"));
            }
        }
        if s.regular_degree == 0 || s.cpv_order == 0 {
            return Err(invalid("solver", "quadrature orders must be positive"));
        }
        if s.gmres_restart == 0 {
            return Err(invalid("solver.gmres_restart", "must be positive"));
        }
        let f = &self.fields;
        if bie_core::fields::DirectionGrid::icosahedral(f.directions).is_none() {
            return Err(invalid("fields.directions", "must be 20·4^L"));
        }
        if bie_core::fields::DirectionGrid::icosahedral(f.radiation_directions).is_none() {
            return Err(invalid("fields.radiation_directions", "must be 20·4^L"));
        }
        if f.radiation_radii
            .iter()
            .any(|r| !(r.is_finite() && *r > 1.0))
        {
            return Err(invalid(
                "fields.radiation_radii",
                "radii must exceed the body radius",
            ));
        }
        if !(f.absorption_radius.is_finite() && f.absorption_radius > 1.0) {
            return Err(invalid(
                "fields.absorption_radius",
                "must exceed the body radius",
            ));
        }
        if f.absorption_points < 2 {
            return Err(invalid("fields.absorption_points", "at least 2"));
        }
        let o = &self.oracle;
        if !(o.amplitude_tolerance > 0.0 && o.cross_section_tolerance > 0.0) {
            return Err(invalid("oracle", "tolerances must be positive"));
        }
        if let Some(sweep) = &self.sweep {
            match (&sweep.levels, &sweep.frequencies) {
                (Some(l), None) if !l.is_empty() => {
                    if l.iter().any(|&v| v > 6) {
                        return Err(invalid("sweep.levels", "at most 6"));
                    }
                }
                (None, Some(w)) if !w.is_empty() => {
                    if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                        return Err(invalid("sweep.frequencies", "must be positive"));
                    }
                }
                _ => {
                    return Err(invalid(
                        "sweep",
                        "give a non-empty levels or frequencies list",
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn medium(&self, omega: f64) -> Result<Medium, CliError> {
        let m = &self.media;
        Medium::new(m.epsilon, m.epsilon0, m.sigma, m.mu0, omega)
            .map_err(|e| invalid("media", e.to_string()))
    }

    /// Plane wave at the exterior wavenumber for `omega`.
    pub fn incident(&self, omega: f64) -> Result<bie_core::solve::IncidentField, CliError> {
        let i = &self.incident;
        let k = omega * (self.media.epsilon0 * self.media.mu0).sqrt();
        bie_core::solve::incident_plane_wave(
            Vec3::from(i.polarization),
            Vec3::from(i.direction),
            Complex64::new(i.amplitude[0], i.amplitude[1]),
            k,
        )
        .map_err(|e| invalid("incident", e.to_string()))
    }

    pub fn system_options(&self) -> SystemOptions {
        let mut o = SystemOptions::default();
        o.assembly.regular_degree = self.solver.regular_degree;
        o.assembly.cpv_order = self.solver.cpv_order;
        o.weighting = self.solver.normal_eq_weighting;
        o
    }

    pub fn solve_options(&self) -> SolveOptions {
        let s = &self.solver;
        SolveOptions {
            method: s.method,
            residual_threshold: s.residual_threshold,
            rcond: s.rcond,
            gmres_restart: s.gmres_restart,
            gmres_max_iterations: s.gmres_max_iterations,
            gmres_tolerance: s.gmres_tolerance,
        }
    }
}
