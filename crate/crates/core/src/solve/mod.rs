//! Incident wave, system assembly and the linear solve.

mod dense;
mod gmres;

use ndarray::{concatenate, Array1, Array2, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::{MediaError, Medium, WaveNumbers};
use crate::mesh::{SurfaceMesh, TangentFrame};
use crate::operators::{
    a_operator, gradient_term_operator, normal_trace_equation, system_columns,
    tangential_trace_equation, AssemblyOptions, ColLabel, CurrentKind, DeltaCheck, GradientTable,
    NormalWeighting, OperatorError, RowLabel,
};
use crate::{cdot, complexify, rcross, CVec3, Vec3};

pub use gmres::{gmres, GmresOutcome};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("incident field: {0}")]
    Incident(String),
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("system has non-finite entries")]
    NonFinite,
    #[error("relative residual {} exceeds threshold {threshold:e}", .diagnostics.relative_residual)]
    Residual {
        threshold: f64,
        diagnostics: Box<SolveDiagnostics>,
    },
    #[error("LAPACK {routine} returned info = {info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("linear algebra: {0}")]
    Linalg(String),
    #[error(
        "iterative solver did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Plane wave `E0(x) = amplitude · pol · e^{ik dir·x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentField {
    pub polarization: Vec3,
    pub direction: Vec3,
    pub amplitude: Complex64,
    pub wavenumber: f64,
}

const UNIT_TOL: f64 = 1e-12;

pub fn incident_plane_wave(
    polarization: Vec3,
    direction: Vec3,
    amplitude: Complex64,
    wavenumber: f64,
) -> Result<IncidentField, SolveError> {
    if (polarization.norm() - 1.0).abs() > UNIT_TOL || (direction.norm() - 1.0).abs() > UNIT_TOL {
        return Err(SolveError::Incident(
            "polarization and direction must be unit vectors".into(),
        ));
    }
    if polarization.dot(&direction).abs() > UNIT_TOL {
        return Err(SolveError::Incident(
            "polarization is not transverse to direction".into(),
        ));
    }
    if !(wavenumber > 0.0 && wavenumber.is_finite())
        || !(amplitude.re.is_finite() && amplitude.im.is_finite())
    {
        return Err(SolveError::Incident(
            "wavenumber must be positive and amplitude finite".into(),
        ));
    }
    Ok(IncidentField {
        polarization,
        direction,
        amplitude,
        wavenumber,
    })
}

impl IncidentField {
    fn phase(&self, x: &Vec3) -> Complex64 {
        self.amplitude * Complex64::new(0.0, self.wavenumber * self.direction.dot(x)).exp()
    }

    pub fn e(&self, x: &Vec3) -> CVec3 {
        complexify(&self.polarization) * self.phase(x)
    }

    /// `curl E0 = ik (dir × pol) E0-phase`.
    pub fn curl_e(&self, x: &Vec3) -> CVec3 {
        complexify(&self.direction.cross(&self.polarization))
            * (Complex64::new(0.0, self.wavenumber) * self.phase(x))
    }

    /// `H0 = curl E0 / (iωμ0)`.
    pub fn h(&self, x: &Vec3, omega: f64, mu0: f64) -> CVec3 {
        self.curl_e(x) / Complex64::new(0.0, omega * mu0)
    }
}

/// Frame coefficients of both currents, one pair per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCurrents {
    pub exterior: Vec<[Complex64; 2]>,
    pub interior: Vec<[Complex64; 2]>,
}

impl SurfaceCurrents {
    pub fn zeros(n: usize) -> Self {
        let z = [Complex64::new(0.0, 0.0); 2];
        Self {
            exterior: vec![z; n],
            interior: vec![z; n],
        }
    }

    pub fn len(&self) -> usize {
        self.exterior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exterior.is_empty()
    }

    /// From the unknown vector `[j (2N), J (2N)]`.
    pub fn from_vector(x: &Array1<Complex64>) -> Self {
        let n = x.len() / 4;
        let pairs = |offset: usize| {
            (0..n)
                .map(|i| [x[offset + 2 * i], x[offset + 2 * i + 1]])
                .collect()
        };
        Self {
            exterior: pairs(0),
            interior: pairs(2 * n),
        }
    }

    pub fn to_vector(&self) -> Array1<Complex64> {
        self.exterior
            .iter()
            .chain(&self.interior)
            .flatten()
            .copied()
            .collect()
    }

    pub fn get(&self, kind: CurrentKind) -> &[[Complex64; 2]] {
        match kind {
            CurrentKind::Exterior => &self.exterior,
            CurrentKind::Interior => &self.interior,
        }
    }

    /// Cartesian current vectors, tangential by construction.
    pub fn cartesian(&self, frames: &[TangentFrame], kind: CurrentKind) -> Vec<CVec3> {
        frames
            .iter()
            .zip(self.get(kind))
            .map(|(f, c)| f.to_cartesian(*c))
            .collect()
    }
}

/// Options for assembling the full system.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemOptions {
    pub assembly: AssemblyOptions,
    pub weighting: NormalWeighting,
}

/// `4N × 4N` system: three tangential rows per node, then one normal row
/// per node.
#[derive(Debug, Clone)]
pub struct BieSystem {
    pub matrix: Array2<Complex64>,
    pub rhs: Array1<Complex64>,
    pub rows: Vec<RowLabel>,
    pub cols: Vec<ColLabel>,
    pub wavenumbers: WaveNumbers,
    /// Half-radius checks of the principal-value self terms (interior, exterior).
    pub delta_checks: [DeltaCheck; 2],
}

impl BieSystem {
    pub fn nodes(&self) -> usize {
        self.cols.len() / 4
    }
}

pub fn assemble_system(
    mesh: &SurfaceMesh,
    frames: &[TangentFrame],
    medium: &Medium,
    incident: &IncidentField,
    opts: &SystemOptions,
) -> Result<BieSystem, SolveError> {
    let wavenumbers = medium.wavenumbers()?;
    if (wavenumbers.exterior.re - incident.wavenumber).abs() > 1e-12 * incident.wavenumber {
        return Err(SolveError::Incident(format!(
            "incident wavenumber {} differs from exterior wavenumber {}",
            incident.wavenumber, wavenumbers.exterior.re
        )));
    }
    let n = mesh.len();
    let interior = GradientTable::assemble(mesh, wavenumbers.interior, &opts.assembly)?;
    let exterior = GradientTable::assemble(mesh, wavenumbers.exterior, &opts.assembly)?;

    let e0: Vec<CVec3> = mesh.centroids().iter().map(|x| incident.e(x)).collect();
    let e0_trace: Vec<CVec3> = e0
        .iter()
        .zip(mesh.normals())
        .map(|(e, nrm)| rcross(nrm, e))
        .collect();
    let e0_normal: Vec<Complex64> = e0
        .iter()
        .zip(mesh.normals())
        .map(|(e, nrm)| cdot(e, nrm))
        .collect();

    let tangential = {
        let a_plus = a_operator(mesh, frames, &interior, CurrentKind::Interior)?;
        let a_minus = a_operator(mesh, frames, &exterior, CurrentKind::Exterior)?;
        let g_plus = gradient_term_operator(mesh, frames, &interior, CurrentKind::Interior)?;
        let g_minus = gradient_term_operator(mesh, frames, &exterior, CurrentKind::Exterior)?;
        tangential_trace_equation(frames, &a_plus, &a_minus, &g_plus, &g_minus, &e0_trace)?
    };
    let normal = normal_trace_equation(
        mesh,
        frames,
        &interior,
        &exterior,
        (medium.effective_permittivity()?, medium.epsilon_exterior),
        opts.weighting,
        &e0_normal,
    )?;
    let delta_checks = [interior.delta_check, exterior.delta_check];
    drop((interior, exterior));

    let matrix = concatenate(
        Axis(0),
        &[tangential.op.matrix.view(), normal.op.matrix.view()],
    )
    .expect("row blocks share the column count");
    drop(tangential.op.matrix);
    let rhs = concatenate(Axis(0), &[tangential.rhs.view(), normal.rhs.view()]).expect("1-d");
    if !matrix
        .iter()
        .chain(rhs.iter())
        .all(|v| v.re.is_finite() && v.im.is_finite())
    {
        return Err(SolveError::NonFinite);
    }
    let mut rows = tangential.op.rows;
    rows.extend(normal.op.rows);
    Ok(BieSystem {
        matrix,
        rhs,
        rows,
        cols: system_columns(n),
        wavenumbers,
        delta_checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Minimum-norm least squares through an SVD.
    #[default]
    DirectLsq,
    /// LU factorization of the square system.
    DirectLu,
    /// Restarted GMRES on the row-space normal equations.
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: SolveMethod,
    /// Largest accepted `‖Ax − b‖ / ‖b‖`.
    pub residual_threshold: f64,
    /// Singular values below `rcond · σ_max` are treated as zero.
    pub rcond: f64,
    pub gmres_restart: usize,
    pub gmres_max_iterations: usize,
    pub gmres_tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: SolveMethod::DirectLsq,
            residual_threshold: 1e-6,
            rcond: 1e-10,
            gmres_restart: 200,
            gmres_max_iterations: 20_000,
            gmres_tolerance: 1e-12,
        }
    }
}

/// Solver report. Singular values refer to the equilibrated matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub method: SolveMethod,
    pub equations: usize,
    pub unknowns: usize,
    pub relative_residual: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// `σ_max / σ_min`; `None` when `σ_min` is zero.
    pub condition_estimate: Option<f64>,
    /// Numerical rank at the configured `rcond` (direct-lsq only).
    pub rank: Option<usize>,
    pub rank_deficient: bool,
    /// Up to ten smallest singular values, ascending (direct-lsq only).
    pub smallest_singular_values: Vec<f64>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub currents: SurfaceCurrents,
    pub coefficients: Array1<Complex64>,
    pub diagnostics: SolveDiagnostics,
}

/// Row scaling shared by each node's three tangential rows and by each
/// normal row, then column 2-norm scaling.
#[derive(Debug, Clone)]
pub struct Equilibration {
    pub rows: Array1<f64>,
    pub cols: Array1<f64>,
}

impl Equilibration {
    pub fn new(a: &Array2<Complex64>) -> Self {
        let (m, n) = a.dim();
        let row_norm: Vec<f64> = a
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
            .collect();
        let max_row = row_norm.iter().copied().fold(0.0, f64::max);
        let floor = 1e-14 * max_row;
        let mut rows = Array1::ones(m);
        let blocks = n / 4;
        let groups: Vec<Vec<usize>> = if m == n && n % 4 == 0 {
            (0..blocks)
                .map(|s| vec![3 * s, 3 * s + 1, 3 * s + 2])
                .chain((0..blocks).map(|s| vec![3 * blocks + s]))
                .collect()
        } else {
            (0..m).map(|i| vec![i]).collect()
        };
        for g in groups {
            let norm = g.iter().map(|&i| row_norm[i]).fold(0.0, f64::max);
            if norm > floor {
                for &i in &g {
                    rows[i] = 1.0 / norm;
                }
            }
        }
        let mut cols = Array1::ones(n);
        for (j, col) in a.columns().into_iter().enumerate() {
            let norm = col
                .iter()
                .zip(rows.iter())
                .map(|(v, r)| v.norm_sqr() * r * r)
                .sum::<f64>()
                .sqrt();
            if norm > floor {
                cols[j] = 1.0 / norm;
            }
        }
        Self { rows, cols }
    }

    pub fn apply(&self, a: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = a.clone();
        for ((i, j), v) in out.indexed_iter_mut() {
            *v *= self.rows[i] * self.cols[j];
        }
        out
    }
}

fn norm(v: &Array1<Complex64>) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn relative_residual(
    a: &Array2<Complex64>,
    x: &Array1<Complex64>,
    b: &Array1<Complex64>,
) -> f64 {
    let r = a.dot(x) - b;
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

/// Solves `A x = b` for a general dense system in the least-squares sense.
pub fn solve_dense(
    a: &Array2<Complex64>,
    b: &Array1<Complex64>,
    opts: &SolveOptions,
) -> Result<(Array1<Complex64>, SolveDiagnostics), SolveError> {
    let eq = Equilibration::new(a);
    let scaled = eq.apply(a);
    let scaled_b: Array1<Complex64> = b.iter().zip(eq.rows.iter()).map(|(v, r)| v * r).collect();
    let (y, mut diag) = match opts.method {
        SolveMethod::DirectLsq => dense::least_squares(scaled, &scaled_b, opts.rcond)?,
        SolveMethod::DirectLu => dense::lu(&scaled, &scaled_b)?,
        SolveMethod::Iterative => gmres::row_space_solve(&scaled, &scaled_b, opts)?,
    };
    let x: Array1<Complex64> = y.iter().zip(eq.cols.iter()).map(|(v, c)| v * c).collect();
    diag.method = opts.method;
    diag.relative_residual = relative_residual(a, &x, b);
    if !(diag.relative_residual <= opts.residual_threshold) {
        return Err(SolveError::Residual {
            threshold: opts.residual_threshold,
            diagnostics: Box::new(diag),
        });
    }
    Ok((x, diag))
}

pub fn solve_system(system: &BieSystem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let (x, diagnostics) = solve_dense(&system.matrix, &system.rhs, opts)?;
    Ok(Solution {
        currents: SurfaceCurrents::from_vector(&x),
        coefficients: x,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn methods() -> [SolveMethod; 3] {
        [
            SolveMethod::DirectLsq,
            SolveMethod::DirectLu,
            SolveMethod::Iterative,
        ]
    }

    #[test]
    fn identity_system() {
        let a = Array2::from_diag(&Array1::from_elem(5, c(1.0)));
        let b = Array1::from_iter((0..5).map(|i| c(if i == 0 { 1.0 } else { 0.0 })));
        for method in methods() {
            let opts = SolveOptions {
                method,
                ..Default::default()
            };
            let (x, d) = solve_dense(&a, &b, &opts).unwrap();
            assert!((&x - &b).iter().all(|v| v.norm() < 1e-14), "{method:?}");
            assert!(d.relative_residual < 1e-14);
        }
    }

    #[test]
    fn rank_deficient_minimum_norm() {
        let a = array![[c(1.0), c(0.0)], [c(0.0), c(0.0)]];
        let b = array![c(1.0), c(1.0)];
        let opts = SolveOptions {
            residual_threshold: 1.0,
            ..Default::default()
        };
        let (x, d) = solve_dense(&a, &b, &opts).unwrap();
        assert!((x[0] - c(1.0)).norm() < 1e-15 && x[1].norm() < 1e-15);
        let r = a.dot(&x) - &b;
        assert!((norm(&r) - 1.0).abs() < 1e-15);
        assert_eq!(d.rank, Some(1));
        assert!(d.rank_deficient);
        assert_eq!(d.sigma_min, 0.0);
        assert_eq!(d.condition_estimate, None);

        let strict = SolveOptions::default();
        match solve_dense(&a, &b, &strict) {
            Err(SolveError::Residual { diagnostics, .. }) => assert!(diagnostics.rank_deficient),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn iterative_matches_least_squares_on_consistent_singular_system() {
        // rank 2 in 3 unknowns, consistent right-hand side
        let a = array![
            [c(1.0), Complex64::new(0.0, 2.0), c(1.0)],
            [c(0.5), c(1.0), Complex64::new(0.3, 0.1)],
            [c(1.5), Complex64::new(1.0, 2.0), Complex64::new(1.3, 0.1)]
        ];
        let b = a.dot(&array![c(1.0), c(-2.0), Complex64::new(0.0, 1.0)]);
        let lsq = solve_dense(&a, &b, &SolveOptions::default()).unwrap().0;
        let it = solve_dense(
            &a,
            &b,
            &SolveOptions {
                method: SolveMethod::Iterative,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(norm(&(&lsq - &it.0)) < 1e-9 * norm(&lsq));
        assert!(it.1.iterations.unwrap() <= 3);
    }

    #[test]
    fn lu_singular_value_estimates() {
        let a = array![[c(3.0), c(0.0)], [c(0.0), c(0.5)]];
        let b = array![c(1.0), c(1.0)];
        let (_, d) = solve_dense(
            &a,
            &b,
            &SolveOptions {
                method: SolveMethod::DirectLu,
                ..Default::default()
            },
        )
        .unwrap();
        // equilibration maps both to 1
        assert!((d.sigma_max - 1.0).abs() < 1e-12 && (d.sigma_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gmres_converges_on_nonnormal_matrix() {
        let n = 40;
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                Complex64::new(4.0, 1.0)
            } else if j == i + 1 {
                c(1.5)
            } else if i == j + 3 {
                Complex64::new(0.0, -0.7)
            } else {
                c(0.0)
            }
        });
        let b = Array1::from_iter((0..n).map(|i| Complex64::new((i as f64).cos(), 1.0)));
        let out = gmres(|v| a.dot(v), &b, 10, 500, 1e-13);
        assert!(out.converged);
        assert!(norm(&(a.dot(&out.x) - &b)) <= 1e-12 * norm(&b));
    }

    #[test]
    fn incident_wave_examples() {
        let k = 2.0;
        let w = incident_plane_wave(Vec3::x(), Vec3::z(), c(1.0), k).unwrap();
        assert_eq!(w.e(&Vec3::zeros()), complexify(&Vec3::x()));
        let e = w.e(&Vec3::new(0.0, 0.0, PI / k));
        assert!((e - complexify(&(-Vec3::x()))).norm() < 1e-15);
        assert!(matches!(
            incident_plane_wave(Vec3::x(), Vec3::x(), c(1.0), 1.0),
            Err(SolveError::Incident(_))
        ));
        assert!(incident_plane_wave(Vec3::x() * 2.0, Vec3::z(), c(1.0), 1.0).is_err());
    }

    /// Central-difference curl of a vector field.
    fn fd_curl(f: &dyn Fn(&Vec3) -> CVec3, x: &Vec3, h: f64) -> CVec3 {
        let d = |i: usize| {
            let e = Vec3::ith(i, h);
            (f(&(x + e)) - f(&(x - e))) / c(2.0 * h)
        };
        let (dx, dy, dz) = (d(0), d(1), d(2));
        CVec3::new(dy.z - dz.y, dz.x - dx.z, dx.y - dy.x)
    }

    #[test]
    fn incident_magnetic_field() {
        let (k, omega, mu0) = (1.7, 1.7, 1.0);
        let w = incident_plane_wave(Vec3::x(), Vec3::z(), c(1.0), k).unwrap();
        let x = Vec3::new(0.2, -0.4, 0.7);
        let phase = Complex64::new(0.0, k * x.z).exp();
        let expected = complexify(&Vec3::y()) * (phase * (k / (omega * mu0)));
        assert!((w.h(&x, omega, mu0) - expected).norm() < 1e-15);
        let fd = fd_curl(&|p| w.e(p), &x, 1e-5) / Complex64::new(0.0, omega * mu0);
        assert!((fd - expected).norm() < 1e-8);
        // curl curl E0 = k² E0
        let cc = fd_curl(&|p| w.curl_e(p), &x, 1e-4);
        assert!((cc - w.e(&x) * c(k * k)).norm() < 1e-6);
    }

    #[test]
    fn currents_round_trip() {
        let x = Array1::from_iter((0..8).map(|i| Complex64::new(i as f64, -(i as f64))));
        let cur = SurfaceCurrents::from_vector(&x);
        assert_eq!(cur.exterior[1], [x[2], x[3]]);
        assert_eq!(cur.interior[0], [x[4], x[5]]);
        assert_eq!(cur.to_vector(), x);
    }
}
