//! Discrete boundary operators on a centroid-collocated flat-facet mesh.
//!
//! Every operator is built from one table per wavenumber,
//!
//! ```text
//! I[s][c] = ∫_{facet c} ∇_s G(s, t) dt
//! ```
//!
//! with `s` the centroid of facet `s`. Off the diagonal this is a regular or
//! near-singular integral; on the diagonal it is a principal value whose
//! value lies in the facet plane. With piecewise-constant currents
//!
//! ```text
//! (A J)(s)    = Σ_c (N_s · I[s][c]) J_c
//! (Γ J)(s)    = Σ_c I[s][c] (N_s · J_c)
//! N × curl S J = Γ J − A J            (principal value)
//! N · curl S J = Σ_c N_s · (I[s][c] × J_c)
//! ```
//!
//! and the one-sided traces of the tangential part add `∓ J/2` (interior
//! sign first).

mod dump;

pub use dump::{read_operator, write_operator};

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::kernels::quadrature::{
    integrate_cpv, integrate_near, NearFieldPolicy, QuadratureError, QuadratureRule, Triangle,
};
use crate::kernels::{singular_split, KernelError, KernelParams};
use crate::mesh::{SurfaceMesh, TangentFrame};
use crate::{cdot, complexify, rcross, CVec3, Vec3};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("operator dump: {0}")]
    Dump(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Which current an operator column acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum CurrentKind {
    /// Exterior current `j`, radiating with `k`.
    Exterior,
    /// Interior current `J`, radiating with `K`.
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum EquationKind {
    TangentialX,
    TangentialY,
    TangentialZ,
    Normal,
}

impl EquationKind {
    fn cartesian(i: usize) -> Self {
        [Self::TangentialX, Self::TangentialY, Self::TangentialZ][i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct RowLabel {
    pub node: usize,
    pub equation: EquationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ColLabel {
    pub node: usize,
    pub current: CurrentKind,
    /// 0 for `t1`, 1 for `t2`.
    pub component: usize,
}

/// Column of `(current, node, component)` in a system over both currents:
/// `j` first, then `J`, each node-major.
pub fn system_column(n: usize, current: CurrentKind, node: usize, component: usize) -> usize {
    let offset = match current {
        CurrentKind::Exterior => 0,
        CurrentKind::Interior => 2 * n,
    };
    offset + 2 * node + component
}

/// Column labels of a system over both currents.
pub fn system_columns(n: usize) -> Vec<ColLabel> {
    [CurrentKind::Exterior, CurrentKind::Interior]
        .into_iter()
        .flat_map(|current| {
            (0..n).flat_map(move |node| {
                (0..2).map(move |component| ColLabel {
                    node,
                    current,
                    component,
                })
            })
        })
        .collect()
}

fn single_columns(n: usize, current: CurrentKind) -> Vec<ColLabel> {
    (0..n)
        .flat_map(|node| {
            (0..2).map(move |component| ColLabel {
                node,
                current,
                component,
            })
        })
        .collect()
}

fn tangential_rows(n: usize) -> Vec<RowLabel> {
    (0..n)
        .flat_map(|node| {
            (0..3).map(move |i| RowLabel {
                node,
                equation: EquationKind::cartesian(i),
            })
        })
        .collect()
}

fn normal_rows(n: usize) -> Vec<RowLabel> {
    (0..n)
        .map(|node| RowLabel {
            node,
            equation: EquationKind::Normal,
        })
        .collect()
}

/// Dense operator with row and column bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub matrix: Array2<Complex64>,
    pub rows: Vec<RowLabel>,
    pub cols: Vec<ColLabel>,
}

impl DiscreteOperator {
    fn new(matrix: Array2<Complex64>, rows: Vec<RowLabel>, cols: Vec<ColLabel>) -> Self {
        debug_assert_eq!(matrix.dim(), (rows.len(), cols.len()));
        Self { matrix, rows, cols }
    }

    pub fn apply(&self, x: &Array1<Complex64>) -> Array1<Complex64> {
        self.matrix.dot(x)
    }

    /// First non-finite entry, if any.
    pub fn check_finite(&self) -> Result<(), OperatorError> {
        for ((row, col), v) in self.matrix.indexed_iter() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(OperatorError::NonFinite { row, col });
            }
        }
        Ok(())
    }
}

/// Scalar rows `op · x = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationRows {
    pub op: DiscreteOperator,
    pub rhs: Array1<Complex64>,
}

impl EquationRows {
    pub fn residual(&self, x: &Array1<Complex64>) -> Array1<Complex64> {
        self.op.apply(x) - &self.rhs
    }
}

/// Quadrature settings shared by every operator.
#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyOptions {
    /// Polynomial degree of the regular rule (5 → 7 points).
    pub regular_degree: usize,
    pub near_field: NearFieldPolicy,
    /// Gauss order of the principal-value self term.
    pub cpv_order: usize,
    /// Excision radius as a fraction of the mean edge length.
    pub delta_factor: f64,
    /// Fraction of nodes whose self term is recomputed with half the radius.
    pub delta_check_fraction: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            regular_degree: 5,
            near_field: NearFieldPolicy::default(),
            cpv_order: 12,
            delta_factor: 0.1,
            delta_check_fraction: 0.01,
        }
    }
}

/// Result of recomputing sampled self terms with half the excision radius.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct DeltaCheck {
    pub sampled_rows: usize,
    /// Largest change of a normal-trace row, relative to the row norm.
    pub max_relative_change: f64,
}

/// Parallel iterator over disjoint blocks of `rows` consecutive rows of a
/// row-major matrix, as flat slices.
fn row_blocks(
    m: &mut Array2<Complex64>,
    rows: usize,
) -> impl IndexedParallelIterator<Item = (usize, &mut [Complex64])> {
    let width = m.ncols() * rows;
    m.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(width.max(1))
        .enumerate()
}

fn facet(mesh: &SurfaceMesh, i: usize) -> Triangle {
    let [a, b, c] = mesh.corners(i);
    Triangle::new(a, b, c)
}

/// Excision radius for the self term of node `i`: the configured fraction of
/// the mean edge, clamped to half the centroid's distance from the facet edges.
pub fn cpv_delta(mesh: &SurfaceMesh, i: usize, factor: f64) -> f64 {
    let [a, b, c] = mesh.corners(i);
    let p = mesh.centroid(i);
    let edge = |u: Vec3, v: Vec3| {
        let d = v - u;
        let t = ((p - u).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        (p - (u + d * t)).norm()
    };
    let inner = edge(a, b).min(edge(b, c)).min(edge(c, a));
    (factor * mesh.mean_edge_length()).min(0.5 * inner)
}

/// `∫_{facet c} ∇_s G(s, t) dt` for every node pair.
#[derive(Debug, Clone)]
pub struct GradientTable {
    pub wavenumber: Complex64,
    n: usize,
    data: Vec<CVec3>,
    pub delta_check: DeltaCheck,
}

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

struct RowIntegrator<'a> {
    mesh: &'a SurfaceMesh,
    params: KernelParams,
    regular: QuadratureRule,
    cpv: QuadratureRule,
    opts: &'a AssemblyOptions,
}

impl<'a> RowIntegrator<'a> {
    fn new(
        mesh: &'a SurfaceMesh,
        wavenumber: Complex64,
        opts: &'a AssemblyOptions,
    ) -> Result<Self, OperatorError> {
        Ok(Self {
            mesh,
            params: KernelParams::new(wavenumber)?,
            regular: QuadratureRule::regular(opts.regular_degree),
            cpv: QuadratureRule::cpv(opts.cpv_order),
            opts,
        })
    }

    fn off_diagonal(&self, s: usize, c: usize) -> Result<CVec3, OperatorError> {
        let x = self.mesh.centroid(s);
        let params = self.params;
        Ok(integrate_near(
            |t: &Vec3| params.gradient(&(x - t)),
            &facet(self.mesh, c),
            &x,
            &self.regular,
            &self.opts.near_field,
        )?)
    }

    /// Principal value over the node's own facet; `ê/(4πr²)` is the static
    /// part of `∇_s G` written in the direction `ê` from `s` to `t`.
    fn self_term(&self, s: usize, delta: f64) -> Result<CVec3, OperatorError> {
        let x = self.mesh.centroid(s);
        let split = singular_split(&self.params);
        Ok(integrate_cpv(
            |e: &Vec3| complexify(&(e / FOUR_PI)),
            |t: &Vec3| split.remainder_gradient(&(x - t)),
            &[facet(self.mesh, s)],
            &x,
            delta,
            &self.cpv,
        )?)
    }

    fn row(&self, s: usize) -> Result<Vec<CVec3>, OperatorError> {
        (0..self.mesh.len())
            .map(|c| {
                if c == s {
                    self.self_term(s, cpv_delta(self.mesh, s, self.opts.delta_factor))
                } else {
                    self.off_diagonal(s, c)
                }
            })
            .collect()
    }
}

impl GradientTable {
    /// Row-parallel assembly over every node pair.
    pub fn assemble(
        mesh: &SurfaceMesh,
        wavenumber: Complex64,
        opts: &AssemblyOptions,
    ) -> Result<Self, OperatorError> {
        let n = mesh.len();
        let integrator = RowIntegrator::new(mesh, wavenumber, opts)?;
        let rows: Vec<Vec<CVec3>> = (0..n)
            .into_par_iter()
            .map(|s| integrator.row(s))
            .collect::<Result<_, _>>()?;
        let data: Vec<CVec3> = rows.into_iter().flatten().collect();
        let mut table = Self {
            wavenumber,
            n,
            data,
            delta_check: DeltaCheck::default(),
        };
        table.delta_check = table.check_half_delta(mesh, &integrator)?;
        Ok(table)
    }

    /// One row of the table, `I[s][·]`.
    pub fn row(
        mesh: &SurfaceMesh,
        wavenumber: Complex64,
        s: usize,
        opts: &AssemblyOptions,
    ) -> Result<Vec<CVec3>, OperatorError> {
        RowIntegrator::new(mesh, wavenumber, opts)?.row(s)
    }

    fn check_half_delta(
        &self,
        mesh: &SurfaceMesh,
        integrator: &RowIntegrator,
    ) -> Result<DeltaCheck, OperatorError> {
        let fraction = integrator.opts.delta_check_fraction;
        if fraction <= 0.0 || self.n == 0 {
            return Ok(DeltaCheck::default());
        }
        let stride = ((1.0 / fraction).round() as usize).max(1);
        let frames = crate::mesh::tangent_frames(mesh);
        let mut check = DeltaCheck::default();
        for s in (0..self.n).step_by(stride) {
            let delta = cpv_delta(mesh, s, integrator.opts.delta_factor);
            let half = integrator.self_term(s, 0.5 * delta)?;
            let ns = mesh.normal(s);
            let row_norm = (0..self.n)
                .flat_map(|c| {
                    let i = self.get(s, c);
                    let f = frames[c];
                    (0..2).map(move |a| cdot(&i.cross(&complexify(&f.tangent(a))), &ns).norm_sqr())
                })
                .sum::<f64>()
                .sqrt();
            let diff = half - self.get(s, s);
            let change = (0..2)
                .map(|a| cdot(&diff.cross(&complexify(&frames[s].tangent(a))), &ns).norm_sqr())
                .sum::<f64>()
                .sqrt();
            check.sampled_rows += 1;
            if row_norm > 0.0 {
                check.max_relative_change = check.max_relative_change.max(change / row_norm);
            }
        }
        Ok(check)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, s: usize, c: usize) -> CVec3 {
        self.data[s * self.n + c]
    }
}

fn check_sizes(
    mesh: &SurfaceMesh,
    frames: &[TangentFrame],
    table: &GradientTable,
) -> Result<(), OperatorError> {
    if frames.len() != mesh.len() || table.len() != mesh.len() {
        return Err(OperatorError::DimensionMismatch(format!(
            "mesh has {} nodes, frames {}, table {}",
            mesh.len(),
            frames.len(),
            table.len()
        )));
    }
    Ok(())
}

/// `(A J)(s) = Σ_c (N_s · I[s][c]) J_c` as a 3N × 2N map from frame
/// coefficients to Cartesian components. Same-facet entries are zero.
pub fn a_operator(
    mesh: &SurfaceMesh,
    frames: &[TangentFrame],
    table: &GradientTable,
    current: CurrentKind,
) -> Result<DiscreteOperator, OperatorError> {
    check_sizes(mesh, frames, table)?;
    let n = mesh.len();
    let mut m = Array2::<Complex64>::zeros((3 * n, 2 * n));
    row_blocks(&mut m, 3).for_each(|(s, block)| {
        let ns = mesh.normal(s);
        for c in (0..n).filter(|&c| c != s) {
            let w = cdot(&table.get(s, c), &ns);
            for a in 0..2 {
                let t = frames[c].tangent(a);
                for i in 0..3 {
                    block[i * 2 * n + 2 * c + a] = w * t[i];
                }
            }
        }
    });
    Ok(DiscreteOperator::new(
        m,
        tangential_rows(n),
        single_columns(n, current),
    ))
}

/// `(Γ J)(s) = Σ_c I[s][c] (N_s · J_c)`. Same-facet entries are zero.
pub fn gradient_term_operator(
    mesh: &SurfaceMesh,
    frames: &[TangentFrame],
    table: &GradientTable,
    current: CurrentKind,
) -> Result<DiscreteOperator, OperatorError> {
    check_sizes(mesh, frames, table)?;
    let n = mesh.len();
    let mut m = Array2::<Complex64>::zeros((3 * n, 2 * n));
    row_blocks(&mut m, 3).for_each(|(s, block)| {
        let ns = mesh.normal(s);
        for c in (0..n).filter(|&c| c != s) {
            let v = table.get(s, c);
            for a in 0..2 {
                let w = ns.dot(&frames[c].tangent(a));
                for i in 0..3 {
                    block[i * 2 * n + 2 * c + a] = v[i] * w;
                }
            }
        }
    });
    Ok(DiscreteOperator::new(
        m,
        tangential_rows(n),
        single_columns(n, current),
    ))
}

/// `A⁺` with the interior kernel `G`.
pub fn assemble_a_plus(
    mesh: &SurfaceMesh,
    frames: &[TangentFrame],
    interior: Complex64,
    opts: &AssemblyOptions,
) -> Result<DiscreteOperator, OperatorError> {
    let table = GradientTable::assemble(mesh, interior, opts)?;
    a_operator(mesh, frames, &table, CurrentKind::Interior)
}

/// `A⁻` with the exterior kernel `g`.
pub fn assemble_a_minus(
    mesh: &SurfaceMesh,
    frames: &[TangentFrame],
    exterior: Complex64,
    opts: &AssemblyOptions,
) -> Result<DiscreteOperator, OperatorError> {
    let table = GradientTable::assemble(mesh, exterior, opts)?;
    a_operator(mesh, frames, &table, CurrentKind::Exterior)
}

pub fn assemble_gradient_term(
    mesh: &SurfaceMesh,
    frames: &[TangentFrame],
    wavenumber: Complex64,
    current: CurrentKind,
    opts: &AssemblyOptions,
) -> Result<DiscreteOperator, OperatorError> {
    let table = GradientTable::assemble(mesh, wavenumber, opts)?;
    gradient_term_operator(mesh, frames, &table, current)
}

fn expect_shape(
    op: &DiscreteOperator,
    shape: (usize, usize),
    name: &str,
) -> Result<(), OperatorError> {
    if op.matrix.dim() != shape {
        return Err(OperatorError::DimensionMismatch(format!(
            "{name} is {:?}, expected {shape:?}",
            op.matrix.dim()
        )));
    }
    Ok(())
}

/// Tangential continuity rows, three Cartesian rows per node:
///
/// ```text
/// (−J/2 − A⁺J + Γ⁺J) − (j/2 − A⁻j + Γ⁻j) = N × E0
/// ```
///
/// Columns follow [`system_column`].
pub fn tangential_trace_equation(
    frames: &[TangentFrame],
    a_plus: &DiscreteOperator,
    a_minus: &DiscreteOperator,
    grad_plus: &DiscreteOperator,
    grad_minus: &DiscreteOperator,
    e0_trace: &[CVec3],
) -> Result<EquationRows, OperatorError> {
    let n = frames.len();
    for (op, name) in [
        (a_plus, "A+"),
        (a_minus, "A-"),
        (grad_plus, "grad+"),
        (grad_minus, "grad-"),
    ] {
        expect_shape(op, (3 * n, 2 * n), name)?;
    }
    if e0_trace.len() != n {
        return Err(OperatorError::DimensionMismatch(format!(
            "{} incident samples for {n} nodes",
            e0_trace.len()
        )));
    }
    let mut m = Array2::<Complex64>::zeros((3 * n, 4 * n));
    {
        let (mut ext, mut int) = m.view_mut().split_at(ndarray::Axis(1), 2 * n);
        ext.assign(&(&a_minus.matrix - &grad_minus.matrix));
        int.assign(&(&grad_plus.matrix - &a_plus.matrix));
    }
    for (s, f) in frames.iter().enumerate() {
        for a in 0..2 {
            let t = f.tangent(a);
            for i in 0..3 {
                let half = Complex64::new(0.5 * t[i], 0.0);
                m[(3 * s + i, system_column(n, CurrentKind::Exterior, s, a))] -= half;
                m[(3 * s + i, system_column(n, CurrentKind::Interior, s, a))] -= half;
            }
        }
    }
    let rhs = Array1::from_iter(e0_trace.iter().flat_map(|v| [v.x, v.y, v.z]));
    Ok(EquationRows {
        op: DiscreteOperator::new(m, tangential_rows(n), system_columns(n)),
        rhs,
    })
}

/// Weights of the normal-trace row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalWeighting {
    /// `ε′ N·E_in = ε₀ N·E_out` (continuity of normal flux density).
    #[default]
    Eq3,
    /// `N·E_in = N·E_out` (unweighted).
    Eq15,
}

/// Normal flux rows, one per node:
///
/// ```text
/// w_in N·curl S_K J − w_out N·curl S_k j = w_out N·E0
/// ```
///
/// with `(w_in, w_out) = (ε′, ε₀)` or `(1, 1)`.
pub fn normal_trace_equation(
    mesh: &SurfaceMesh,
    frames: &[TangentFrame],
    interior: &GradientTable,
    exterior: &GradientTable,
    permittivity: (Complex64, f64),
    weighting: NormalWeighting,
    e0_normal: &[Complex64],
) -> Result<EquationRows, OperatorError> {
    check_sizes(mesh, frames, interior)?;
    check_sizes(mesh, frames, exterior)?;
    let n = mesh.len();
    if e0_normal.len() != n {
        return Err(OperatorError::DimensionMismatch(format!(
            "{} incident samples for {n} nodes",
            e0_normal.len()
        )));
    }
    let (w_in, w_out) = match weighting {
        NormalWeighting::Eq3 => (permittivity.0, Complex64::new(permittivity.1, 0.0)),
        NormalWeighting::Eq15 => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
    };
    let mut m = Array2::<Complex64>::zeros((n, 4 * n));
    row_blocks(&mut m, 1).for_each(|(s, row)| {
        let ns = mesh.normal(s);
        for c in 0..n {
            for a in 0..2 {
                let t = frames[c].tangent(a);
                let vin = cdot(&interior.get(s, c).cross(&complexify(&t)), &ns);
                let vout = cdot(&exterior.get(s, c).cross(&complexify(&t)), &ns);
                row[system_column(n, CurrentKind::Interior, c, a)] = w_in * vin;
                row[system_column(n, CurrentKind::Exterior, c, a)] = -w_out * vout;
            }
        }
    });
    let rhs = Array1::from_iter(e0_normal.iter().map(|v| w_out * v));
    Ok(EquationRows {
        op: DiscreteOperator::new(m, normal_rows(n), system_columns(n)),
        rhs,
    })
}

/// Side from which a trace is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    Interior,
    Exterior,
}

/// Approach of `N × curl S J` toward a node compared with its assembled
/// one-sided trace.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpReport {
    pub node: usize,
    pub side: Side,
    /// Assembled trace `∓J/2 − A J + Γ J` at the node.
    pub trace: CVec3,
    pub distances: Vec<f64>,
    /// `N × curl S J` at `s ∓ hN`.
    pub values: Vec<CVec3>,
    /// `|value − trace| / |trace|`.
    pub errors: Vec<f64>,
}

/// `N_s × curl ∫_S G(x,t) J(t) dt` at an off-surface point, with
/// piecewise-constant Cartesian currents.
pub fn tangential_curl_at(
    mesh: &SurfaceMesh,
    current: &[CVec3],
    wavenumber: Complex64,
    x: &Vec3,
    normal: &Vec3,
    opts: &AssemblyOptions,
) -> Result<CVec3, OperatorError> {
    let params = KernelParams::new(wavenumber)?;
    let rule = QuadratureRule::regular(opts.regular_degree);
    let mut curl = CVec3::zeros();
    for (c, jc) in current.iter().enumerate() {
        let i = integrate_near(
            |t: &Vec3| params.gradient(&(x - t)),
            &facet(mesh, c),
            x,
            &rule,
            &opts.near_field,
        )?;
        curl += i.cross(jc);
    }
    Ok(rcross(normal, &curl))
}

/// Evaluates `N × curl S J` at `s − hN` (interior) or `s + hN` (exterior)
/// for each `h` and compares with the assembled trace at `s`.
#[allow(clippy::too_many_arguments)]
pub fn jump_relation_check(
    mesh: &SurfaceMesh,
    frames: &[TangentFrame],
    coefficients: &[[Complex64; 2]],
    wavenumber: Complex64,
    node: usize,
    side: Side,
    distances: &[f64],
    opts: &AssemblyOptions,
) -> Result<JumpReport, OperatorError> {
    if coefficients.len() != mesh.len() || frames.len() != mesh.len() || node >= mesh.len() {
        return Err(OperatorError::DimensionMismatch(
            "current or node does not match mesh".into(),
        ));
    }
    let current: Vec<CVec3> = frames
        .iter()
        .zip(coefficients)
        .map(|(f, c)| f.to_cartesian(*c))
        .collect();
    let row = GradientTable::row(mesh, wavenumber, node, opts)?;
    let ns = mesh.normal(node);
    let mut trace = CVec3::zeros();
    for (c, i) in row.iter().enumerate().filter(|(c, _)| *c != node) {
        // N×(I×J) = I(N·J) − J(N·I)
        trace += i * cdot(&current[c], &ns) - current[c] * cdot(i, &ns);
    }
    let sign = match side {
        Side::Interior => -1.0,
        Side::Exterior => 1.0,
    };
    trace += current[node] * Complex64::new(0.5 * sign, 0.0);
    let s = mesh.centroid(node);
    let mut values = Vec::with_capacity(distances.len());
    let mut errors = Vec::with_capacity(distances.len());
    for &h in distances {
        let x = s + ns * (sign * h);
        let v = tangential_curl_at(mesh, &current, wavenumber, &x, &ns, opts)?;
        errors.push(crate::cnorm(&(v - trace)) / crate::cnorm(&trace));
        values.push(v);
    }
    Ok(JumpReport {
        node,
        side,
        trace,
        distances: distances.to_vec(),
        values,
        errors,
    })
}
