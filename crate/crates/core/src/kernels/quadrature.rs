//! Quadrature over flat triangles: symmetric regular rules, geometric
//! near-field subdivision, Duffy-type rules for `1/r` singularities and the
//! principal-value rule for odd `1/r²` kernels.

use nalgebra::Matrix3;
use num_complex::Complex64;
use thiserror::Error;

use crate::mesh::TangentFrame;
use crate::{CVec3, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("rule kind mismatch: expected {expected:?}, got {got:?}")]
    KindMismatch { expected: RuleKind, got: RuleKind },
    #[error("singular point is not on the triangle")]
    SingularPointOutside,
    #[error("patch is not planar or does not contain the singular point")]
    BadPatch,
    #[error("excision radius {delta:e} must be positive and at most {max:e}")]
    BadExcision { delta: f64, max: f64 },
    #[error("leading singular term has nonzero angular mean {mean:e} (scale {scale:e}); principal value does not exist")]
    NotPrincipalValue { mean: f64, scale: f64 },
}

/// Values that quadrature sums can accumulate.
pub trait Quantity: Copy + Send + Sync {
    fn zero() -> Self;
    fn add_scaled(&mut self, value: Self, weight: f64);
    fn magnitude(&self) -> f64;
}

impl Quantity for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_scaled(&mut self, value: Self, weight: f64) {
        *self += value * weight;
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Quantity for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, value: Self, weight: f64) {
        self.re += value.re * weight;
        self.im += value.im * weight;
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Quantity for Vec3 {
    fn zero() -> Self {
        Vec3::zeros()
    }
    fn add_scaled(&mut self, value: Self, weight: f64) {
        *self += value * weight;
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Quantity for CVec3 {
    fn zero() -> Self {
        CVec3::zeros()
    }
    fn add_scaled(&mut self, value: Self, weight: f64) {
        for i in 0..3 {
            self[i].add_scaled(value[i], weight);
        }
    }
    fn magnitude(&self) -> f64 {
        crate::cnorm(self)
    }
}

impl Quantity for Matrix3<Complex64> {
    fn zero() -> Self {
        Matrix3::zeros()
    }
    fn add_scaled(&mut self, value: Self, weight: f64) {
        for (a, b) in self.iter_mut().zip(value.iter()) {
            a.add_scaled(*b, weight);
        }
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl<A: Quantity, B: Quantity> Quantity for (A, B) {
    fn zero() -> Self {
        (A::zero(), B::zero())
    }
    fn add_scaled(&mut self, value: Self, weight: f64) {
        self.0.add_scaled(value.0, weight);
        self.1.add_scaled(value.1, weight);
    }
    fn magnitude(&self) -> f64 {
        self.0.magnitude().hypot(self.1.magnitude())
    }
}

/// Flat triangle in space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub vertices: [Vec3; 3],
}

impl Triangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Self {
            vertices: [a, b, c],
        }
    }

    fn cross(&self) -> Vec3 {
        let [a, b, c] = self.vertices;
        (b - a).cross(&(c - a))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.cross().norm()
    }

    pub fn normal(&self) -> Vec3 {
        self.cross().normalize()
    }

    pub fn centroid(&self) -> Vec3 {
        let [a, b, c] = self.vertices;
        (a + b + c) / 3.0
    }

    pub fn diameter(&self) -> f64 {
        let [a, b, c] = self.vertices;
        (b - a).norm().max((c - b).norm()).max((a - c).norm())
    }

    pub fn point(&self, bary: &[f64; 3]) -> Vec3 {
        let [a, b, c] = self.vertices;
        a * bary[0] + b * bary[1] + c * bary[2]
    }

    pub fn subdivide(&self) -> [Triangle; 4] {
        let [a, b, c] = self.vertices;
        let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
        [
            Triangle::new(a, ab, ca),
            Triangle::new(ab, b, bc),
            Triangle::new(ca, bc, c),
            Triangle::new(ab, bc, ca),
        ]
    }

    /// Barycentric coordinates of the projection of `p` onto the plane.
    pub fn barycentric(&self, p: &Vec3) -> [f64; 3] {
        let [a, b, c] = self.vertices;
        let n = self.cross();
        let nn = n.norm_squared();
        let l1 = (c - b).cross(&(p - b)).dot(&n) / nn;
        let l2 = (a - c).cross(&(p - c)).dot(&n) / nn;
        [l1, l2, 1.0 - l1 - l2]
    }

    /// Whether `p` lies on the (closed) triangle up to a relative tolerance.
    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        let scale = self.diameter();
        let off_plane = (p - self.vertices[0]).dot(&self.normal()).abs();
        off_plane <= tol * scale && self.barycentric(p).iter().all(|&l| l >= -tol)
    }

    /// Euclidean distance from `p` to the closed triangle.
    pub fn distance_to(&self, p: &Vec3) -> f64 {
        (p - self.closest_point(p)).norm()
    }

    pub fn closest_point(&self, p: &Vec3) -> Vec3 {
        let [a, b, c] = self.vertices;
        let (ab, ac, ap) = (b - a, c - a, p - a);
        let (d1, d2) = (ab.dot(&ap), ac.dot(&ap));
        if d1 <= 0.0 && d2 <= 0.0 {
            return a;
        }
        let bp = p - b;
        let (d3, d4) = (ab.dot(&bp), ac.dot(&bp));
        if d3 >= 0.0 && d4 <= d3 {
            return b;
        }
        let vc = d1 * d4 - d3 * d2;
        if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
            return a + ab * (d1 / (d1 - d3));
        }
        let cp = p - c;
        let (d5, d6) = (ab.dot(&cp), ac.dot(&cp));
        if d6 >= 0.0 && d5 <= d6 {
            return c;
        }
        let vb = d5 * d2 - d1 * d6;
        if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
            return a + ac * (d2 / (d2 - d6));
        }
        let va = d3 * d6 - d5 * d4;
        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
            return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
        }
        let denom = 1.0 / (va + vb + vc);
        a + ab * (vb * denom) + ac * (vc * denom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Regular,
    PolarSingular,
    Cpv,
}

/// Point on the reference triangle `(0,0), (1,0), (0,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Quadrature rule on the reference triangle; weights sum to its area 1/2.
///
/// Polar-singular and principal-value rules put the singular point at
/// reference vertex 0 (barycentric `(1,0,0)`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    /// Polynomial exactness for regular rules, Gauss order otherwise.
    pub degree: usize,
    pub points: Vec<QuadPoint>,
    /// Gauss nodes on `[0, 1]` along the edge opposite the singular vertex.
    pub angular: Vec<(f64, f64)>,
}

impl QuadratureRule {
    /// Regular rule exact for polynomials up to `degree`. Degree ≤ 5 gives the
    /// symmetric 7-point rule; higher degrees use a collapsed Gauss product.
    pub fn regular(degree: usize) -> Self {
        if degree <= 5 {
            return Self::seven_point();
        }
        let n = (degree + 3) / 2;
        let mut rule = Self::collapsed(n, RuleKind::Regular);
        rule.degree = 2 * n - 2;
        rule
    }

    fn seven_point() -> Self {
        let s15 = 15f64.sqrt();
        let (a1, a2) = ((6.0 - s15) / 21.0, (6.0 + s15) / 21.0);
        let (b1, b2) = (1.0 - 2.0 * a1, 1.0 - 2.0 * a2);
        let (w1, w2) = ((155.0 - s15) / 2400.0, (155.0 + s15) / 2400.0);
        let third = 1.0 / 3.0;
        let mut points = vec![QuadPoint {
            bary: [third; 3],
            weight: 9.0 / 80.0,
        }];
        for (a, b, w) in [(a1, b1, w1), (a2, b2, w2)] {
            for bary in [[a, a, b], [a, b, a], [b, a, a]] {
                points.push(QuadPoint { bary, weight: w });
            }
        }
        Self {
            kind: RuleKind::Regular,
            degree: 5,
            points,
            angular: Vec::new(),
        }
    }

    /// Duffy rule for integrands with a `1/r` singularity at vertex 0.
    pub fn polar_singular(order: usize) -> Self {
        Self::collapsed(order, RuleKind::PolarSingular)
    }

    /// Principal-value rule: polar points plus the angular nodes used for the
    /// analytically integrated `1/r²` part.
    pub fn cpv(order: usize) -> Self {
        let mut rule = Self::collapsed(order, RuleKind::Cpv);
        rule.angular = gauss_legendre(2 * order);
        rule
    }

    fn collapsed(order: usize, kind: RuleKind) -> Self {
        let gl = gauss_legendre(order);
        let mut points = Vec::with_capacity(order * order);
        for &(u, wu) in &gl {
            for &(v, wv) in &gl {
                points.push(QuadPoint {
                    bary: [1.0 - u, u * (1.0 - v), u * v],
                    weight: wu * wv * u,
                });
            }
        }
        Self {
            kind,
            degree: order,
            points,
            angular: Vec::new(),
        }
    }

    pub fn weight_sum(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    fn require(&self, kind: RuleKind) -> Result<(), QuadratureError> {
        if self.kind != kind {
            return Err(QuadratureError::KindMismatch {
                expected: kind,
                got: self.kind,
            });
        }
        Ok(())
    }

    fn apply<T: Quantity, F: Fn(&Vec3) -> T>(&self, f: &F, tri: &Triangle) -> T {
        let scale = 2.0 * tri.area();
        let mut acc = T::zero();
        for q in &self.points {
            acc.add_scaled(f(&tri.point(&q.bary)), q.weight * scale);
        }
        acc
    }
}

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n > 0, "Gauss–Legendre order must be positive");
    let mut out = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (0.5 * (1.0 - x), 0.5 * w);
        out[n - 1 - i] = (0.5 * (1.0 + x), 0.5 * w);
    }
    out
}

/// Regular quadrature of `f` over `tri`.
pub fn integrate_regular<T: Quantity, F: Fn(&Vec3) -> T>(
    f: F,
    tri: &Triangle,
    rule: &QuadratureRule,
) -> Result<T, QuadratureError> {
    rule.require(RuleKind::Regular)?;
    Ok(rule.apply(&f, tri))
}

/// Geometric near-field refinement: a (sub)triangle is split 1→4 until the
/// target is farther than `ratio` diameters from it or `max_depth` is hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearFieldPolicy {
    pub ratio: f64,
    pub max_depth: usize,
}

impl Default for NearFieldPolicy {
    fn default() -> Self {
        Self {
            ratio: 2.0,
            max_depth: 14,
        }
    }
}

impl NearFieldPolicy {
    pub fn is_near(&self, tri: &Triangle, target: &Vec3) -> bool {
        tri.distance_to(target) < self.ratio * tri.diameter()
    }
}

/// Regular rule with near-field subdivision around `target`.
pub fn integrate_near<T: Quantity, F: Fn(&Vec3) -> T>(
    f: F,
    tri: &Triangle,
    target: &Vec3,
    rule: &QuadratureRule,
    policy: &NearFieldPolicy,
) -> Result<T, QuadratureError> {
    rule.require(RuleKind::Regular)?;
    let mut acc = T::zero();
    near_recursive(&f, tri, target, rule, policy, 0, &mut acc);
    Ok(acc)
}

fn near_recursive<T: Quantity, F: Fn(&Vec3) -> T>(
    f: &F,
    tri: &Triangle,
    target: &Vec3,
    rule: &QuadratureRule,
    policy: &NearFieldPolicy,
    depth: usize,
    acc: &mut T,
) {
    if depth >= policy.max_depth || !policy.is_near(tri, target) {
        acc.add_scaled(rule.apply(f, tri), 1.0);
        return;
    }
    for child in tri.subdivide() {
        near_recursive(f, &child, target, rule, policy, depth + 1, acc);
    }
}

/// Integral of a kernel with at most a `1/r` singularity at `singular`, a
/// point of the closed triangle. The triangle is split into three pieces with
/// a common vertex at the singular point and each piece is integrated with
/// the Duffy rule, whose Jacobian cancels the `1/r` factor.
pub fn integrate_weakly_singular<T: Quantity, F: Fn(&Vec3) -> T>(
    f: F,
    tri: &Triangle,
    singular: &Vec3,
    rule: &QuadratureRule,
) -> Result<T, QuadratureError> {
    rule.require(RuleKind::PolarSingular)?;
    if !tri.contains(singular, 1e-10) {
        return Err(QuadratureError::SingularPointOutside);
    }
    Ok(fan_integral(&f, tri, singular, rule))
}

/// Signed fan decomposition of `tri` about `p` (any point of its plane).
fn fan_integral<T: Quantity, F: Fn(&Vec3) -> T>(
    f: &F,
    tri: &Triangle,
    p: &Vec3,
    rule: &QuadratureRule,
) -> T {
    let n = tri.normal();
    let area = tri.area();
    let mut acc = T::zero();
    for e in 0..3 {
        let (a, b) = (tri.vertices[e], tri.vertices[(e + 1) % 3]);
        let signed = 0.5 * (a - p).cross(&(b - p)).dot(&n);
        if signed.abs() <= 1e-14 * area {
            continue;
        }
        let piece = Triangle::new(*p, a, b);
        let mut part = T::zero();
        for q in &rule.points {
            part.add_scaled(f(&piece.point(&q.bary)), q.weight);
        }
        acc.add_scaled(part, 2.0 * signed);
    }
    acc
}

/// Cauchy principal value over a planar patch of a kernel split as
///
/// ```text
/// f(x) = Φ(ê) / r² + R(x),   ê = (x − p)/r,  r = |x − p|
/// ```
///
/// where `Φ` has zero mean over the unit circle of the patch plane and `R`
/// is at most weakly singular. The `Φ` part is integrated over the patch
/// minus the disk of radius `delta` about `p` (analytically in `r`,
/// numerically in angle); over the disk it contributes exactly zero. The
/// remainder is integrated over the whole patch with the Duffy rule.
pub fn integrate_cpv<T, A, R>(
    angular: A,
    remainder: R,
    patch: &[Triangle],
    p: &Vec3,
    delta: f64,
    rule: &QuadratureRule,
) -> Result<T, QuadratureError>
where
    T: Quantity,
    A: Fn(&Vec3) -> T,
    R: Fn(&Vec3) -> T,
{
    rule.require(RuleKind::Cpv)?;
    let normal = patch.first().ok_or(QuadratureError::BadPatch)?.normal();
    let scale = patch.iter().map(|t| t.diameter()).fold(0.0, f64::max);
    let planar = patch.iter().all(|t| {
        t.normal().cross(&normal).norm() < 1e-10
            && (p - t.vertices[0]).dot(&normal).abs() <= 1e-10 * scale
    });
    if !planar || !patch.iter().any(|t| t.contains(p, 1e-12)) {
        return Err(QuadratureError::BadPatch);
    }
    let max = boundary_distance(patch, p);
    if !(delta > 0.0 && delta <= max) {
        return Err(QuadratureError::BadExcision { delta, max });
    }
    check_angular_mean(&angular, &normal)?;

    let mut acc = T::zero();
    for tri in patch {
        for e in 0..3 {
            let (a, b) = (tri.vertices[e], tri.vertices[(e + 1) % 3]);
            let signed = 0.5 * (a - p).cross(&(b - p)).dot(&normal);
            if signed.abs() <= 1e-14 * tri.area() {
                continue;
            }
            let mut part = T::zero();
            for &(v, w) in &rule.angular {
                let q = (a - p) + (b - a) * v;
                let r = q.norm();
                let log = (r.max(delta) / delta).ln();
                part.add_scaled(angular(&(q / r)), w * log / (r * r));
            }
            acc.add_scaled(part, 2.0 * signed);
        }
        acc.add_scaled(fan_integral(&remainder, tri, p, rule), 1.0);
    }
    Ok(acc)
}

/// Distance from `p` to the boundary of the patch (edges used once).
fn boundary_distance(patch: &[Triangle], p: &Vec3) -> f64 {
    let scale = patch.iter().map(|t| t.diameter()).fold(0.0, f64::max);
    let same = |a: &Vec3, b: &Vec3| (a - b).norm() <= 1e-12 * scale;
    let edges: Vec<(Vec3, Vec3)> = patch
        .iter()
        .flat_map(|t| (0..3).map(move |e| (t.vertices[e], t.vertices[(e + 1) % 3])))
        .collect();
    let mut best = f64::INFINITY;
    for (i, (a, b)) in edges.iter().enumerate() {
        let shared = edges.iter().enumerate().any(|(j, (c, d))| {
            j != i && ((same(a, c) && same(b, d)) || (same(a, d) && same(b, c)))
        });
        if !shared {
            best = best.min(segment_distance(p, a, b));
        }
    }
    best
}

fn segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

const MEAN_SAMPLES: usize = 64;

/// Trapezoidal mean of `Φ` over the unit circle of the plane with `normal`
/// (exact for trigonometric polynomials below the sample count).
fn check_angular_mean<T: Quantity, A: Fn(&Vec3) -> T>(
    angular: &A,
    normal: &Vec3,
) -> Result<(), QuadratureError> {
    let frame = TangentFrame::from_normal(*normal);
    let mut mean = T::zero();
    let mut scale = 0.0;
    for i in 0..MEAN_SAMPLES {
        let th = 2.0 * std::f64::consts::PI * i as f64 / MEAN_SAMPLES as f64;
        let e = frame.t1 * th.cos() + frame.t2 * th.sin();
        let v = angular(&e);
        scale += v.magnitude() / MEAN_SAMPLES as f64;
        mean.add_scaled(v, 1.0 / MEAN_SAMPLES as f64);
    }
    let m = mean.magnitude();
    if m > 1e-9 * scale + 1e-300 {
        return Err(QuadratureError::NotPrincipalValue { mean: m, scale });
    }
    Ok(())
}
