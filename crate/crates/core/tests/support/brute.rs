//! Brute-force reference values for assembled operator rows.
//!
//! Facet integrals use plain adaptive subdivision of a 7-point rule with no
//! singular treatment. On-surface traces come from approach limits
//! `x = s ∓ hN` at `h, h/2, h/4`, extrapolated to `h = 0`.

#![allow(dead_code)]

use bie_core::mesh::SurfaceMesh;
use bie_core::{CVec3, Complex64, Vec3};

const MAX_DEPTH: usize = 40;

/// `∇_x e^{iκr}/(4πr)` with `r = |x − t|`.
pub fn grad_green(kappa: Complex64, x: &Vec3, t: &Vec3) -> CVec3 {
    let d = x - t;
    let r = d.norm();
    let ikr = Complex64::i() * kappa * r;
    let s = ikr.exp() * (ikr - 1.0) / (4.0 * std::f64::consts::PI * r * r * r);
    CVec3::new(s * d.x, s * d.y, s * d.z)
}

fn radon(f: &dyn Fn(&Vec3) -> CVec3, tri: &[Vec3; 3]) -> CVec3 {
    let r = 15f64.sqrt();
    let (a1, b1, w1) = (
        (6.0 - r) / 21.0,
        (9.0 + 2.0 * r) / 21.0,
        (155.0 - r) / 1200.0,
    );
    let (a2, b2, w2) = (
        (6.0 + r) / 21.0,
        (9.0 - 2.0 * r) / 21.0,
        (155.0 + r) / 1200.0,
    );
    let p = |u: f64, v: f64, w: f64| tri[0] * u + tri[1] * v + tri[2] * w;
    let mut sum = f(&p(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)) * Complex64::new(9.0 / 40.0, 0.0);
    for (a, b, w) in [(a1, b1, w1), (a2, b2, w2)] {
        for q in [p(b, a, a), p(a, b, a), p(a, a, b)] {
            sum += f(&q) * Complex64::new(w, 0.0);
        }
    }
    let area = 0.5 * (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).norm();
    sum * Complex64::new(area, 0.0)
}

fn split(tri: &[Vec3; 3]) -> [[Vec3; 3]; 4] {
    let [a, b, c] = *tri;
    let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

fn adapt(
    f: &dyn Fn(&Vec3) -> CVec3,
    tri: &[Vec3; 3],
    whole: CVec3,
    tol: f64,
    depth: usize,
) -> CVec3 {
    let kids = split(tri);
    let parts: Vec<CVec3> = kids.iter().map(|k| radon(f, k)).collect();
    let sum: CVec3 = parts.iter().sum();
    let diff = (sum - whole).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if diff <= tol || depth >= MAX_DEPTH {
        return sum;
    }
    kids.iter()
        .zip(parts)
        .map(|(k, p)| adapt(f, k, p, 0.5 * tol, depth + 1))
        .sum()
}

/// Adaptive integral of a vector integrand over a triangle to absolute
/// tolerance `tol` (componentwise).
pub fn integrate(f: &dyn Fn(&Vec3) -> CVec3, tri: &[Vec3; 3], tol: f64) -> CVec3 {
    adapt(f, tri, radon(f, tri), tol, 0)
}

/// `∫_c ∇G(x − t) dt` for every facet `c` except `skip`, whose entry is 0.
pub fn facet_gradients(
    mesh: &SurfaceMesh,
    kappa: Complex64,
    x: &Vec3,
    skip: Option<usize>,
    tol: f64,
) -> Vec<CVec3> {
    (0..mesh.len())
        .map(|c| match skip == Some(c) {
            true => CVec3::zeros(),
            false => integrate(&|t| grad_green(kappa, x, t), &mesh.corners(c), tol),
        })
        .collect()
}

/// Limit of [`facet_gradients`] as `x → s` along the normal from the given
/// side (`sign = −1` interior, `+1` exterior), by Richardson extrapolation
/// over `h0, h0/2, h0/4`.
pub fn facet_gradient_limits(
    mesh: &SurfaceMesh,
    kappa: Complex64,
    node: usize,
    sign: f64,
    h0: f64,
    tol: f64,
) -> Vec<CVec3> {
    let s = mesh.centroid(node);
    let n = mesh.normal(node);
    let at = |h: f64| facet_gradients(mesh, kappa, &(s + n * (sign * h)), None, tol);
    let (v1, v2, v4) = (at(h0), at(0.5 * h0), at(0.25 * h0));
    v1.iter()
        .zip(&v2)
        .zip(&v4)
        .map(|((a, b), c)| {
            (c * Complex64::new(8.0, 0.0) - b * Complex64::new(6.0, 0.0) + a)
                / Complex64::new(3.0, 0.0)
        })
        .collect()
}

/// Brute-force rows of one node of the coupled system: three tangential
/// rows then the normal row, each over the `4N` system columns
/// (exterior current first, then interior, two frame components per node).
pub fn system_rows(
    mesh: &SurfaceMesh,
    tangents: &[[Vec3; 2]],
    k: Complex64,
    kk: Complex64,
    weights: (Complex64, Complex64),
    node: usize,
    h0: f64,
    tol: f64,
) -> [Vec<Complex64>; 4] {
    let n = mesh.len();
    let ns = mesh.normal(node);
    let inner = facet_gradient_limits(mesh, kk, node, -1.0, h0, tol);
    let outer = facet_gradient_limits(mesh, k, node, 1.0, h0, tol);
    let mut rows: [Vec<Complex64>; 4] =
        std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); 4 * n]);
    let real = |v: &Vec3| CVec3::new(v.x.into(), v.y.into(), v.z.into());
    let nc = real(&ns);
    for c in 0..n {
        for a in 0..2 {
            let t = real(&tangents[c][a]);
            let ext = 2 * c + a;
            let int = 2 * n + 2 * c + a;
            let fi = outer[c].cross(&t);
            let fj = inner[c].cross(&t);
            let ti = nc.cross(&fi);
            let tj = nc.cross(&fj);
            for i in 0..3 {
                rows[i][ext] = -ti[i];
                rows[i][int] = tj[i];
            }
            rows[3][ext] = -weights.1 * nc.dot(&fi);
            rows[3][int] = weights.0 * nc.dot(&fj);
        }
    }
    rows
}
