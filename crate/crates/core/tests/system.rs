//! Coupled system bookkeeping, linearity and solver agreement.

use bie_core::media::Medium;
use bie_core::mesh::{make_unit_sphere, tangent_frames};
use bie_core::operators::{
    a_operator, gradient_term_operator, normal_trace_equation, tangential_trace_equation,
    CurrentKind, EquationKind, GradientTable,
};
use bie_core::solve::{
    assemble_system, incident_plane_wave, solve_system, SolveMethod, SolveOptions, SystemOptions,
};
use bie_core::{cdot, rcross, CVec3, Complex64, Vec3};
use ndarray::{concatenate, Array1, Axis};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dielectric() -> Medium {
    Medium::natural(2.25, 0.0, 1.0).unwrap()
}

fn random_vector(n: usize, seed: u64) -> Array1<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array1::from_iter(
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
    )
}

fn rel(a: &Array1<Complex64>, b: &Array1<Complex64>) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let s: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (d / s).sqrt()
}

#[test]
fn icosahedron_gives_eighty_unknowns() {
    let mesh = make_unit_sphere(0).unwrap();
    assert_eq!(mesh.len(), 20);
    let frames = tangent_frames(&mesh);
    let inc = incident_plane_wave(Vec3::x(), Vec3::z(), Complex64::new(1.0, 0.0), 1.0).unwrap();
    let sys = assemble_system(
        &mesh,
        &frames,
        &dielectric(),
        &inc,
        &SystemOptions::default(),
    )
    .unwrap();
    assert_eq!(sys.matrix.dim(), (80, 80));
    assert_eq!(sys.rhs.len(), 80);
    assert_eq!(
        sys.rows
            .iter()
            .filter(|r| r.equation == EquationKind::Normal)
            .count(),
        20
    );
    assert!(sys.matrix.iter().all(|v| v.is_finite()));
}

#[test]
fn system_is_sum_of_assembled_operators() {
    let mesh = make_unit_sphere(1).unwrap();
    let frames = tangent_frames(&mesh);
    let medium = Medium::natural(2.25, 0.5, 1.0).unwrap();
    let w = medium.wavenumbers().unwrap();
    let inc = incident_plane_wave(
        Vec3::y(),
        Vec3::new(1.0, 0.0, 1.0).normalize(),
        Complex64::new(0.5, 2.0),
        1.0,
    )
    .unwrap();
    let opts = SystemOptions::default();
    let sys = assemble_system(&mesh, &frames, &medium, &inc, &opts).unwrap();

    let interior = GradientTable::assemble(&mesh, w.interior, &opts.assembly).unwrap();
    let exterior = GradientTable::assemble(&mesh, w.exterior, &opts.assembly).unwrap();
    let e0: Vec<CVec3> = mesh.centroids().iter().map(|x| inc.e(x)).collect();
    let trace: Vec<CVec3> = e0
        .iter()
        .zip(mesh.normals())
        .map(|(e, n)| rcross(n, e))
        .collect();
    let normal: Vec<Complex64> = e0
        .iter()
        .zip(mesh.normals())
        .map(|(e, n)| cdot(e, n))
        .collect();
    let tangential = tangential_trace_equation(
        &frames,
        &a_operator(&mesh, &frames, &interior, CurrentKind::Interior).unwrap(),
        &a_operator(&mesh, &frames, &exterior, CurrentKind::Exterior).unwrap(),
        &gradient_term_operator(&mesh, &frames, &interior, CurrentKind::Interior).unwrap(),
        &gradient_term_operator(&mesh, &frames, &exterior, CurrentKind::Exterior).unwrap(),
        &trace,
    )
    .unwrap();
    let flux = normal_trace_equation(
        &mesh,
        &frames,
        &interior,
        &exterior,
        (medium.effective_permittivity().unwrap(), 1.0),
        opts.weighting,
        &normal,
    )
    .unwrap();

    let x = random_vector(4 * mesh.len(), 7);
    let parts = concatenate![Axis(0), tangential.op.apply(&x), flux.op.apply(&x)];
    assert!(rel(&sys.matrix.dot(&x), &parts) < 1e-12);
    let rhs = concatenate![Axis(0), tangential.rhs, flux.rhs];
    assert!(rel(&sys.rhs, &rhs) < 1e-15);
}

#[test]
fn least_squares_and_iterative_agree() {
    let mesh = make_unit_sphere(1).unwrap();
    let frames = tangent_frames(&mesh);
    let inc = incident_plane_wave(Vec3::x(), Vec3::z(), Complex64::new(1.0, 0.0), 1.0).unwrap();
    let sys = assemble_system(
        &mesh,
        &frames,
        &dielectric(),
        &inc,
        &SystemOptions::default(),
    )
    .unwrap();
    let lsq = solve_system(&sys, &SolveOptions::default()).unwrap();
    let it = solve_system(
        &sys,
        &SolveOptions {
            method: SolveMethod::Iterative,
            ..Default::default()
        },
    )
    .unwrap();
    let err = rel(&it.coefficients, &lsq.coefficients);
    assert!(err <= 1e-6, "{err:e}");
    assert!(lsq.diagnostics.rank_deficient);
    assert!(it.diagnostics.iterations.is_some());
}

#[test]
fn currents_scale_with_incident_amplitude() {
    let mesh = make_unit_sphere(1).unwrap();
    let frames = tangent_frames(&mesh);
    let solve = |amp: Complex64| {
        let inc = incident_plane_wave(Vec3::x(), Vec3::z(), amp, 1.0).unwrap();
        let sys = assemble_system(
            &mesh,
            &frames,
            &dielectric(),
            &inc,
            &SystemOptions::default(),
        )
        .unwrap();
        solve_system(&sys, &SolveOptions::default()).unwrap()
    };
    let one = solve(Complex64::new(1.0, 0.0));
    let two = solve(Complex64::new(2.0, 0.0));
    let doubled = one.coefficients.mapv(|v| v * 2.0);
    assert!(rel(&two.coefficients, &doubled) < 1e-10);
}

#[test]
fn least_squares_residual_is_reproducible() {
    let mesh = make_unit_sphere(1).unwrap();
    let frames = tangent_frames(&mesh);
    let inc = incident_plane_wave(Vec3::x(), Vec3::z(), Complex64::new(1.0, 0.0), 1.0).unwrap();
    let run = || {
        let sys = assemble_system(
            &mesh,
            &frames,
            &dielectric(),
            &inc,
            &SystemOptions::default(),
        )
        .unwrap();
        solve_system(&sys, &SolveOptions::default())
            .unwrap()
            .diagnostics
    };
    let (a, b) = (run(), run());
    assert_eq!(a.relative_residual.to_bits(), b.relative_residual.to_bits());
    assert!(a.relative_residual <= 1e-6);
}

fn unit(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The normal is a left null vector of every node's tangential rows,
    /// matrix and right-hand side alike.
    #[test]
    fn tangential_rows_have_normal_null_vector(theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU, psi in 0.0..std::f64::consts::TAU, eps in 1.0..6.0f64, sigma in 0.0..2.0f64) {
        let mesh = make_unit_sphere(0).unwrap();
        let frames = tangent_frames(&mesh);
        let dir = unit(theta, phi);
        let f = bie_core::mesh::TangentFrame::from_normal(dir);
        let pol = f.tangent(0) * psi.cos() + f.tangent(1) * psi.sin();
        let inc = incident_plane_wave(pol, dir, Complex64::new(1.0, 0.0), 1.0).unwrap();
        let medium = Medium::natural(eps, sigma, 1.0).unwrap();
        let sys = assemble_system(&mesh, &frames, &medium, &inc, &SystemOptions::default()).unwrap();
        let scale = sys.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for s in 0..mesh.len() {
            let n = mesh.normal(s);
            for c in 0..sys.matrix.ncols() {
                let v: Complex64 = (0..3).map(|i| sys.matrix[(3 * s + i, c)] * n[i]).sum();
                prop_assert!(v.norm() <= 1e-13 * scale);
            }
            let r: Complex64 = (0..3).map(|i| sys.rhs[3 * s + i] * n[i]).sum();
            prop_assert!(r.norm() <= 1e-14);
        }
    }

    #[test]
    fn reconstructed_currents_are_tangential(seed in 0u64..1000) {
        let mesh = make_unit_sphere(1).unwrap();
        let frames = tangent_frames(&mesh);
        let x = random_vector(4 * mesh.len(), seed);
        let currents = bie_core::solve::SurfaceCurrents::from_vector(&x);
        for kind in [CurrentKind::Exterior, CurrentKind::Interior] {
            for (v, n) in currents.cartesian(&frames, kind).iter().zip(mesh.normals()) {
                prop_assert!(cdot(v, n).norm() <= 1e-15);
            }
        }
    }
}
