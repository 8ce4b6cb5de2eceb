//! Assembled operators against brute-force quadrature.

mod support;

use bie_core::media::Medium;
use bie_core::mesh::{make_unit_sphere, tangent_frames, SurfaceMesh, TangentFrame};
use bie_core::operators::{
    assemble_gradient_term, jump_relation_check, AssemblyOptions, CurrentKind, Side,
};
use bie_core::solve::{assemble_system, incident_plane_wave, SystemOptions};
use bie_core::{CVec3, Complex64, Vec3};
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::brute;

fn tangents(frames: &[TangentFrame]) -> Vec<[Vec3; 2]> {
    frames
        .iter()
        .map(|f| [f.tangent(0), f.tangent(1)])
        .collect()
}

fn project(frames: &[TangentFrame], field: impl Fn(usize) -> Vec3) -> Vec<[Complex64; 2]> {
    frames
        .iter()
        .enumerate()
        .map(|(c, f)| {
            let v = field(c);
            [
                Complex64::new(f.tangent(0).dot(&v), 0.0),
                Complex64::new(f.tangent(1).dot(&v), 0.0),
            ]
        })
        .collect()
}

fn max_abs(v: impl Iterator<Item = Complex64>) -> f64 {
    v.map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn gradient_term_matches_adaptive_quadrature() {
    let mesh = make_unit_sphere(2).unwrap();
    let frames = tangent_frames(&mesh);
    let k = Complex64::new(1.5, 0.2);
    let op = assemble_gradient_term(
        &mesh,
        &frames,
        k,
        CurrentKind::Interior,
        &AssemblyOptions::default(),
    )
    .unwrap();
    let coeffs = project(&frames, |_| Vec3::x());
    let x = Array1::from_iter(coeffs.iter().flatten().copied());
    let got = op.apply(&x);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let s = rng.gen_range(0..mesh.len());
        let ns = mesh.normal(s);
        let grads = brute::facet_gradients(&mesh, k, &mesh.centroid(s), Some(s), 1e-9);
        let mut want = CVec3::zeros();
        for (c, g) in grads.iter().enumerate() {
            let j = frames[c].to_cartesian([coeffs[c][0].re, coeffs[c][1].re]);
            want += g * Complex64::new(ns.dot(&j), 0.0);
        }
        let row = CVec3::new(got[3 * s], got[3 * s + 1], got[3 * s + 2]);
        let err = (row - want).norm() / want.norm();
        assert!(err <= 1e-4, "node {s}: {err:e}");
    }
}

/// Worst entrywise row error relative to the row's largest entry, and worst
/// error of the rows applied to smooth currents relative to the applied value.
fn system_rows_agree(mesh: &SurfaceMesh, opts: &SystemOptions, nodes: &[usize]) -> (f64, f64) {
    let frames = tangent_frames(mesh);
    let medium = Medium::natural(2.25, 0.5, 1.0).unwrap();
    let inc = incident_plane_wave(Vec3::x(), Vec3::z(), Complex64::new(1.0, 0.0), 1.0).unwrap();
    let sys = assemble_system(mesh, &frames, &medium, &inc, opts).unwrap();
    let w = medium.wavenumbers().unwrap();
    let eps = medium.effective_permittivity().unwrap();
    let n = mesh.len();
    let h0 = 0.01 * mesh.mean_edge_length();
    let smooth = |c: usize, phase: f64| {
        let p = mesh.centroid(c);
        Vec3::new((p.y + phase).cos(), p.z * p.x, (2.0 * p.x).sin() + phase)
    };
    let x: Array1<Complex64> = project(&frames, |c| smooth(c, 0.3))
        .into_iter()
        .chain(project(&frames, |c| smooth(c, -1.1)))
        .flatten()
        .collect();
    let mut worst: f64 = 0.0;
    let mut applied: f64 = 0.0;
    for &s in nodes {
        let rows = brute::system_rows(
            mesh,
            &tangents(&frames),
            w.exterior,
            w.interior,
            (eps, Complex64::new(1.0, 0.0)),
            s,
            h0,
            1e-11,
        );
        for (r, want) in rows.iter().enumerate() {
            let i = if r < 3 { 3 * s + r } else { 3 * n + s };
            let got = sys.matrix.row(i);
            let scale = max_abs(want.iter().copied());
            let err = max_abs(got.iter().zip(want).map(|(a, b)| a - b)) / scale;
            worst = worst.max(err);
        }
        let value =
            |row: &dyn Fn(usize) -> Complex64| (0..4 * n).map(|c| row(c) * x[c]).sum::<Complex64>();
        let got: Vec<Complex64> = (0..4)
            .map(|r| value(&|c| sys.matrix[(if r < 3 { 3 * s + r } else { 3 * n + s }, c)]))
            .collect();
        let want: Vec<Complex64> = rows.iter().map(|row| value(&|c| row[c])).collect();
        let tangential = (0..3)
            .map(|i| (got[i] - want[i]).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / (0..3).map(|i| want[i].norm_sqr()).sum::<f64>().sqrt();
        applied = applied
            .max(tangential)
            .max((got[3] - want[3]).norm() / want[3].norm());
    }
    (worst, applied)
}

#[test]
fn system_rows_match_brute_force() {
    let mesh = make_unit_sphere(1).unwrap();
    let (rows, _) = system_rows_agree(&mesh, &SystemOptions::default(), &[0, 17, 33, 58, 79]);
    assert!(rows <= 1e-4, "worst row error {rows:e}");
}

#[test]
fn tangential_rows_applied_to_smooth_currents() {
    let mesh = make_unit_sphere(1).unwrap();
    let mut opts = SystemOptions::default();
    opts.assembly.regular_degree = 10;
    let (_, applied) = system_rows_agree(&mesh, &opts, &[3, 21, 40, 66, 71]);
    assert!(applied <= 1e-6, "applied error {applied:e}");
}

#[test]
fn approach_limits_converge_to_assembled_traces() {
    let mesh = make_unit_sphere(2).unwrap();
    let frames = tangent_frames(&mesh);
    let coeffs = project(&frames, |c| {
        let p = mesh.centroid(c);
        Vec3::new(p.y * p.z, (p.x).sin(), 1.0 + p.x * p.y)
    });
    let h = mesh.mean_edge_length();
    for side in [Side::Exterior, Side::Interior] {
        let report = jump_relation_check(
            &mesh,
            &frames,
            &coeffs,
            Complex64::new(1.0, 0.0),
            42,
            side,
            &[0.1 * h, 0.05 * h, 0.025 * h],
            &AssemblyOptions::default(),
        )
        .unwrap();
        // first order in h: each halving should roughly halve the error
        let e = &report.errors;
        assert!(
            e[1] < 0.6 * e[0] && e[2] < 0.6 * e[1] && e[2] < 0.05,
            "{side:?}: {e:?}"
        );
    }
}
