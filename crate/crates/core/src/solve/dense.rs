//! Dense direct solvers on the equilibrated system.

use lapack_sys::zgelsd_;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Factorize, Solve};
use num_complex::Complex64;

use super::{SolveDiagnostics, SolveError, SolveMethod};

fn diagnostics(m: usize, n: usize) -> SolveDiagnostics {
    SolveDiagnostics {
        method: SolveMethod::DirectLsq,
        equations: m,
        unknowns: n,
        relative_residual: f64::NAN,
        sigma_max: f64::NAN,
        sigma_min: f64::NAN,
        condition_estimate: None,
        rank: None,
        rank_deficient: false,
        smallest_singular_values: Vec::new(),
        iterations: None,
    }
}

fn condition(sigma_max: f64, sigma_min: f64) -> Option<f64> {
    (sigma_min > 0.0).then(|| sigma_max / sigma_min)
}

/// Minimum-norm least squares via `zgelsd` (SVD, divide and conquer).
pub(super) fn least_squares(
    a: Array2<Complex64>,
    b: &Array1<Complex64>,
    rcond: f64,
) -> Result<(Array1<Complex64>, SolveDiagnostics), SolveError> {
    let (m, n) = a.dim();
    // column-major copy
    let mut af: Vec<Complex64> = a.t().iter().copied().collect();
    drop(a);
    let ldb = m.max(n).max(1);
    let mut bf = vec![Complex64::new(0.0, 0.0); ldb];
    bf[..m].copy_from_slice(b.as_slice().expect("contiguous rhs"));
    let mut s = vec![0.0; m.min(n)];
    let (mi, ni, nrhs, lda, ldbi) = (m as i32, n as i32, 1i32, m.max(1) as i32, ldb as i32);
    let mut rank = 0i32;
    let mut info = 0i32;

    let mut work_q = [Complex64::new(0.0, 0.0)];
    let mut rwork_q = [0.0f64];
    let mut iwork_q = [0i32];
    let lwork_q = -1i32;
    unsafe {
        zgelsd_(
            &mi,
            &ni,
            &nrhs,
            af.as_mut_ptr() as *mut _,
            &lda,
            bf.as_mut_ptr() as *mut _,
            &ldbi,
            s.as_mut_ptr(),
            &rcond,
            &mut rank,
            work_q.as_mut_ptr() as *mut _,
            &lwork_q,
            rwork_q.as_mut_ptr(),
            iwork_q.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(SolveError::Lapack {
            routine: "zgelsd",
            info,
        });
    }
    let lwork = work_q[0].re.ceil() as usize;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1)];
    let mut rwork = vec![0.0f64; (rwork_q[0].ceil() as usize).max(1)];
    let mut iwork = vec![0i32; (iwork_q[0] as usize).max(1)];
    let lwork = work.len() as i32;
    unsafe {
        zgelsd_(
            &mi,
            &ni,
            &nrhs,
            af.as_mut_ptr() as *mut _,
            &lda,
            bf.as_mut_ptr() as *mut _,
            &ldbi,
            s.as_mut_ptr(),
            &rcond,
            &mut rank,
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(SolveError::Lapack {
            routine: "zgelsd",
            info,
        });
    }
    let mut diag = diagnostics(m, n);
    if let (Some(&hi), Some(&lo)) = (s.first(), s.last()) {
        diag.sigma_max = hi;
        diag.sigma_min = lo;
        diag.condition_estimate = condition(hi, lo);
    }
    diag.rank = Some(rank as usize);
    diag.rank_deficient = (rank as usize) < m.min(n) || m < n;
    diag.smallest_singular_values = s.iter().rev().take(10).copied().collect();
    Ok((Array1::from(bf[..n].to_vec()), diag))
}

/// LU solve with power / inverse-iteration estimates of the extreme
/// singular values.
pub(super) fn lu(
    a: &Array2<Complex64>,
    b: &Array1<Complex64>,
) -> Result<(Array1<Complex64>, SolveDiagnostics), SolveError> {
    let (m, n) = a.dim();
    if m != n {
        return Err(SolveError::Linalg(format!(
            "LU needs a square system, got {m}x{n}"
        )));
    }
    let f = a
        .factorize()
        .map_err(|e| SolveError::Linalg(e.to_string()))?;
    let x = f.solve(b).map_err(|e| SolveError::Linalg(e.to_string()))?;
    let mut diag = diagnostics(m, n);
    diag.method = SolveMethod::DirectLu;
    diag.sigma_max = power_sigma_max(a, 50);
    diag.sigma_min = inverse_sigma_min(&f, n, 30).unwrap_or(0.0);
    diag.condition_estimate = condition(diag.sigma_max, diag.sigma_min);
    diag.rank_deficient = !(diag.sigma_min > 1e-10 * diag.sigma_max);
    Ok((x, diag))
}

fn start_vector(n: usize) -> Array1<Complex64> {
    // fixed, not aligned with any coordinate direction
    let v: Array1<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.37 * (i as f64).sin(), 0.21 * (1.3 * i as f64).cos()))
        .collect();
    let nv = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v / Complex64::new(nv, 0.0)
}

fn vnorm(v: &Array1<Complex64>) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `σ_max(A)` by power iteration on `AᴴA`.
pub(super) fn power_sigma_max(a: &Array2<Complex64>, iterations: usize) -> f64 {
    let ah = a.t().mapv(|v| v.conj());
    let mut v = start_vector(a.ncols());
    let mut sigma = 0.0;
    for _ in 0..iterations {
        let w = ah.dot(&a.dot(&v));
        let nw = vnorm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        sigma = nw.sqrt();
        v = w / Complex64::new(nw, 0.0);
    }
    sigma
}

/// `σ_min(A)` by inverse iteration on `AᴴA` with the LU factors.
fn inverse_sigma_min<F>(f: &F, n: usize, iterations: usize) -> Option<f64>
where
    F: Solve<Complex64>,
{
    let mut v = start_vector(n);
    let mut sigma = None;
    for _ in 0..iterations {
        let z = f.solve_h(&v).ok()?;
        let w = f.solve(&z).ok()?;
        let nw = vnorm(&w);
        if !nw.is_finite() || nw == 0.0 {
            return Some(0.0);
        }
        sigma = Some(1.0 / nw.sqrt());
        v = w / Complex64::new(nw, 0.0);
    }
    sigma
}
