//! Restarted GMRES with modified Gram–Schmidt and complex Givens rotations.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use super::dense::power_sigma_max;
use super::{SolveDiagnostics, SolveError, SolveMethod, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub x: Array1<Complex64>,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` from the recurrence.
    pub relative_residual: f64,
    pub converged: bool,
}

fn dotc(a: &Array1<Complex64>, b: &Array1<Complex64>) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &Array1<Complex64>) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    if a.norm() == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0), b);
    }
    let t = a.norm().hypot(b.norm());
    let phase = a / a.norm();
    (a.norm() / t, phase * b.conj() / t, phase * t)
}

/// Solves `op(x) = b` to relative residual `tol`, starting from zero.
pub fn gmres<F>(
    op: F,
    b: &Array1<Complex64>,
    restart: usize,
    max_iterations: usize,
    tol: f64,
) -> GmresOutcome
where
    F: Fn(&Array1<Complex64>) -> Array1<Complex64>,
{
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut x = Array1::<Complex64>::zeros(n);
    let nb = norm(b);
    if nb == 0.0 {
        return GmresOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let m = restart.max(1).min(n.max(1));
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < max_iterations {
        let r = b - &op(&x);
        let beta = norm(&r);
        rel = beta / nb;
        if rel <= tol {
            return GmresOutcome {
                x,
                iterations,
                relative_residual: rel,
                converged: true,
            };
        }
        let mut basis: Vec<Array1<Complex64>> = vec![r / Complex64::new(beta, 0.0)];
        let mut h = Array2::<Complex64>::zeros((m + 1, m));
        let mut cs = vec![0.0; m];
        let mut sn = vec![zero; m];
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k = 0;
        while k < m && iterations < max_iterations {
            let mut w = op(&basis[k]);
            for (i, v) in basis.iter().enumerate() {
                let hik = dotc(v, &w);
                h[(i, k)] = hik;
                w = w - v * hik;
            }
            let hn = norm(&w);
            h[(k + 1, k)] = Complex64::new(hn, 0.0);
            for i in 0..k {
                let (a, bb) = (h[(i, k)], h[(i + 1, k)]);
                h[(i, k)] = a * cs[i] + sn[i] * bb;
                h[(i + 1, k)] = -sn[i].conj() * a + bb * cs[i];
            }
            let (c, s, rr) = givens(h[(k, k)], h[(k + 1, k)]);
            cs[k] = c;
            sn[k] = s;
            h[(k, k)] = rr;
            h[(k + 1, k)] = zero;
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            iterations += 1;
            k += 1;
            rel = g[k].norm() / nb;
            if rel <= tol || hn == 0.0 {
                break;
            }
            basis.push(w / Complex64::new(hn, 0.0));
        }
        // back substitution on the k × k triangle
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in i + 1..k {
                acc -= h[(i, j)] * y[j];
            }
            y[i] = acc / h[(i, i)];
        }
        for (i, yi) in y.iter().enumerate() {
            x = x + &basis[i] * *yi;
        }
        if rel <= tol {
            let true_rel = norm(&(b - &op(&x))) / nb;
            if true_rel <= 10.0 * tol {
                return GmresOutcome {
                    x,
                    iterations,
                    relative_residual: true_rel,
                    converged: true,
                };
            }
        }
    }
    GmresOutcome {
        x,
        iterations,
        relative_residual: rel,
        converged: false,
    }
}

/// Minimum-norm solution `x = Aᴴ y` with `A Aᴴ y = b`.
pub(super) fn row_space_solve(
    a: &Array2<Complex64>,
    b: &Array1<Complex64>,
    opts: &SolveOptions,
) -> Result<(Array1<Complex64>, SolveDiagnostics), SolveError> {
    let ah = a.t().mapv(|v| v.conj());
    let out = gmres(
        |y| a.dot(&ah.dot(y)),
        b,
        opts.gmres_restart,
        opts.gmres_max_iterations,
        opts.gmres_tolerance,
    );
    if !out.converged {
        return Err(SolveError::NoConvergence {
            iterations: out.iterations,
            residual: out.relative_residual,
        });
    }
    let x = ah.dot(&out.x);
    let (m, n) = a.dim();
    let diag = SolveDiagnostics {
        method: SolveMethod::Iterative,
        equations: m,
        unknowns: n,
        relative_residual: f64::NAN,
        sigma_max: power_sigma_max(a, 50),
        sigma_min: f64::NAN,
        condition_estimate: None,
        rank: None,
        rank_deficient: m != n,
        smallest_singular_values: Vec::new(),
        iterations: Some(out.iterations),
    };
    Ok((x, diag))
}
