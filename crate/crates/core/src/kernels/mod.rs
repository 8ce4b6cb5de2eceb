//! Helmholtz Green's function `e^{iκr}/(4πr)`, its derivatives, the split
//! into a static singular part plus a smooth remainder, and the quadrature
//! rules that integrate these kernels over flat triangles.

pub mod quadrature;

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;
use thiserror::Error;

use crate::{complexify, CVec3, Vec3};

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel evaluated at coincident points")]
    Coincident,
    #[error("wavenumber {0} has negative imaginary part")]
    GrowingBranch(Complex64),
}

/// Wavenumber of the medium the kernel propagates in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub wavenumber: Complex64,
}

impl KernelParams {
    pub fn new(wavenumber: Complex64) -> Result<Self, KernelError> {
        if wavenumber.im < 0.0 {
            return Err(KernelError::GrowingBranch(wavenumber));
        }
        Ok(Self { wavenumber })
    }

    pub fn real(k: f64) -> Self {
        Self {
            wavenumber: Complex64::new(k, 0.0),
        }
    }

    /// `G(r)` for `r > 0`.
    #[inline]
    pub fn value(&self, r: f64) -> Complex64 {
        (Complex64::i() * self.wavenumber * r).exp() / (FOUR_PI * r)
    }

    /// `G'(r) = (iκr − 1) e^{iκr} / (4πr²)`.
    #[inline]
    pub fn radial_derivative(&self, r: f64) -> Complex64 {
        let ikr = Complex64::i() * self.wavenumber * r;
        (ikr - 1.0) * ikr.exp() / (FOUR_PI * r * r)
    }

    /// `∇_x G(x, y)` from the separation `d = x − y` (`d ≠ 0`).
    #[inline]
    pub fn gradient(&self, d: &Vec3) -> CVec3 {
        let r = d.norm();
        complexify(d) * (self.radial_derivative(r) / r)
    }

    /// Value and gradient in one pass.
    #[inline]
    pub fn value_and_gradient(&self, d: &Vec3) -> (Complex64, CVec3) {
        let r = d.norm();
        let ikr = Complex64::i() * self.wavenumber * r;
        let g = ikr.exp() / (FOUR_PI * r);
        (g, complexify(d) * (g * (ikr - 1.0) / (r * r)))
    }

    /// Hessian `∂_i ∂_j G` in `x` from `d = x − y`.
    pub fn hessian(&self, d: &Vec3) -> Matrix3<Complex64> {
        let r = d.norm();
        let ikr = Complex64::i() * self.wavenumber * r;
        let e = ikr.exp() / FOUR_PI;
        let g1_over_r = e * (ikr - 1.0) / (r * r * r);
        let g2 = e * (2.0 - 2.0 * ikr + ikr * ikr) / (r * r * r);
        let u = d / r;
        Matrix3::from_fn(|i, j| {
            let uu = u[i] * u[j];
            let delta = if i == j { 1.0 } else { 0.0 };
            g2 * uu + g1_over_r * (delta - uu)
        })
    }
}

/// `g(x, y) = e^{iκ|x−y|} / (4π|x−y|)`.
pub fn green(x: &Vec3, y: &Vec3, p: &KernelParams) -> Result<Complex64, KernelError> {
    let r = (x - y).norm();
    if r == 0.0 {
        return Err(KernelError::Coincident);
    }
    Ok(p.value(r))
}

/// `∇_x g(x, y) = g · (iκ − 1/r) · (x − y)/r`.
pub fn grad_green(x: &Vec3, y: &Vec3, p: &KernelParams) -> Result<CVec3, KernelError> {
    let d = x - y;
    if d.norm() == 0.0 {
        return Err(KernelError::Coincident);
    }
    Ok(p.gradient(&d))
}

/// `∇_y g(x, y)`.
pub fn grad_green_source(x: &Vec3, y: &Vec3, p: &KernelParams) -> Result<CVec3, KernelError> {
    grad_green(x, y, p).map(|g| -g)
}

/// `g = 1/(4πr) + s(r)` and the matching split of `∇g` into the static
/// `−(x−y)/(4πr³)` and a remainder bounded as `r → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularSplit {
    pub params: KernelParams,
}

pub fn singular_split(p: &KernelParams) -> SingularSplit {
    SingularSplit { params: *p }
}

impl SingularSplit {
    pub fn static_value(r: f64) -> f64 {
        1.0 / (FOUR_PI * r)
    }

    /// `∇_x (1/(4πr))` from `d = x − y`.
    pub fn static_gradient(d: &Vec3) -> Vec3 {
        let r = d.norm();
        -d / (FOUR_PI * r * r * r)
    }

    /// `s(r) = (e^{iκr} − 1)/(4πr)`, `s(0) = iκ/(4π)`.
    pub fn remainder(&self, r: f64) -> Complex64 {
        let k = self.params.wavenumber;
        if r == 0.0 {
            return Complex64::i() * k / FOUR_PI;
        }
        expm1(Complex64::i() * k * r) / (FOUR_PI * r)
    }

    /// `∇g − ∇(1/4πr) = (d/r) [(iκr − 1)e^{iκr} + 1] / (4πr²)`; zero at `d = 0`.
    pub fn remainder_gradient(&self, d: &Vec3) -> CVec3 {
        let r = d.norm();
        if r == 0.0 {
            return CVec3::zeros();
        }
        let z = Complex64::i() * self.params.wavenumber * r;
        let numerator = if z.norm() < 0.5 {
            // (z − 1)e^z + 1 = Σ_{n≥2} (n − 1) zⁿ / n!
            let mut term = z; // zⁿ/n! at n = 1
            let mut sum = Complex64::new(0.0, 0.0);
            for n in 2..40 {
                term = term * z / n as f64;
                let add = term * (n - 1) as f64;
                sum += add;
                if add.norm() < 1e-18 * sum.norm() {
                    break;
                }
            }
            sum
        } else {
            (z - 1.0) * z.exp() + 1.0
        };
        complexify(d) * (numerator / (FOUR_PI * r * r * r))
    }
}

/// `e^z − 1` without cancellation for small `|z|`.
pub fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * half * half, x.exp() * y.sin())
}
