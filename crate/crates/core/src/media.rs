//! Material parameters and wavenumbers.
//!
//! The exterior is lossless with permittivity `ε0`; the body has permittivity
//! `ε` and conductivity `σ`, which enter through the effective permittivity
//! `ε' = ε + iσ/ω`. The permeability `μ0` is the same on both sides.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MediaError {
    #[error("{field} must be positive and finite, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("sigma must be non-negative and finite, got {0}")]
    NegativeConductivity(f64),
}

/// Homogeneous body in a homogeneous lossless background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub epsilon_interior: f64,
    pub epsilon_exterior: f64,
    pub sigma: f64,
    pub mu0: f64,
    pub omega: f64,
}

/// Exterior wavenumber `k` and interior wavenumber `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveNumbers {
    pub exterior: Complex64,
    pub interior: Complex64,
}

impl Medium {
    pub fn new(
        epsilon_interior: f64,
        epsilon_exterior: f64,
        sigma: f64,
        mu0: f64,
        omega: f64,
    ) -> Result<Self, MediaError> {
        let m = Self {
            epsilon_interior,
            epsilon_exterior,
            sigma,
            mu0,
            omega,
        };
        m.validate()?;
        Ok(m)
    }

    /// Vacuum-like unit background (`ε0 = μ0 = 1`) so that `k = ω`.
    pub fn natural(epsilon_interior: f64, sigma: f64, omega: f64) -> Result<Self, MediaError> {
        Self::new(epsilon_interior, 1.0, sigma, 1.0, omega)
    }

    pub fn validate(&self) -> Result<(), MediaError> {
        for (field, value) in [
            ("omega", self.omega),
            ("mu0", self.mu0),
            ("epsilon_interior", self.epsilon_interior),
            ("epsilon_exterior", self.epsilon_exterior),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(MediaError::NotPositive { field, value });
            }
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(MediaError::NegativeConductivity(self.sigma));
        }
        Ok(())
    }

    pub fn is_lossless(&self) -> bool {
        self.sigma == 0.0
    }

    /// `ε' = ε + iσ/ω` inside the body.
    pub fn effective_permittivity(&self) -> Result<Complex64, MediaError> {
        self.validate()?;
        Ok(Complex64::new(
            self.epsilon_interior,
            self.sigma / self.omega,
        ))
    }

    pub fn wavenumbers(&self) -> Result<WaveNumbers, MediaError> {
        let eps = self.effective_permittivity()?;
        let w2mu = self.omega * self.omega * self.mu0;
        let exterior = (w2mu * self.epsilon_exterior).sqrt();
        let interior = principal_sqrt(eps * w2mu);
        Ok(WaveNumbers {
            exterior: Complex64::new(exterior, 0.0),
            interior,
        })
    }
}

/// Free-function form of [`Medium::effective_permittivity`].
pub fn effective_permittivity(m: &Medium) -> Result<Complex64, MediaError> {
    m.effective_permittivity()
}

/// Free-function form of [`Medium::wavenumbers`].
pub fn wavenumbers(m: &Medium) -> Result<WaveNumbers, MediaError> {
    m.wavenumbers()
}

/// Principal square root, `Re ≥ 0`, and `Im ≥ 0` whenever `Im z ≥ 0`.
///
/// Uses the half-sum formula on `|z|` rather than the polar form so that
/// both components keep full relative accuracy.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    if a == 0.0 && b == 0.0 {
        return Complex64::new(0.0, b);
    }
    let modulus = a.hypot(b);
    if a >= 0.0 {
        let t = ((modulus + a) * 0.5).sqrt();
        Complex64::new(t, b / (2.0 * t))
    } else {
        let t = ((modulus - a) * 0.5).sqrt();
        Complex64::new(b.abs() / (2.0 * t), t.copysign(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn effective_permittivity_examples() {
        let m = Medium::natural(1.0, 0.0, 1.0).unwrap();
        assert_eq!(
            m.effective_permittivity().unwrap(),
            Complex64::new(1.0, 0.0)
        );
        let m = Medium::natural(2.0, 3.0, 1.5).unwrap();
        assert_eq!(
            m.effective_permittivity().unwrap(),
            Complex64::new(2.0, 2.0)
        );
        let m = Medium::natural(4.0, 1.0, 2.0).unwrap();
        assert_eq!(
            m.effective_permittivity().unwrap(),
            Complex64::new(4.0, 0.5)
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            Medium::natural(1.0, 0.0, 0.0),
            Err(MediaError::NotPositive { field: "omega", .. })
        ));
        assert!(matches!(
            Medium::natural(1.0, 0.0, -1.0),
            Err(MediaError::NotPositive { field: "omega", .. })
        ));
        assert!(matches!(
            Medium::natural(1.0, -0.1, 1.0),
            Err(MediaError::NegativeConductivity(_))
        ));
        assert!(Medium::new(1.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Medium::new(0.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(Medium::new(1.0, f64::NAN, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn wavenumber_examples() {
        let w = Medium::natural(1.0, 0.0, 1.0)
            .unwrap()
            .wavenumbers()
            .unwrap();
        assert_eq!(w.exterior, Complex64::new(1.0, 0.0));
        assert_eq!(w.interior, Complex64::new(1.0, 0.0));

        let w = Medium::natural(4.0, 0.0, 1.0)
            .unwrap()
            .wavenumbers()
            .unwrap();
        assert_eq!(w.interior, Complex64::new(2.0, 0.0));

        // sqrt(1+i): modulus 2^(1/4), half-angle pi/8.
        let r = 2f64.powf(0.25);
        let half = std::f64::consts::PI / 8.0;
        let oracle = Complex64::new(r * half.cos(), r * half.sin());
        assert!(close(oracle, Complex64::new(1.098684, 0.455090), 1e-6));
        let w = Medium::natural(1.0, 1.0, 1.0)
            .unwrap()
            .wavenumbers()
            .unwrap();
        assert!(close(w.interior, oracle, 1e-15));
    }

    #[test]
    fn sqrt_branch_on_negative_axis() {
        let s = principal_sqrt(Complex64::new(-4.0, 0.0));
        assert_eq!(s, Complex64::new(0.0, 2.0));
        let s = principal_sqrt(Complex64::new(-4.0, 1e-300));
        assert!(s.im > 0.0);
    }

    fn medium() -> impl Strategy<Value = Medium> {
        (
            1e-3..1e3f64,
            1e-3..1e3f64,
            0.0..1e3f64,
            1e-3..1e3f64,
            1e-3..1e3f64,
        )
            .prop_map(|(ei, ee, s, mu, w)| Medium::new(ei, ee, s, mu, w).unwrap())
    }

    proptest! {
        #[test]
        fn squares_reproduce_dispersion_relation(m in medium()) {
            let w = m.wavenumbers().unwrap();
            let eps = m.effective_permittivity().unwrap();
            let target_int = eps * (m.omega * m.omega * m.mu0);
            let target_ext = m.omega * m.omega * m.mu0 * m.epsilon_exterior;
            let ulp = f64::EPSILON;
            prop_assert!((w.interior * w.interior - target_int).norm() <= 4.0 * ulp * target_int.norm());
            prop_assert!((w.exterior * w.exterior - target_ext).norm() <= 4.0 * ulp * target_ext);
            prop_assert!(w.interior.im >= 0.0);
            prop_assert_eq!(w.exterior.im, 0.0);
            if m.sigma == 0.0 {
                prop_assert_eq!(w.interior.im, 0.0);
            }
        }

        #[test]
        fn conductivity_increases_decay(m in medium(), extra in 1e-3..10.0f64) {
            let mut lossier = m;
            lossier.sigma = m.sigma + extra * (1.0 + m.sigma);
            let a = m.wavenumbers().unwrap().interior.im;
            let b = lossier.wavenumbers().unwrap().interior.im;
            prop_assert!(b > a);
        }
    }
}
