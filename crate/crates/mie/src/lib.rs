//! Mie series for plane-wave scattering by a homogeneous, possibly lossy
//! sphere, in the Bohren–Huffman formulation (`e^{−iωt}` time dependence).
//!
//! This crate is deliberately self-contained: it shares no kernels, special
//! functions or geometry with the boundary-integral solver it is used to
//! check.

use num_complex::Complex64;
use std::f64::consts::PI;

type C = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum MieError {
    InvalidInput(String),
    /// `|m|·ka` too large for the recurrences in double precision.
    Overflow {
        size: f64,
    },
}

impl std::fmt::Display for MieError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MieError::InvalidInput(s) => write!(f, "invalid Mie input: {s}"),
            MieError::Overflow { size } => write!(f, "Mie recurrence overflow at |m|ka = {size}"),
        }
    }
}

impl std::error::Error for MieError {}

/// Sphere material and background. The background is lossless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MieMedium {
    pub epsilon_interior: f64,
    pub epsilon_exterior: f64,
    pub sigma: f64,
    pub mu0: f64,
    pub omega: f64,
}

impl MieMedium {
    /// Background wavenumber `ω √(ε0 μ0)`.
    pub fn k(&self) -> f64 {
        self.omega * (self.epsilon_exterior * self.mu0).sqrt()
    }

    /// `m = √((ε + iσ/ω) / ε0)` on the branch with `Im m ≥ 0`.
    pub fn relative_index(&self) -> C {
        let ratio = C::new(self.epsilon_interior, self.sigma / self.omega) / self.epsilon_exterior;
        // polar form, half angle; the argument of ratio lies in [0, π)
        let (r, theta) = ratio.to_polar();
        C::from_polar(r.sqrt(), 0.5 * theta)
    }

    fn check(&self) -> Result<(), MieError> {
        let ok = [
            self.epsilon_interior,
            self.epsilon_exterior,
            self.mu0,
            self.omega,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite())
            && self.sigma >= 0.0
            && self.sigma.is_finite();
        if ok {
            Ok(())
        } else {
            Err(MieError::InvalidInput(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MieSolution {
    pub radius: f64,
    pub k: f64,
    pub size_parameter: f64,
    pub relative_index: C,
    /// `a[n-1] = a_n`, `n = 1..=L`.
    pub a: Vec<C>,
    pub b: Vec<C>,
    pub sigma_scattering: f64,
    pub sigma_extinction: f64,
    pub sigma_absorption: f64,
}

impl MieSolution {
    pub fn truncation(&self) -> usize {
        self.a.len()
    }
}

/// Wiscombe's rule, raised to at least `ka + 10`.
pub fn default_truncation(x: f64) -> usize {
    let wiscombe = x + 4.0 * x.cbrt() + 2.0;
    wiscombe.max(x + 10.0).ceil() as usize
}

const DECAY: f64 = 1e-12;
const MAX_ORDER: usize = 5000;
const ROUNDOFF: f64 = 1e-15;

pub fn mie_solve(
    radius: f64,
    medium: &MieMedium,
    truncation: Option<usize>,
) -> Result<MieSolution, MieError> {
    medium.check()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MieError::InvalidInput(format!("radius {radius}")));
    }
    let k = medium.k();
    mie_coefficients(radius, k, medium.relative_index(), truncation)
}

/// Mie coefficients for size parameter `ka` and relative index `m`. With no
/// explicit truncation the order grows from the default until the last
/// coefficients fall below `1e−12` of the largest.
pub fn mie_coefficients(
    radius: f64,
    k: f64,
    m: C,
    truncation: Option<usize>,
) -> Result<MieSolution, MieError> {
    let x = k * radius;
    if !(x > 0.0 && x.is_finite()) || !(m.re.is_finite() && m.im.is_finite()) || m.im < 0.0 {
        return Err(MieError::InvalidInput(format!("x = {x}, m = {m}")));
    }
    if (m * x).norm() > 1e4 {
        return Err(MieError::Overflow {
            size: (m * x).norm(),
        });
    }
    let (a, b) = match truncation {
        Some(l) => coefficients(x, m, l.max(1))?,
        None => {
            let first = default_truncation(x);
            let mut l = first;
            loop {
                let (a, b) = coefficients(x, m, l)?;
                let max = a.iter().chain(&b).map(|c| c.norm()).fold(0.0, f64::max);
                let last = a[l - 1].norm().max(b[l - 1].norm());
                // beyond ~2x the default, upward ψ recurrence loses accuracy
                if last <= DECAY * max || last <= ROUNDOFF || l >= (2 * first + 20).min(MAX_ORDER) {
                    break (a, b);
                }
                l += 5;
            }
        }
    };
    let (mut qs, mut qe) = (0.0, 0.0);
    for n in 1..=a.len() {
        let (an, bn) = (a[n - 1], b[n - 1]);
        let w = (2 * n + 1) as f64;
        qs += w * (an.norm_sqr() + bn.norm_sqr());
        qe += w * (an + bn).re;
    }
    let geometric = PI * radius * radius;
    let scale = 2.0 / (x * x) * geometric;
    let (sigma_s, sigma_e) = (qs * scale, qe * scale);
    Ok(MieSolution {
        radius,
        k,
        size_parameter: x,
        relative_index: m,
        a,
        b,
        sigma_scattering: sigma_s,
        sigma_extinction: sigma_e,
        sigma_absorption: sigma_e - sigma_s,
    })
}

fn coefficients(x: f64, m: C, order: usize) -> Result<(Vec<C>, Vec<C>), MieError> {
    let mx = m * x;
    // logarithmic derivative D_n(mx) by downward recurrence
    let start = (order as f64).max(mx.norm()).ceil() as usize + 16;
    let mut d = vec![C::new(0.0, 0.0); start + 1];
    for n in (1..=start).rev() {
        let nf = n as f64 / mx;
        d[n - 1] = nf - 1.0 / (d[n] + nf);
    }
    // Riccati–Bessel ψ_n(x) and χ_n(x) by upward recurrence
    let (mut psi0, mut psi1) = (x.cos(), x.sin());
    let (mut chi0, mut chi1) = (-x.sin(), x.cos());
    let mut xi1 = C::new(psi1, -chi1);
    let mut a = Vec::with_capacity(order);
    let mut b = Vec::with_capacity(order);
    for n in 1..=order {
        let f = (2 * n - 1) as f64 / x;
        let psi = f * psi1 - psi0;
        let chi = f * chi1 - chi0;
        let xi = C::new(psi, -chi);
        let nx = n as f64 / x;
        let da = d[n] / m + nx;
        let db = d[n] * m + nx;
        let an = (da * psi - psi1) / (da * xi - xi1);
        let bn = (db * psi - psi1) / (db * xi - xi1);
        if !(an.re.is_finite() && an.im.is_finite() && bn.re.is_finite() && bn.im.is_finite()) {
            return Err(MieError::Overflow { size: mx.norm() });
        }
        a.push(an);
        b.push(bn);
        psi0 = psi1;
        psi1 = psi;
        chi0 = chi1;
        chi1 = chi;
        xi1 = C::new(psi1, -chi1);
    }
    Ok((a, b))
}

/// Amplitude functions `S1(θ)`, `S2(θ)`.
pub fn amplitude_functions(sol: &MieSolution, cos_theta: f64) -> (C, C) {
    let mu = cos_theta;
    let (mut pi_prev, mut pi) = (0.0, 1.0);
    let mut s1 = C::new(0.0, 0.0);
    let mut s2 = C::new(0.0, 0.0);
    for n in 1..=sol.a.len() {
        let nf = n as f64;
        let tau = nf * mu * pi - (nf + 1.0) * pi_prev;
        let w = (2.0 * nf + 1.0) / (nf * (nf + 1.0));
        let (an, bn) = (sol.a[n - 1], sol.b[n - 1]);
        s1 += (an * pi + bn * tau) * w;
        s2 += (an * tau + bn * pi) * w;
        let next = ((2.0 * nf + 1.0) * mu * pi - (nf + 1.0) * pi_prev) / nf;
        pi_prev = pi;
        pi = next;
    }
    (s1, s2)
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Plane wave `amplitude · pol · e^{ik dir·x}` hitting the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MieIncidence {
    pub polarization: [f64; 3],
    pub direction: [f64; 3],
    pub amplitude: C,
}

/// Scattering amplitude `A(β)` with `E_s ≈ A e^{ikr}/r`, in global
/// coordinates, for each unit direction.
pub fn mie_far_field(
    sol: &MieSolution,
    inc: &MieIncidence,
    directions: &[[f64; 3]],
) -> Vec<[C; 3]> {
    let ex = inc.polarization;
    let ez = inc.direction;
    let ey = cross(&ez, &ex);
    let pref = C::new(0.0, 1.0 / sol.k) * inc.amplitude;
    directions
        .iter()
        .map(|beta| {
            let (bx, by, bz) = (dot(beta, &ex), dot(beta, &ey), dot(beta, &ez));
            let st = bx.hypot(by);
            let (cp, sp) = if st > 0.0 {
                (bx / st, by / st)
            } else {
                (1.0, 0.0)
            };
            let ct = bz;
            let (s1, s2) = amplitude_functions(sol, ct);
            let theta_hat = [ct * cp, ct * sp, -st];
            let phi_hat = [-sp, cp, 0.0];
            let mut out = [C::new(0.0, 0.0); 3];
            for i in 0..3 {
                let th = theta_hat[0] * ex[i] + theta_hat[1] * ey[i] + theta_hat[2] * ez[i];
                let ph = phi_hat[0] * ex[i] + phi_hat[1] * ey[i];
                out[i] = pref * (s2 * (cp * th) - s1 * (sp * ph));
            }
            out
        })
        .collect()
}

/// Small-sphere limit `σ_s / (πa²) = (8/3) x⁴ |(m² − 1)/(m² + 2)|²`.
pub fn rayleigh_efficiency(x: f64, m: C) -> f64 {
    let m2 = m * m;
    8.0 / 3.0 * x.powi(4) * ((m2 - 1.0) / (m2 + 2.0)).norm_sqr()
}
