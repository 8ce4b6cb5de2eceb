//! Fields from solved currents: near-field evaluation, far-field amplitude,
//! cross sections and the radiation-condition diagnostic.
//!
//! Inside the body `E = curl S_K J`, outside `E = curl S_k j + E0`, with
//! `S_κ J(x) = ∫_S G_κ(x,t) J(t) dt`. Curls are applied to the kernel:
//! `curl S J = ∫ ∇G × J` and `curl curl S J = ∫ (∇∇G) J + κ² ∫ G J`.

mod grid;

pub use grid::DirectionGrid;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kernels::quadrature::{
    integrate_near, integrate_regular, NearFieldPolicy, QuadratureError, QuadratureRule, Triangle,
};
use crate::kernels::{KernelError, KernelParams};
use crate::media::{MediaError, Medium};
use crate::mesh::{SurfaceMesh, TangentFrame};
use crate::operators::CurrentKind;
use crate::solve::{IncidentField, SurfaceCurrents};
use crate::{cdot, cnorm, complexify, rcross, CVec3, Vec3};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error(
        "point is {distance:e} from the surface; use the trace operators for on-surface values"
    )]
    OnSurface { distance: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error("currents have {currents} nodes, mesh has {mesh}")]
    Dimension { currents: usize, mesh: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Interior,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub position: Vec3,
    pub e: CVec3,
    pub h: CVec3,
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOptions {
    pub regular_degree: usize,
    pub near_field: NearFieldPolicy,
    /// Points closer than this fraction of the mean edge are rejected.
    pub surface_tolerance: f64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            regular_degree: 5,
            near_field: NearFieldPolicy::default(),
            surface_tolerance: 1e-9,
        }
    }
}

/// Everything needed to evaluate the representation.
#[derive(Debug, Clone, Copy)]
pub struct Scatterer<'a> {
    pub mesh: &'a SurfaceMesh,
    pub frames: &'a [TangentFrame],
    pub currents: &'a SurfaceCurrents,
    pub medium: &'a Medium,
    pub incident: &'a IncidentField,
}

fn facet(mesh: &SurfaceMesh, i: usize) -> Triangle {
    let [a, b, c] = mesh.corners(i);
    Triangle::new(a, b, c)
}

/// Winding number of the closed surface about `x`: 1 inside, 0 outside.
pub fn winding_number(mesh: &SurfaceMesh, x: &Vec3) -> f64 {
    let mut total = 0.0;
    for i in 0..mesh.len() {
        let [a, b, c] = mesh.corners(i).map(|v| v - x);
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * std::f64::consts::PI)
}

pub fn region_of(mesh: &SurfaceMesh, x: &Vec3) -> Region {
    if winding_number(mesh, x) > 0.5 {
        Region::Interior
    } else {
        Region::Exterior
    }
}

fn distance_to_surface(mesh: &SurfaceMesh, x: &Vec3) -> f64 {
    (0..mesh.len())
        .map(|i| facet(mesh, i).distance_to(x))
        .fold(f64::INFINITY, f64::min)
}

/// Potential integrals of one facet: `∫G`, `∫∇G`, `∫∇∇G`.
type Moments = ((Complex64, CVec3), Matrix3<Complex64>);

impl<'a> Scatterer<'a> {
    fn check(&self) -> Result<(), FieldError> {
        if self.currents.len() != self.mesh.len() {
            return Err(FieldError::Dimension {
                currents: self.currents.len(),
                mesh: self.mesh.len(),
            });
        }
        Ok(())
    }

    fn side(&self, x: &Vec3, opts: &FieldOptions) -> Result<Region, FieldError> {
        let distance = distance_to_surface(self.mesh, x);
        if distance <= opts.surface_tolerance * self.mesh.mean_edge_length() {
            return Err(FieldError::OnSurface { distance });
        }
        Ok(region_of(self.mesh, x))
    }

    fn source(&self, region: Region) -> Result<(KernelParams, CurrentKind), FieldError> {
        let k = self.medium.wavenumbers()?;
        Ok(match region {
            Region::Interior => (KernelParams::new(k.interior)?, CurrentKind::Interior),
            Region::Exterior => (KernelParams::new(k.exterior)?, CurrentKind::Exterior),
        })
    }

    /// `(curl S J, curl curl S J)` at `x` for the current of `region`.
    fn radiated(
        &self,
        x: &Vec3,
        region: Region,
        with_curl: bool,
        opts: &FieldOptions,
    ) -> Result<(CVec3, CVec3), FieldError> {
        let (params, kind) = self.source(region)?;
        let rule = QuadratureRule::regular(opts.regular_degree);
        let currents = self.currents.cartesian(self.frames, kind);
        let kappa2 = params.wavenumber * params.wavenumber;
        let mut e = CVec3::zeros();
        let mut curl = CVec3::zeros();
        for (c, jc) in currents.iter().enumerate() {
            if jc.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let tri = facet(self.mesh, c);
            if with_curl {
                let ((g, grad), hess): Moments = integrate_near(
                    |t: &Vec3| {
                        let d = x - t;
                        let (g, grad) = params.value_and_gradient(&d);
                        ((g, grad), params.hessian(&d))
                    },
                    &tri,
                    x,
                    &rule,
                    &opts.near_field,
                )?;
                e += grad.cross(jc);
                curl += hess * jc + jc * (g * kappa2);
            } else {
                let grad: CVec3 = integrate_near(
                    |t: &Vec3| params.gradient(&(x - t)),
                    &tri,
                    x,
                    &rule,
                    &opts.near_field,
                )?;
                e += grad.cross(jc);
            }
        }
        Ok((e, curl))
    }

    /// Total electric field.
    pub fn evaluate_e(&self, x: &Vec3, opts: &FieldOptions) -> Result<(CVec3, Region), FieldError> {
        self.check()?;
        let region = self.side(x, opts)?;
        let (mut e, _) = self.radiated(x, region, false, opts)?;
        if region == Region::Exterior {
            e += self.incident.e(x);
        }
        Ok((e, region))
    }

    /// Total `E` and `H = curl E / (iωμ0)`.
    pub fn evaluate(&self, x: &Vec3, opts: &FieldOptions) -> Result<FieldSample, FieldError> {
        self.check()?;
        let region = self.side(x, opts)?;
        let (mut e, mut curl) = self.radiated(x, region, true, opts)?;
        if region == Region::Exterior {
            e += self.incident.e(x);
            curl += self.incident.curl_e(x);
        }
        let h = curl / Complex64::new(0.0, self.medium.omega * self.medium.mu0);
        Ok(FieldSample {
            position: *x,
            e,
            h,
            region,
        })
    }

    pub fn evaluate_h(&self, x: &Vec3, opts: &FieldOptions) -> Result<CVec3, FieldError> {
        Ok(self.evaluate(x, opts)?.h)
    }

    /// Scattered field `V = E − E0` at an exterior point.
    pub fn scattered_e(&self, x: &Vec3, opts: &FieldOptions) -> Result<CVec3, FieldError> {
        self.check()?;
        Ok(self.radiated(x, Region::Exterior, false, opts)?.0)
    }

    pub fn evaluate_many(
        &self,
        points: &[Vec3],
        opts: &FieldOptions,
    ) -> Result<Vec<FieldSample>, FieldError> {
        points.par_iter().map(|x| self.evaluate(x, opts)).collect()
    }

    /// `A(β) = (ik/4π) ∫ e^{−ikβ·t} β × j(t) dt`, so that
    /// `E − E0 ≈ A(β) e^{ikr}/r` far away.
    pub fn amplitude(&self, beta: &Vec3, opts: &FieldOptions) -> Result<CVec3, FieldError> {
        self.check()?;
        let k = self.medium.wavenumbers()?.exterior;
        let rule = QuadratureRule::regular(opts.regular_degree);
        let currents = self.currents.cartesian(self.frames, CurrentKind::Exterior);
        let mut sum = CVec3::zeros();
        for (c, jc) in currents.iter().enumerate() {
            let phase: Complex64 = integrate_regular(
                |t: &Vec3| (-Complex64::i() * k * beta.dot(t)).exp(),
                &facet(self.mesh, c),
                &rule,
            )?;
            sum += rcross(beta, jc) * phase;
        }
        Ok(sum * (Complex64::i() * k / (4.0 * std::f64::consts::PI)))
    }

    pub fn far_field(
        &self,
        grid: &DirectionGrid,
        opts: &FieldOptions,
    ) -> Result<FarField, FieldError> {
        let amplitudes: Vec<CVec3> = grid
            .directions
            .par_iter()
            .map(|b| self.amplitude(b, opts))
            .collect::<Result<_, _>>()?;
        let e0 = self.incident.amplitude.norm_sqr();
        let dsigma: Vec<f64> = amplitudes.iter().map(|a| cnorm(a).powi(2) / e0).collect();
        let sigma_scattering = dsigma.iter().zip(&grid.weights).map(|(d, w)| d * w).sum();
        let forward = self.amplitude(&self.incident.direction, opts)?;
        let k = self.incident.wavenumber;
        let pol = complexify(&self.incident.polarization) * self.incident.amplitude.conj();
        let sigma_extinction = 4.0 * std::f64::consts::PI / k * forward.dot(&pol).im / e0;
        Ok(FarField {
            directions: grid.directions.clone(),
            weights: grid.weights.clone(),
            amplitudes,
            dsigma_domega: dsigma,
            sigma_scattering,
            sigma_extinction,
        })
    }

    /// Absorbed power over incident intensity, from the inward Poynting
    /// flux of the total field through a sphere of `radius` about the origin
    /// (`n_theta` Gauss points in `cos θ`, `2 n_theta` trapezoid points in φ).
    pub fn absorption_cross_section(
        &self,
        radius: f64,
        n_theta: usize,
        opts: &FieldOptions,
    ) -> Result<f64, FieldError> {
        let gl = crate::kernels::quadrature::gauss_legendre(n_theta);
        let n_phi = 2 * n_theta;
        let points: Vec<(Vec3, f64)> = gl
            .iter()
            .flat_map(|&(u, w)| {
                let ct = 2.0 * u - 1.0;
                let st = (1.0 - ct * ct).sqrt();
                (0..n_phi).map(move |p| {
                    let ph = 2.0 * std::f64::consts::PI * p as f64 / n_phi as f64;
                    let n = Vec3::new(st * ph.cos(), st * ph.sin(), ct);
                    (n, 2.0 * w * 2.0 * std::f64::consts::PI / n_phi as f64)
                })
            })
            .collect();
        let flux: f64 = points
            .par_iter()
            .map(|(n, w)| {
                let s = self.evaluate(&(n * radius), opts)?;
                let poynting = s.e.cross(&s.h.map(|v| v.conj()));
                Ok(cdot(&poynting, n).re * w * radius * radius)
            })
            .collect::<Result<Vec<f64>, FieldError>>()?
            .into_iter()
            .sum();
        let m = self.medium;
        let intensity =
            self.incident.wavenumber / (m.omega * m.mu0) * self.incident.amplitude.norm_sqr();
        Ok(-flux / intensity)
    }

    /// `max_β r·|∂V/∂r − ikV|` at each radius, with a fourth-order central
    /// difference in `r`.
    pub fn radiation_residual(
        &self,
        radii: &[f64],
        directions: &[Vec3],
        opts: &FieldOptions,
    ) -> Result<Vec<f64>, FieldError> {
        let k = self.medium.wavenumbers()?.exterior;
        radii
            .iter()
            .map(|&r| {
                let h = (0.05 / k.norm()).min(0.01 * r);
                directions
                    .par_iter()
                    .map(|b| {
                        let v = |s: f64| self.scattered_e(&(b * (r + s * h)), opts);
                        let (m2, m1, p1, p2) = (v(-2.0)?, v(-1.0)?, v(1.0)?, v(2.0)?);
                        let dv = (m2 - p2 + (p1 - m1) * Complex64::new(8.0, 0.0))
                            / Complex64::new(12.0 * h, 0.0);
                        let v0 = v(0.0)?;
                        Ok(r * cnorm(&(dv - v0 * (Complex64::i() * k))))
                    })
                    .collect::<Result<Vec<f64>, FieldError>>()
                    .map(|vals| vals.into_iter().fold(0.0, f64::max))
            })
            .collect()
    }
}

/// Scattering amplitude on a direction grid with derived cross sections.
#[derive(Debug, Clone, PartialEq)]
pub struct FarField {
    pub directions: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub amplitudes: Vec<CVec3>,
    /// `|A|² / |E0|²`.
    pub dsigma_domega: Vec<f64>,
    pub sigma_scattering: f64,
    /// From the forward amplitude (optical theorem).
    pub sigma_extinction: f64,
}

impl FarField {
    /// `max |A·β| / |A|` over directions with nonzero amplitude.
    pub fn transversality(&self) -> f64 {
        self.directions
            .iter()
            .zip(&self.amplitudes)
            .filter(|(_, a)| cnorm(a) > 0.0)
            .map(|(b, a)| cdot(a, b).norm() / cnorm(a))
            .fold(0.0, f64::max)
    }
}
