//! Boundary integral solver for time-harmonic electromagnetic scattering by a
//! bounded homogeneous (possibly lossy) body.
//!
//! The field is represented by two tangential surface currents: an interior
//! current `J` radiating with the interior wavenumber `K` and an exterior
//! current `j` radiating with the exterior wavenumber `k`,
//!
//! ```text
//! E = curl ∫_S G(x,t) J(t) dt            x inside
//! E = curl ∫_S g(x,t) j(t) dt + E0(x)    x outside
//! ```
//!
//! and the currents are fixed by continuity of the tangential electric field
//! and of the normal electric flux density across the surface. The surface is
//! a flat-facet triangulation collocated at the triangle centroids.

pub mod fields;
pub mod kernels;
pub mod media;
pub mod mesh;
pub mod operators;
pub mod solve;

pub use num_complex::Complex64;

/// Real 3-vector (points, normals, directions).
pub type Vec3 = nalgebra::Vector3<f64>;

/// Complex 3-vector (field values, kernel gradients).
pub type CVec3 = nalgebra::Vector3<Complex64>;

/// Promote a real vector to a complex one.
#[inline]
pub fn complexify(v: &Vec3) -> CVec3 {
    CVec3::new(v.x.into(), v.y.into(), v.z.into())
}

/// Unconjugated dot product of a complex and a real vector.
#[inline]
pub fn cdot(a: &CVec3, b: &Vec3) -> Complex64 {
    a.x * b.x + a.y * b.y + a.z * b.z
}

/// Cross product of a complex vector with a real vector.
#[inline]
pub fn ccross(a: &CVec3, b: &Vec3) -> CVec3 {
    CVec3::new(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )
}

/// Cross product of a real vector with a complex vector.
#[inline]
pub fn rcross(a: &Vec3, b: &CVec3) -> CVec3 {
    CVec3::new(
        b.z * a.y - b.y * a.z,
        b.x * a.z - b.z * a.x,
        b.y * a.x - b.x * a.y,
    )
}

/// Euclidean norm of a complex vector.
#[inline]
pub fn cnorm(v: &CVec3) -> f64 {
    (v.x.norm_sqr() + v.y.norm_sqr() + v.z.norm_sqr()).sqrt()
}
