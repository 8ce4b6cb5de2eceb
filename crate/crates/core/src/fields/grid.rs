//! Direction grids on the unit sphere.

use crate::mesh::make_unit_sphere;
use crate::Vec3;

/// Cells of a refined icosahedron projected to the sphere. Each direction is
/// the normalized cell centroid and its weight the cell's solid angle, so
/// the weights sum to 4π.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid {
    pub directions: Vec<Vec3>,
    pub weights: Vec<f64>,
}

/// Solid angle of the spherical triangle with unit corners `a, b, c`.
fn solid_angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = a.dot(&b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den).abs()
}

impl DirectionGrid {
    /// `count` must be `20·4^L` for `L ≤ 6`.
    pub fn icosahedral(count: usize) -> Option<Self> {
        let level = (0..=6).find(|&l| 20 * 4usize.pow(l as u32) == count)?;
        let mesh = make_unit_sphere(level).ok()?;
        let (directions, weights) = (0..mesh.len())
            .map(|i| {
                let [a, b, c] = mesh.corners(i);
                (mesh.centroid(i).normalize(), solid_angle(&a, &b, &c))
            })
            .unzip();
        Some(Self {
            directions,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}
