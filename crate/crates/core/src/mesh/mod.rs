//! Closed flat-facet triangulations of the scatterer surface.
//!
//! One collocation node per triangle, located at the centroid. Each node
//! carries an orthonormal frame `(t1, t2, N)` in which tangential currents are
//! expressed by two complex coefficients.

mod io;

pub use io::{load_mesh, parse_msh_v2, parse_obj, MeshFormat};

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("open surface: edge ({0}, {1}) belongs to a single triangle")]
    OpenSurface(usize, usize),
    #[error("non-manifold edge ({0}, {1}) shared by {2} triangles")]
    NonManifold(usize, usize, usize),
    #[error("inconsistent winding across edge ({0}, {1})")]
    InconsistentOrientation(usize, usize),
    #[error("degenerate triangle {index} (area {area:e})")]
    Degenerate { index: usize, area: f64 },
    #[error("triangle {0} references a missing vertex")]
    BadIndex(usize),
    #[error("mesh has no triangles")]
    Empty,
    #[error("subdivision level {0} out of range 0..=6")]
    LevelOutOfRange(usize),
    #[error("io error: {0}")]
    Io(String),
}

/// Triangulated surface with per-triangle geometry.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    centroids: Vec<Vec3>,
    areas: Vec<f64>,
    normals: Vec<Vec3>,
    closed: bool,
}

/// Analytic surface onto which refined vertices are projected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Sphere { center: Vec3, radius: f64 },
}

impl Projection {
    pub fn unit_sphere() -> Self {
        Projection::Sphere {
            center: Vec3::zeros(),
            radius: 1.0,
        }
    }

    pub fn project(&self, p: &Vec3) -> Vec3 {
        match *self {
            Projection::Sphere { center, radius } => center + (p - center).normalize() * radius,
        }
    }
}

/// Summary written to run reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshStats {
    pub triangles: usize,
    pub vertices: usize,
    pub total_area: f64,
    pub closedness_residual: f64,
    pub mean_edge_length: f64,
}

impl SurfaceMesh {
    /// Build a closed mesh. Rejects open, non-manifold, inconsistently wound
    /// or degenerate input, and flips a consistently inward-wound surface.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        check_indices(&vertices, &triangles)?;
        check_closed_manifold(&triangles)?;
        let mut mesh = Self::build(vertices, triangles, true)?;
        if mesh.signed_volume() < 0.0 {
            let flipped = mesh.triangles.iter().map(|&[a, b, c]| [a, c, b]).collect();
            mesh = Self::build(mesh.vertices, flipped, true)?;
        }
        Ok(mesh)
    }

    /// Build an open patch (operator-level test harnesses only). Orientation
    /// is taken as given.
    pub fn new_open(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        check_indices(&vertices, &triangles)?;
        Self::build(vertices, triangles, false)
    }

    fn build(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        closed: bool,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let n = triangles.len();
        let mut centroids = Vec::with_capacity(n);
        let mut areas = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        for t in &triangles {
            let [a, b, c] = t.map(|i| vertices[i]);
            let cross = (b - a).cross(&(c - a));
            let area = 0.5 * cross.norm();
            centroids.push((a + b + c) / 3.0);
            areas.push(area);
            normals.push(if area > 0.0 {
                cross / (2.0 * area)
            } else {
                Vec3::zeros()
            });
        }
        let mean = areas.iter().sum::<f64>() / n as f64;
        if let Some((index, &area)) = areas
            .iter()
            .enumerate()
            .find(|(_, &a)| !(a > 1e-14 * mean) || !a.is_finite())
        {
            return Err(MeshError::Degenerate { index, area });
        }
        Ok(Self {
            vertices,
            triangles,
            centroids,
            areas,
            normals,
            closed,
        })
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn centroid(&self, i: usize) -> Vec3 {
        self.centroids[i]
    }

    pub fn centroids(&self) -> &[Vec3] {
        &self.centroids
    }

    pub fn area(&self, i: usize) -> f64 {
        self.areas[i]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn normal(&self, i: usize) -> Vec3 {
        self.normals[i]
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    /// Corner positions of triangle `i`.
    pub fn corners(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|v| self.vertices[v])
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// `|Σ area·N|`, zero for a closed polyhedron.
    pub fn closedness_residual(&self) -> f64 {
        self.areas
            .iter()
            .zip(&self.normals)
            .fold(Vec3::zeros(), |acc, (a, n)| acc + n * *a)
            .norm()
    }

    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Longest edge of triangle `i`.
    pub fn diameter(&self, i: usize) -> f64 {
        let [a, b, c] = self.corners(i);
        (b - a).norm().max((c - b).norm()).max((a - c).norm())
    }

    pub fn mean_edge_length(&self) -> f64 {
        let total: f64 = (0..self.len())
            .map(|i| {
                let [a, b, c] = self.corners(i);
                (b - a).norm() + (c - b).norm() + (a - c).norm()
            })
            .sum();
        total / (3 * self.len()) as f64
    }

    /// Radius of the smallest origin-centred ball containing every vertex.
    pub fn bounding_radius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            triangles: self.len(),
            vertices: self.vertices.len(),
            total_area: self.total_area(),
            closedness_residual: self.closedness_residual(),
            mean_edge_length: self.mean_edge_length(),
        }
    }
}

fn check_indices(vertices: &[Vec3], triangles: &[[usize; 3]]) -> Result<(), MeshError> {
    for (i, t) in triangles.iter().enumerate() {
        if t.iter().any(|&v| v >= vertices.len()) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(MeshError::BadIndex(i));
        }
    }
    Ok(())
}

fn check_closed_manifold(triangles: &[[usize; 3]]) -> Result<(), MeshError> {
    // undirected edge -> (uses, directed uses a<b)
    let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let e = edges.entry((a.min(b), a.max(b))).or_default();
            e.0 += 1;
            if a < b {
                e.1 += 1;
            }
        }
    }
    let mut sorted: Vec<_> = edges.into_iter().collect();
    sorted.sort_unstable_by_key(|(k, _)| *k);
    for ((a, b), (uses, forward)) in sorted {
        match uses {
            1 => return Err(MeshError::OpenSurface(a, b)),
            2 if forward != 1 => return Err(MeshError::InconsistentOrientation(a, b)),
            2 => {}
            n => return Err(MeshError::NonManifold(a, b, n)),
        }
    }
    Ok(())
}

/// Orthonormal frame at a collocation node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    pub t1: Vec3,
    pub t2: Vec3,
    pub normal: Vec3,
}

impl TangentFrame {
    /// `t1 = normalize(N × e_a)` with `e_a` the coordinate axis least aligned
    /// with `N` (ties go to the earlier axis), `t2 = N × t1`.
    pub fn from_normal(normal: Vec3) -> Self {
        let abs = normal.abs();
        let mut axis = 0;
        for a in 1..3 {
            if abs[a] < abs[axis] {
                axis = a;
            }
        }
        let e = Vec3::ith(axis, 1.0);
        let t1 = normal.cross(&e).normalize();
        let t2 = normal.cross(&t1);
        Self { t1, t2, normal }
    }

    /// Cartesian vector from frame coefficients.
    pub fn to_cartesian<T>(&self, c: [T; 2]) -> nalgebra::Vector3<T>
    where
        T: nalgebra::Scalar + Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        nalgebra::Vector3::new(
            c[0] * self.t1.x + c[1] * self.t2.x,
            c[0] * self.t1.y + c[1] * self.t2.y,
            c[0] * self.t1.z + c[1] * self.t2.z,
        )
    }

    pub fn tangent(&self, component: usize) -> Vec3 {
        if component == 0 {
            self.t1
        } else {
            self.t2
        }
    }
}

/// One frame per triangle centroid.
pub fn tangent_frames(mesh: &SurfaceMesh) -> Vec<TangentFrame> {
    mesh.normals()
        .iter()
        .map(|&n| TangentFrame::from_normal(n))
        .collect()
}

/// Split every triangle 1→4 at its edge midpoints, optionally projecting the
/// new vertices onto an analytic surface.
pub fn refine(mesh: &SurfaceMesh, projection: Option<&Projection>) -> SurfaceMesh {
    let (vertices, triangles) = split_triangles(mesh.vertices(), mesh.triangles(), projection);
    let refined = if mesh.is_closed() {
        SurfaceMesh::new(vertices, triangles)
    } else {
        SurfaceMesh::new_open(vertices, triangles)
    };
    refined.expect("midpoint refinement preserves mesh validity")
}

fn split_triangles(
    vertices: &[Vec3],
    triangles: &[[usize; 3]],
    projection: Option<&Projection>,
) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let mut vertices = vertices.to_vec();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut out = Vec::with_capacity(4 * triangles.len());
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
        *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let mut m = (vertices[a] + vertices[b]) * 0.5;
            if let Some(p) = projection {
                m = p.project(&m);
            }
            vertices.push(m);
            vertices.len() - 1
        })
    };
    for &[a, b, c] in triangles {
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        out.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    (vertices, out)
}

/// Unit icosphere with `20·4^level` triangles.
pub fn make_unit_sphere(level: usize) -> Result<SurfaceMesh, MeshError> {
    if level > 6 {
        return Err(MeshError::LevelOutOfRange(level));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vec3::from(*p).normalize())
    .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let sphere = Projection::unit_sphere();
    for _ in 0..level {
        let (v, t) = split_triangles(&vertices, &triangles, Some(&sphere));
        vertices = v;
        triangles = t;
    }
    SurfaceMesh::new(vertices, triangles)
}
