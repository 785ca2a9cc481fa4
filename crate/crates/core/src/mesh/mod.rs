//! Triangle meshes: validation, geometry queries, file formats and generators.

mod generate;
mod io;

use std::collections::HashMap;

pub use generate::{MeshKind, DEFAULT_FACE_CAP};
pub use io::MeshFormat;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Faces whose area is below this fraction of the mean face area are rejected.
pub const DEGENERATE_AREA_FRACTION: f64 = 1e-14;

/// A validated, consistently oriented, edge-manifold triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    boundary: Vec<bool>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let n = vertices.len();
        for (f, tri) in faces.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(Error::IndexOutOfRange {
                        face: f,
                        index: v,
                        n_vertices: n,
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::RepeatedVertex { face: f });
            }
        }

        let areas: Vec<f64> = faces
            .iter()
            .map(|t| triangle_area(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]))
            .collect();
        let mean = areas.iter().sum::<f64>() / areas.len() as f64;
        for (f, &a) in areas.iter().enumerate() {
            if !(a > DEGENERATE_AREA_FRACTION * mean) {
                return Err(Error::DegenerateFace { face: f, area: a });
            }
        }

        // directed half-edge counts per undirected edge
        let mut edges: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
        for tri in &faces {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
                if a < b {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let mut boundary = vec![false; n];
        let mut keys: Vec<_> = edges.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let (fwd, bwd) = edges[&key];
            if fwd + bwd > 2 {
                return Err(Error::NonManifoldEdge(key.0, key.1));
            }
            if fwd > 1 || bwd > 1 {
                return Err(Error::InconsistentOrientation(key.0, key.1));
            }
            if fwd + bwd == 1 {
                boundary[key.0] = true;
                boundary[key.1] = true;
            }
        }

        Ok(TriangleMesh {
            vertices,
            faces,
            boundary,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// True for vertices on a boundary edge (an edge with a single incident face).
    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_closed(&self) -> bool {
        !self.boundary.iter().any(|&b| b)
    }

    pub fn corners(&self, f: usize) -> [Vec3; 3] {
        let t = self.faces[f];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.corners(f);
        triangle_area(&a, &b, &c)
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.corners(f);
        normalize(cross(sub(b, a), sub(c, a)))
    }

    pub fn face_barycenter(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.corners(f);
        scale(add(add(a, b), c), 1.0 / 3.0)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_faces()).map(|f| self.face_area(f)).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.faces
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| norm(sub(self.vertices[a], self.vertices[b])))
            .fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Area-weighted vertex normals.
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut normals = vec![[0.0; 3]; self.n_vertices()];
        for (f, t) in self.faces.iter().enumerate() {
            let [a, b, c] = self.corners(f);
            let n = cross(sub(b, a), sub(c, a));
            for &v in t {
                normals[v] = add(normals[v], n);
            }
        }
        normals.into_iter().map(normalize).collect()
    }

    /// Returns a copy with every vertex moved by `offsets[v]` along its normal.
    pub fn displaced_along_normals(&self, offsets: &[f64]) -> Result<TriangleMesh> {
        crate::error::check_len(self.n_vertices(), offsets.len())?;
        let normals = self.vertex_normals();
        let vertices = self
            .vertices
            .iter()
            .zip(&normals)
            .zip(offsets)
            .map(|((p, n), &d)| add(*p, scale(*n, d)))
            .collect();
        TriangleMesh::new(vertices, self.faces.clone())
    }

    /// Index of the vertex nearest to `p` (lowest index on ties).
    pub fn nearest_vertex(&self, p: Vec3) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, q) in self.vertices.iter().enumerate() {
            let d = norm_sq(sub(*q, p));
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }
}

pub(crate) fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * norm(cross(sub(*b, *a), sub(*c, *a)))
}

#[inline]
pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub(crate) fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm_sq(a: Vec3) -> f64 {
    dot(a, a)
}

#[inline]
pub(crate) fn norm(a: Vec3) -> f64 {
    norm_sq(a).sqrt()
}

pub(crate) fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    if n > 0.0 {
        scale(a, 1.0 / n)
    } else {
        a
    }
}
