use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{normalize, TriangleMesh, Vec3};
use crate::error::{Error, Result};

pub const DEFAULT_FACE_CAP: usize = 1_000_000;

/// Procedural meshes used by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshKind {
    /// Unit sphere from `level` rounds of 1-to-4 subdivision of an icosahedron.
    Icosphere { level: u32 },
    /// `nx` by `ny` square cells in the z=0 plane, each split along its main diagonal.
    Grid { nx: usize, ny: usize, spacing: f64 },
    /// Torus of major radius `major` and tube radius `minor`.
    Torus {
        major: f64,
        minor: f64,
        nu: usize,
        nv: usize,
    },
    /// The unit interval split into `n` elements, embedded as a one-cell-wide strip
    /// of right triangles. Fields constant across the strip see the 1D cotangent chain.
    UnitLine { n: usize },
}

impl MeshKind {
    pub fn face_count(&self) -> Option<usize> {
        match *self {
            MeshKind::Icosphere { level } => 4usize.checked_pow(level)?.checked_mul(20),
            MeshKind::Grid { nx, ny, .. } => nx.checked_mul(ny)?.checked_mul(2),
            MeshKind::Torus { nu, nv, .. } => nu.checked_mul(nv)?.checked_mul(2),
            MeshKind::UnitLine { n } => n.checked_mul(2),
        }
    }

    pub fn generate(&self) -> Result<TriangleMesh> {
        self.generate_with_cap(DEFAULT_FACE_CAP)
    }

    pub fn generate_with_cap(&self, cap: usize) -> Result<TriangleMesh> {
        let requested = self.face_count().unwrap_or(usize::MAX);
        if requested > cap {
            return Err(Error::FaceCap { requested, cap });
        }
        match *self {
            MeshKind::Icosphere { level } => Ok(icosphere(level)),
            MeshKind::Grid { nx, ny, spacing } => {
                positive("nx", nx)?;
                positive("ny", ny)?;
                positive_f("spacing", spacing)?;
                Ok(grid(nx, ny, spacing, spacing))
            }
            MeshKind::Torus {
                major,
                minor,
                nu,
                nv,
            } => {
                if nu < 3 || nv < 3 {
                    return Err(Error::InvalidArgument("torus needs nu, nv >= 3".into()));
                }
                positive_f("minor", minor)?;
                if !(major > minor) {
                    return Err(Error::InvalidArgument("torus needs major > minor".into()));
                }
                Ok(torus(major, minor, nu, nv))
            }
            MeshKind::UnitLine { n } => {
                positive("n", n)?;
                let dx = 1.0 / n as f64;
                Ok(grid(n, 1, dx, dx))
            }
        }
    }
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(Error::InvalidArgument(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

fn positive_f(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

fn icosphere(level: u32) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize)
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
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

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push(normalize([
                    0.5 * (p[0] + q[0]),
                    0.5 * (p[1] + q[1]),
                    0.5 * (p[2] + q[2]),
                ]));
                vertices.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    TriangleMesh::new(vertices, faces).expect("icosphere construction is valid")
}

fn grid(nx: usize, ny: usize, dx: f64, dy: f64) -> TriangleMesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([i as f64 * dx, j as f64 * dy, 0.0]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("grid construction is valid")
}

fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> TriangleMesh {
    use std::f64::consts::TAU;
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let theta = TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let phi = TAU * j as f64 / nv as f64;
            let ring = major + minor * phi.cos();
            vertices.push([ring * theta.cos(), ring * theta.sin(), minor * phi.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("torus construction is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{dot, norm};

    #[test]
    fn icosphere_counts() {
        for level in 0..=4 {
            let m = MeshKind::Icosphere { level }.generate().unwrap();
            assert_eq!(m.n_faces(), 20 * 4usize.pow(level));
            assert_eq!(m.n_vertices(), 10 * 4usize.pow(level) + 2);
            assert!(m.is_closed());
        }
    }

    #[test]
    fn icosphere_level6_matches_reference_counts() {
        let m = MeshKind::Icosphere { level: 6 }.generate().unwrap();
        assert_eq!(m.n_faces(), 81_920);
        assert_eq!(m.n_vertices(), 40_962);
    }

    #[test]
    fn icosphere_faces_point_outward() {
        let m = MeshKind::Icosphere { level: 2 }.generate().unwrap();
        for f in 0..m.n_faces() {
            assert!(dot(m.face_normal(f), m.face_barycenter(f)) > 0.0);
        }
        for p in m.vertices() {
            assert!((norm(*p) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_counts_follow_formula() {
        let m = MeshKind::Grid {
            nx: 100,
            ny: 100,
            spacing: 0.01,
        }
        .generate()
        .unwrap();
        assert_eq!(m.n_faces(), 2 * 100 * 100);
        assert_eq!(m.n_vertices(), 101 * 101);
        assert_eq!(m.n_faces(), 20_000);
        assert_eq!(m.n_vertices(), 10_201);
        for f in 0..m.n_faces() {
            let n = m.face_normal(f);
            assert!(n[0] == 0.0 && n[1] == 0.0 && (n[2] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn torus_at_reference_resolution() {
        let m = MeshKind::Torus {
            major: 1.0,
            minor: 0.4,
            nu: 400,
            nv: 250,
        }
        .generate()
        .unwrap();
        assert_eq!(m.n_faces(), 200_000);
        assert_eq!(m.n_vertices(), 100_000);
        assert!(m.is_closed());
        // outward orientation at the outer equator
        let f = 0;
        assert!(m.face_normal(f)[0] > 0.9);
    }

    #[test]
    fn unit_line_is_a_strip() {
        let m = MeshKind::UnitLine { n: 10 }.generate().unwrap();
        assert_eq!(m.n_vertices(), 22);
        assert_eq!(m.n_faces(), 20);
        let (lo, hi) = m.bounding_box();
        assert_eq!(lo, [0.0, 0.0, 0.0]);
        assert!((hi[0] - 1.0).abs() < 1e-15 && (hi[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn face_cap_is_enforced() {
        let err = MeshKind::Icosphere { level: 9 }.generate().unwrap_err();
        assert!(matches!(err, Error::FaceCap { requested: 5_242_880, .. }));
        assert!(MeshKind::Grid {
            nx: 0,
            ny: 3,
            spacing: 1.0
        }
        .generate()
        .is_err());
    }
}
