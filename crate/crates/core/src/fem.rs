//! First-order finite element operators on a triangle mesh.
//!
//! The Laplacian follows the sign convention that it is negative semidefinite.
//! Vertex areas use the mixed Voronoi rule: circumcentric cells on non-obtuse
//! triangles and a barycentric split on obtuse ones, which keeps every lumped
//! mass entry positive on poorly shaped meshes.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::mesh::{cross, dot, norm, norm_sq, scale, sub, TriangleMesh, Vec3};
use crate::sparse::CsrMatrix;

/// Boundary treatment for the diffusion and conic steps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Natural (do-nothing) boundary.
    #[default]
    Neumann,
    /// Prescribed values at the listed vertices.
    Dirichlet {
        vertices: Vec<usize>,
        values: Vec<f64>,
    },
}

impl BoundaryCondition {
    /// Fixes every boundary vertex of `mesh` to `value`.
    pub fn dirichlet_on_boundary(mesh: &TriangleMesh, value: f64) -> Self {
        let vertices: Vec<usize> = (0..mesh.n_vertices())
            .filter(|&v| mesh.boundary()[v])
            .collect();
        let values = vec![value; vertices.len()];
        BoundaryCondition::Dirichlet { vertices, values }
    }
}

#[derive(Debug, Clone)]
pub struct FemOperators {
    faces: Vec<[usize; 3]>,
    mass: Vec<f64>,
    laplacian: CsrMatrix,
    face_area: Vec<f64>,
    face_normal: Vec<Vec3>,
    hat_gradients: Vec<[Vec3; 3]>,
    omega: Vec<f64>,
    one_ring: Vec<Vec<usize>>,
    fixed: Vec<Option<f64>>,
}

impl FemOperators {
    pub fn build(mesh: &TriangleMesh, bc: &BoundaryCondition) -> Result<FemOperators> {
        let nv = mesh.n_vertices();
        let nf = mesh.n_faces();

        let mut fixed = vec![None; nv];
        if let BoundaryCondition::Dirichlet { vertices, values } = bc {
            check_len(vertices.len(), values.len())?;
            for (&v, &val) in vertices.iter().zip(values) {
                if v >= nv {
                    return Err(Error::InvalidArgument(format!(
                        "Dirichlet vertex {v} out of range"
                    )));
                }
                match fixed[v] {
                    Some(prev) if prev != val => {
                        return Err(Error::Infeasible(format!(
                            "vertex {v} fixed to both {prev} and {val}"
                        )))
                    }
                    _ => fixed[v] = Some(val),
                }
            }
        }

        let mut mass = vec![0.0; nv];
        let mut face_area = Vec::with_capacity(nf);
        let mut face_normal = Vec::with_capacity(nf);
        let mut hat_gradients = Vec::with_capacity(nf);
        let mut one_ring = vec![Vec::new(); nv];
        let mut triplets = Vec::with_capacity(12 * nf);

        for (f, &tri) in mesh.faces().iter().enumerate() {
            let p = mesh.corners(f);
            let n2 = cross(sub(p[1], p[0]), sub(p[2], p[0]));
            let double_area = norm(n2);
            let area = 0.5 * double_area;
            let normal = scale(n2, 1.0 / double_area);

            // gradient of the hat function at corner k: normal x (opposite edge) / 2A
            let mut grads = [[0.0; 3]; 3];
            for k in 0..3 {
                let e = sub(p[(k + 2) % 3], p[(k + 1) % 3]);
                grads[k] = scale(cross(normal, e), 1.0 / double_area);
            }

            // cotangent of the angle at each corner
            let mut cot = [0.0; 3];
            for k in 0..3 {
                let u = sub(p[(k + 1) % 3], p[k]);
                let v = sub(p[(k + 2) % 3], p[k]);
                cot[k] = dot(u, v) / norm(cross(u, v));
            }
            for k in 0..3 {
                let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let w = 0.5 * cot[k];
                triplets.push((i, j, w));
                triplets.push((j, i, w));
                triplets.push((i, i, -w));
                triplets.push((j, j, -w));
            }

            let obtuse = (0..3).find(|&k| cot[k] < 0.0);
            for k in 0..3 {
                let share = match obtuse {
                    None => {
                        let ij = norm_sq(sub(p[(k + 1) % 3], p[k]));
                        let ik = norm_sq(sub(p[(k + 2) % 3], p[k]));
                        0.125 * (ij * cot[(k + 2) % 3] + ik * cot[(k + 1) % 3])
                    }
                    Some(o) if o == k => 0.5 * area,
                    Some(_) => 0.25 * area,
                };
                mass[tri[k]] += share;
                one_ring[tri[k]].push(f);
            }

            face_area.push(area);
            face_normal.push(normal);
            hat_gradients.push(grads);
        }

        let omega = one_ring
            .iter()
            .enumerate()
            .map(|(v, ring)| {
                if ring.is_empty() {
                    return Err(Error::InvalidArgument(format!("vertex {v} has no incident face")));
                }
                Ok(1.0 / ring.iter().map(|&f| face_area[f]).sum::<f64>())
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(FemOperators {
            faces: mesh.faces().to_vec(),
            mass,
            laplacian: CsrMatrix::from_triplets(nv, nv, &triplets),
            face_area,
            face_normal,
            hat_gradients,
            omega,
            one_ring,
            fixed,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.mass.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Diagonal of the lumped mass matrix `M`.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Cotangent Laplacian `L` (symmetric, negative semidefinite, zero row sums).
    pub fn laplacian(&self) -> &CsrMatrix {
        &self.laplacian
    }

    /// Diagonal of the face mass matrix `M_F`.
    pub fn face_areas(&self) -> &[f64] {
        &self.face_area
    }

    pub fn face_normals(&self) -> &[Vec3] {
        &self.face_normal
    }

    /// Per-face gradients of the three corner hat functions.
    pub fn hat_gradients(&self) -> &[[Vec3; 3]] {
        &self.hat_gradients
    }

    /// One-ring weights `omega_i = 1 / sum of incident face areas`.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Incident faces of each vertex, in ascending face order.
    pub fn one_ring(&self) -> &[Vec<usize>] {
        &self.one_ring
    }

    /// Prescribed value per vertex, `None` for free vertices.
    pub fn fixed_values(&self) -> &[Option<f64>] {
        &self.fixed
    }

    /// The same operators with every vertex free.
    pub fn without_dirichlet(mut self) -> FemOperators {
        self.fixed.iter_mut().for_each(|f| *f = None);
        self
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.fixed[v].is_none()
    }

    /// Per-face gradient `Gu` of a piecewise-linear vertex field.
    pub fn gradient(&self, u: &[f64]) -> Vec<Vec3> {
        assert_eq!(u.len(), self.n_vertices());
        self.faces
            .iter()
            .zip(&self.hat_gradients)
            .map(|(t, g)| {
                let mut out = [0.0; 3];
                for k in 0..3 {
                    for c in 0..3 {
                        out[c] += u[t[k]] * g[k][c];
                    }
                }
                out
            })
            .collect()
    }

    /// `G` as a `3|F| x |V|` matrix; row `3f + c` holds component `c` on face `f`.
    pub fn gradient_matrix(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(9 * self.n_faces());
        for (f, (t, g)) in self.faces.iter().zip(&self.hat_gradients).enumerate() {
            for c in 0..3 {
                for k in 0..3 {
                    triplets.push((3 * f + c, t[k], g[k][c]));
                }
            }
        }
        CsrMatrix::from_triplets(3 * self.n_faces(), self.n_vertices(), &triplets)
    }

    /// `D = G^T M_F`, mapping face vector fields to (integrated) vertex values.
    ///
    /// Note the sign: for a tangent field on a closed surface `(D phi)_i` is
    /// minus the integral of `phi_i * div(phi)`.
    pub fn divergence(&self, field: &[Vec3]) -> Vec<f64> {
        assert_eq!(field.len(), self.n_faces());
        let mut out = vec![0.0; self.n_vertices()];
        for (f, t) in self.faces.iter().enumerate() {
            let a = self.face_area[f];
            for k in 0..3 {
                out[t[k]] += a * dot(self.hat_gradients[f][k], field[f]);
            }
        }
        out
    }

    /// Pointwise divergence estimate `-M^{-1} G^T M_F phi`.
    pub fn pointwise_divergence(&self, field: &[Vec3]) -> Vec<f64> {
        self.divergence(field)
            .into_iter()
            .zip(&self.mass)
            .map(|(d, m)| -d / m)
            .collect()
    }

    /// Area-weighted one-ring average of a face quantity:
    /// `out_i = omega_i * sum_{j ~ i} a_j * values_j`.
    pub fn one_ring_average(&self, per_face: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_faces(), per_face.len())?;
        Ok(self
            .one_ring
            .iter()
            .zip(&self.omega)
            .map(|(ring, w)| w * ring.iter().map(|&f| self.face_area[f] * per_face[f]).sum::<f64>())
            .collect())
    }

    /// Mass-weighted inner product `a^T M b`.
    pub fn mass_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.mass)
            .map(|((x, y), m)| m * x * y)
            .sum()
    }

    /// Mass-weighted L2 norm `sqrt(v^T M v)`.
    pub fn mass_norm(&self, v: &[f64]) -> f64 {
        self.mass_dot(v, v).sqrt()
    }

    /// Total mass `1^T M u`.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.mass).map(|(x, m)| x * m).sum()
    }
}
