//! Analytic velocity fields sampled at face barycenters.
//!
//! Each field is written in 2D coordinates `(x, y)` in `[0, 1]^2` with components
//! along a local tangent frame `(e1, e2)`. On the plane these are the scaled
//! bounding-box coordinates; on the sphere longitude and colatitude; on the torus
//! the two angles. Samples are projected onto the face plane afterwards.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fem::FemOperators;
use crate::hamiltonian::FaceVectorField;
use crate::mesh::{add, norm, scale, MeshKind, TriangleMesh, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flow", rename_all = "snake_case")]
pub enum FlowKind {
    /// A fixed ambient vector.
    Constant { velocity: Vec3 },
    /// `(s y, 0)`
    Shear {
        #[serde(default = "one")]
        strength: f64,
    },
    /// `s (-sin(pi x) cos(pi y), cos(pi x) sin(pi y))`
    Cellular {
        #[serde(default = "one")]
        strength: f64,
    },
    /// `s (sin(2 pi y), 0)`
    Kolmogorov {
        #[serde(default = "one")]
        strength: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// How face barycenters map to the 2D flow coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowDomain {
    Planar,
    Sphere,
    Torus { major: f64 },
}

impl FlowDomain {
    pub fn for_mesh_kind(kind: &MeshKind) -> FlowDomain {
        match *kind {
            MeshKind::Icosphere { .. } => FlowDomain::Sphere,
            MeshKind::Torus { major, .. } => FlowDomain::Torus { major },
            MeshKind::Grid { .. } | MeshKind::UnitLine { .. } => FlowDomain::Planar,
        }
    }
}

struct Chart {
    x: f64,
    y: f64,
    e1: Vec3,
    e2: Vec3,
}

fn chart(domain: FlowDomain, p: Vec3, lo: Vec3, hi: Vec3) -> Chart {
    match domain {
        FlowDomain::Planar => {
            let span = |k: usize| if hi[k] > lo[k] { hi[k] - lo[k] } else { 1.0 };
            Chart {
                x: (p[0] - lo[0]) / span(0),
                y: (p[1] - lo[1]) / span(1),
                e1: [1.0, 0.0, 0.0],
                e2: [0.0, 1.0, 0.0],
            }
        }
        FlowDomain::Sphere => {
            let r = norm(p);
            let lon = p[1].atan2(p[0]);
            let colat = (p[2] / r).clamp(-1.0, 1.0).acos();
            Chart {
                x: (lon + PI) / TAU,
                y: colat / PI,
                e1: [-lon.sin(), lon.cos(), 0.0],
                e2: [colat.cos() * lon.cos(), colat.cos() * lon.sin(), -colat.sin()],
            }
        }
        FlowDomain::Torus { major } => {
            let theta = p[1].atan2(p[0]);
            let rho = p[0].hypot(p[1]) - major;
            let phi = p[2].atan2(rho);
            Chart {
                x: theta.rem_euclid(TAU) / TAU,
                y: phi.rem_euclid(TAU) / TAU,
                e1: [-theta.sin(), theta.cos(), 0.0],
                e2: [-phi.sin() * theta.cos(), -phi.sin() * theta.sin(), phi.cos()],
            }
        }
    }
}

fn sample(kind: &FlowKind, c: &Chart) -> Vec3 {
    let (a, b) = match *kind {
        FlowKind::Constant { velocity } => return velocity,
        FlowKind::Shear { strength } => (strength * c.y, 0.0),
        FlowKind::Cellular { strength } => (
            -strength * (PI * c.x).sin() * (PI * c.y).cos(),
            strength * (PI * c.x).cos() * (PI * c.y).sin(),
        ),
        FlowKind::Kolmogorov { strength } => (strength * (TAU * c.y).sin(), 0.0),
    };
    add(scale(c.e1, a), scale(c.e2, b))
}

/// Samples `kind` at every face barycenter and projects onto the face planes.
pub fn make_flow(
    kind: &FlowKind,
    mesh: &TriangleMesh,
    ops: &FemOperators,
    domain: FlowDomain,
) -> Result<FaceVectorField> {
    let (lo, hi) = mesh.bounding_box();
    let raw = (0..mesh.n_faces())
        .map(|f| sample(kind, &chart(domain, mesh.face_barycenter(f), lo, hi)))
        .collect();
    FaceVectorField::projected(ops, raw)
}
