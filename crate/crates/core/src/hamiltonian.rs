//! Per-vertex discretizations of the Hamiltonians driving the first-order term.
//!
//! Face quantities built from `Gu` are carried to vertices by the area-weighted
//! one-ring average `omega_i * sum_j a_j (.)_j`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{check_len, Error, Result};
use crate::fem::FemOperators;
use crate::mesh::{dot, norm, scale, sub, Vec3};

/// One tangent vector per face.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceVectorField(Vec<Vec3>);

impl FaceVectorField {
    /// Wraps raw vectors after projecting each onto its face plane.
    pub fn projected(ops: &FemOperators, raw: Vec<Vec3>) -> Result<FaceVectorField> {
        check_len(ops.n_faces(), raw.len())?;
        let field = raw
            .into_iter()
            .zip(ops.face_normals())
            .map(|(v, &n)| sub(v, scale(n, dot(v, n))))
            .collect();
        Ok(FaceVectorField(field))
    }

    pub fn zeros(n_faces: usize) -> FaceVectorField {
        FaceVectorField(vec![[0.0; 3]; n_faces])
    }

    pub fn as_slice(&self) -> &[Vec3] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == [0.0; 3])
    }

    /// Largest `|v . n| / |v|` over faces; zero vectors count as tangent.
    pub fn max_normal_ratio(&self, ops: &FemOperators) -> f64 {
        self.0
            .iter()
            .zip(ops.face_normals())
            .filter(|(v, _)| norm(**v) > 0.0)
            .map(|(v, &n)| dot(*v, n).abs() / norm(*v))
            .fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.0.len() * 48);
        for v in &self.0 {
            writeln!(s, "{:e} {:e} {:e}", v[0], v[1], v[2]).unwrap();
        }
        s
    }

    /// Parses one `x y z` line per face.
    pub fn from_text(text: &str) -> Result<FaceVectorField> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(i + 1, format!("bad float `{t}`"))))
                .collect::<Result<_>>()?;
            if vals.len() != 3 {
                return Err(Error::parse(i + 1, "expected three floats"));
            }
            out.push([vals[0], vals[1], vals[2]]);
        }
        Ok(FaceVectorField(out))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Reads a field and projects it onto the faces of `ops`.
    pub fn read(path: impl AsRef<Path>, ops: &FemOperators) -> Result<FaceVectorField> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FaceVectorField::projected(ops, FaceVectorField::from_text(&text)?.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianKind {
    /// `H = -|q|^2`; with unit viscosity this is the log of the heat equation.
    NonlinearDiffusion,
    /// `H = phi . q - |q|`, level-set front propagation under a flow.
    GEquation(FaceVectorField),
    /// `H = u div(phi) + phi . q`, drift plus diffusion of a density.
    FokkerPlanck(FaceVectorField),
}

impl HamiltonianKind {
    pub fn name(&self) -> &'static str {
        match self {
            HamiltonianKind::NonlinearDiffusion => "nonlinear_diffusion",
            HamiltonianKind::GEquation(_) => "g_equation",
            HamiltonianKind::FokkerPlanck(_) => "fokker_planck",
        }
    }

    pub fn flow(&self) -> Option<&FaceVectorField> {
        match self {
            HamiltonianKind::NonlinearDiffusion => None,
            HamiltonianKind::GEquation(f) | HamiltonianKind::FokkerPlanck(f) => Some(f),
        }
    }

    pub(crate) fn check(&self, ops: &FemOperators) -> Result<()> {
        match self.flow() {
            Some(f) => check_len(ops.n_faces(), f.len()),
            None => Ok(()),
        }
    }
}

/// Evaluates `H_i(u)` at every vertex.
pub fn eval_h(kind: &HamiltonianKind, u: &[f64], ops: &FemOperators) -> Result<Vec<f64>> {
    check_len(ops.n_vertices(), u.len())?;
    kind.check(ops)?;
    let grad = ops.gradient(u);
    match kind {
        HamiltonianKind::NonlinearDiffusion => {
            let sq: Vec<f64> = grad.iter().map(|g| dot(*g, *g)).collect();
            Ok(ops.one_ring_average(&sq)?.into_iter().map(|x| -x).collect())
        }
        HamiltonianKind::GEquation(flow) => {
            let per_face: Vec<f64> = grad
                .iter()
                .zip(flow.as_slice())
                .map(|(g, p)| dot(*p, *g) - norm(*g))
                .collect();
            ops.one_ring_average(&per_face)
        }
        HamiltonianKind::FokkerPlanck(flow) => {
            let div = ops.pointwise_divergence(flow.as_slice());
            let per_face: Vec<f64> = grad
                .iter()
                .zip(flow.as_slice())
                .map(|(g, p)| dot(*p, *g))
                .collect();
            let adv = ops.one_ring_average(&per_face)?;
            Ok(u.iter()
                .zip(&div)
                .zip(adv)
                .map(|((ui, di), ai)| ui * di + ai)
                .collect())
        }
    }
}
