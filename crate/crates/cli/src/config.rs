//! TOML experiment configuration and its translation to solver inputs.

use std::path::{Path, PathBuf};

use parasplit_core::frontprop::CompareConfig;
use parasplit_core::{
    heat_kernel_bump, make_flow, BoundaryCondition, Distribution, Error, FaceVectorField,
    FemOperators, FlowDomain, FlowKind, HamiltonianKind, MeshKind, PdeProblem, Result,
    SinkhornConfig, SolverConfig, TriangleMesh, Vec3,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    /// OBJ or OFF file, resolved against the config file's directory.
    pub file: Option<PathBuf>,
    pub generator: Option<MeshKind>,
    /// Each vertex moves along its normal by a uniform offset in
    /// `[-noise, noise]`, drawn from the run seed.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub boundary: BoundarySpec,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundarySpec {
    #[default]
    Neumann,
    /// Every boundary vertex held at `value`.
    Dirichlet { value: f64 },
}

impl MeshSpec {
    pub fn validate(&mut self, base: &Path) -> Result<()> {
        match (&self.file, &self.generator) {
            (Some(f), None) => {
                let f = base.join(f);
                if !f.is_file() {
                    return Err(invalid(format!("mesh file {} does not exist", f.display())));
                }
                self.file = Some(f);
            }
            (None, Some(_)) => {}
            _ => return Err(invalid("mesh needs exactly one of `file` and `generator`")),
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(invalid(format!("mesh noise must be >= 0, got {}", self.noise)));
        }
        Ok(())
    }

    pub fn build(&self, seed: u64) -> Result<TriangleMesh> {
        let mesh = match (&self.file, &self.generator) {
            (Some(f), _) => TriangleMesh::load_auto(f)?,
            (None, Some(g)) => g.generate()?,
            (None, None) => return Err(invalid("mesh has no source")),
        };
        if self.noise == 0.0 {
            return Ok(mesh);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offsets: Vec<f64> = (0..mesh.n_vertices())
            .map(|_| rng.random_range(-self.noise..=self.noise))
            .collect();
        mesh.displaced_along_normals(&offsets)
    }

    pub fn operators(&self, mesh: &TriangleMesh) -> Result<FemOperators> {
        let bc = match self.boundary {
            BoundarySpec::Neumann => BoundaryCondition::Neumann,
            BoundarySpec::Dirichlet { value } => BoundaryCondition::dirichlet_on_boundary(mesh, value),
        };
        FemOperators::build(mesh, &bc)
    }

    pub fn flow_domain(&self) -> FlowDomain {
        self.generator
            .as_ref()
            .map(FlowDomain::for_mesh_kind)
            .unwrap_or(FlowDomain::Planar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdeKind {
    FokkerPlanck,
    GEquation,
    NonlinearDiffusion,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSpec {
    pub kind: PdeKind,
    pub epsilon: f64,
    /// Drift for the Fokker-Planck and G-equation kinds; zero when absent.
    pub flow: Option<FlowKind>,
    /// Overrides the chart implied by the mesh generator.
    pub flow_domain: Option<FlowDomain>,
}

impl PdeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if self.kind == PdeKind::NonlinearDiffusion && self.flow.is_some() {
            return Err(invalid("nonlinear diffusion takes no flow"));
        }
        Ok(())
    }

    pub fn hamiltonian(&self, mesh: &TriangleMesh, ops: &FemOperators, domain: FlowDomain) -> Result<HamiltonianKind> {
        let flow = match &self.flow {
            Some(f) => make_flow(f, mesh, ops, self.flow_domain.unwrap_or(domain))?,
            None => FaceVectorField::zeros(ops.n_faces()),
        };
        Ok(match self.kind {
            PdeKind::FokkerPlanck => HamiltonianKind::FokkerPlanck(flow),
            PdeKind::GEquation => HamiltonianKind::GEquation(flow),
            PdeKind::NonlinearDiffusion => HamiltonianKind::NonlinearDiffusion,
        })
    }
}

/// Where a bump or Gaussian is centred.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Centre {
    Vertex(usize),
    Point(Vec3),
}

impl Centre {
    fn vertex(&self, mesh: &TriangleMesh) -> Result<usize> {
        match *self {
            Centre::Vertex(v) if v < mesh.n_vertices() => Ok(v),
            Centre::Vertex(v) => Err(invalid(format!("centre vertex {v} out of range"))),
            Centre::Point(p) => Ok(mesh.nearest_vertex(p)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// Heat-kernel bump of diffusion time `time`, unit mass unless `peak` is set.
    Bump {
        centre: Centre,
        time: f64,
        peak: Option<f64>,
    },
    /// `exp(-|x - c|^2 / (2 sigma^2))` in ambient distance.
    Gaussian { centre: Centre, sigma: f64 },
    Constant { value: f64 },
    /// One value per vertex, resolved against the config file's directory.
    File { path: PathBuf },
}

impl FieldSpec {
    pub fn validate(&mut self, base: &Path) -> Result<()> {
        match self {
            FieldSpec::Bump { time, peak, .. } => {
                if !(*time > 0.0 && time.is_finite()) {
                    return Err(invalid(format!("bump time must be positive, got {time}")));
                }
                if peak.is_some_and(|p| !(p > 0.0 && p.is_finite())) {
                    return Err(invalid("bump peak must be positive"));
                }
            }
            FieldSpec::Gaussian { sigma, .. } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(invalid(format!("sigma must be positive, got {sigma}")));
                }
            }
            FieldSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(invalid("constant must be finite"));
                }
            }
            FieldSpec::File { path } => {
                *path = base.join(&*path);
                if !path.is_file() {
                    return Err(invalid(format!("field file {} does not exist", path.display())));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self, mesh: &TriangleMesh, ops: &FemOperators) -> Result<Vec<f64>> {
        match self {
            FieldSpec::Bump { centre, time, peak } => {
                let b = heat_kernel_bump(ops, centre.vertex(mesh)?, *time)?;
                Ok(match peak {
                    Some(p) => {
                        let m = b.iter().fold(0.0f64, |m, x| m.max(*x));
                        b.into_iter().map(|x| p * x / m).collect()
                    }
                    None => b,
                })
            }
            FieldSpec::Gaussian { centre, sigma } => {
                let c = mesh.vertices()[centre.vertex(mesh)?];
                Ok(mesh
                    .vertices()
                    .iter()
                    .map(|p| {
                        let d2: f64 = (0..3).map(|k| (p[k] - c[k]).powi(2)).sum();
                        (-d2 / (2.0 * sigma * sigma)).exp()
                    })
                    .collect())
            }
            FieldSpec::Constant { value } => Ok(vec![*value; mesh.n_vertices()]),
            FieldSpec::File { path } => {
                let u = parasplit_core::integrator::read_field(path)?;
                if u.len() != mesh.n_vertices() {
                    return Err(Error::ShapeMismatch {
                        expected: mesh.n_vertices(),
                        actual: u.len(),
                    });
                }
                Ok(u)
            }
        }
    }
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("time step must be positive, got {h}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub h: f64,
    pub steps: usize,
    #[serde(default = "one")]
    pub snapshot_every: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub mesh: MeshSpec,
    pub pde: PdeSpec,
    pub initial: FieldSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeLadder {
    pub h0: f64,
    pub t_final: f64,
    pub halvings: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeTimeConfig {
    pub mesh: MeshSpec,
    pub pde: PdeSpec,
    pub initial: FieldSpec,
    pub convergence: TimeLadder,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceLadder {
    /// Meshes from coarse to fine.
    pub meshes: Vec<MeshSpec>,
    #[serde(default = "tiny_step")]
    pub h: f64,
    #[serde(default = "one")]
    pub steps: usize,
}

fn tiny_step() -> f64 {
    1e-5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSpaceConfig {
    pub pde: PdeSpec,
    /// Bump centres should be points so every mesh gets the same location.
    pub initial: FieldSpec,
    pub ladder: SpaceLadder,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarycenterConfig {
    pub mesh: MeshSpec,
    pub sinkhorn: SinkhornConfig,
    pub inputs: Vec<FieldSpec>,
    /// Uniform when absent.
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolateConfig {
    pub mesh: MeshSpec,
    pub sinkhorn: SinkhornConfig,
    pub from: FieldSpec,
    pub to: FieldSpec,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareGridConfig {
    pub compare: CompareConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshGenConfig {
    pub mesh: MeshSpec,
}

fn check_sinkhorn(cfg: &SinkhornConfig) -> Result<()> {
    if !(cfg.gamma > 0.0 && cfg.gamma.is_finite()) {
        return Err(invalid(format!("gamma must be positive, got {}", cfg.gamma)));
    }
    Ok(())
}

impl EvolveConfig {
    pub fn validate(&mut self, base: &Path) -> Result<()> {
        self.mesh.validate(base)?;
        self.pde.validate()?;
        self.initial.validate(base)?;
        check_step(self.time.h)?;
        if self.time.steps == 0 || self.time.snapshot_every == 0 {
            return Err(invalid("steps and snapshot_every must be at least 1"));
        }
        Ok(())
    }
}

impl ConvergeTimeConfig {
    pub fn validate(&mut self, base: &Path) -> Result<()> {
        self.mesh.validate(base)?;
        self.pde.validate()?;
        self.initial.validate(base)?;
        check_step(self.convergence.h0)?;
        if self.convergence.halvings < 2 {
            return Err(invalid(format!(
                "need at least 2 halvings, got {}",
                self.convergence.halvings
            )));
        }
        Ok(())
    }
}

impl ConvergeSpaceConfig {
    pub fn validate(&mut self, base: &Path) -> Result<()> {
        if self.ladder.meshes.len() < 2 {
            return Err(invalid("the mesh ladder needs at least two meshes"));
        }
        for m in &mut self.ladder.meshes {
            m.validate(base)?;
        }
        self.pde.validate()?;
        self.initial.validate(base)?;
        check_step(self.ladder.h)?;
        if self.ladder.steps == 0 {
            return Err(invalid("steps must be at least 1"));
        }
        Ok(())
    }
}

impl BarycenterConfig {
    pub fn validate(&mut self, base: &Path) -> Result<()> {
        self.mesh.validate(base)?;
        check_sinkhorn(&self.sinkhorn)?;
        if self.inputs.len() < 2 {
            return Err(invalid("a barycenter needs at least two inputs"));
        }
        for f in &mut self.inputs {
            f.validate(base)?;
        }
        if let Some(w) = &self.weights {
            if w.len() != self.inputs.len() {
                return Err(invalid("one weight per input is required"));
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.weights
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.inputs.len() as f64; self.inputs.len()])
    }
}

impl InterpolateConfig {
    pub fn validate(&mut self, base: &Path) -> Result<()> {
        self.mesh.validate(base)?;
        check_sinkhorn(&self.sinkhorn)?;
        self.from.validate(base)?;
        self.to.validate(base)?;
        if self.times.is_empty() || self.times.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(invalid("times must be a nonempty list in [0, 1]"));
        }
        Ok(())
    }
}

impl CompareGridConfig {
    pub fn validate(&mut self, _base: &Path) -> Result<()> {
        check_step(self.compare.h)
    }
}

impl MeshGenConfig {
    pub fn validate(&mut self, base: &Path) -> Result<()> {
        self.mesh.validate(base)
    }
}

pub fn problem(
    pde: &PdeSpec,
    initial: &FieldSpec,
    mesh_spec: &MeshSpec,
    mesh: &TriangleMesh,
    solver: SolverConfig,
) -> Result<PdeProblem> {
    let ops = mesh_spec.operators(mesh)?;
    let kind = pde.hamiltonian(mesh, &ops, mesh_spec.flow_domain())?;
    let u0 = initial.build(mesh, &ops)?;
    Ok(PdeProblem::new(kind, pde.epsilon, u0, ops)?.with_solver(solver))
}

pub fn distribution(spec: &FieldSpec, mesh: &TriangleMesh, ops: &FemOperators) -> Result<Distribution> {
    Distribution::new(spec.build(mesh, ops)?, ops)
}
