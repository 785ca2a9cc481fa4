//! Strang splitting: heat half-step, conic Hamilton-Jacobi step, heat half-step.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{MatMut, Par, Side};
use serde::Serialize;

use crate::conic::{
    assemble_step, constraint_residuals, solve_conic, KktResiduals, SolveStatus, SolverConfig,
};
use crate::error::{check_len, Error, Result};
use crate::fem::FemOperators;
use crate::hamiltonian::HamiltonianKind;

#[derive(Debug, Clone)]
pub struct PdeProblem {
    pub kind: HamiltonianKind,
    pub epsilon: f64,
    pub u0: Vec<f64>,
    pub ops: FemOperators,
    pub solver: SolverConfig,
}

impl PdeProblem {
    pub fn new(kind: HamiltonianKind, epsilon: f64, u0: Vec<f64>, ops: FemOperators) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("viscosity must be >= 0, got {epsilon}")));
        }
        check_len(ops.n_vertices(), u0.len())?;
        kind.check(&ops)?;
        if u0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: 0 });
        }
        Ok(PdeProblem {
            kind,
            epsilon,
            u0,
            ops,
            solver: SolverConfig::default(),
        })
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.solver = solver;
        self
    }
}

/// Prefactored implicit heat half-step `(M - (h/2) eps L) x = M u`.
///
/// Dirichlet vertices are eliminated: their values are imposed and their
/// columns moved to the right-hand side.
pub struct HeatSolver {
    h: f64,
    epsilon: f64,
    mass: Vec<f64>,
    fixed: Vec<Option<f64>>,
    free: Vec<usize>,
    /// `-(h/2) eps L` restricted to (free row, fixed column).
    coupling: Vec<(usize, usize, f64)>,
    llt: Option<faer::sparse::linalg::solvers::Llt<usize, f64>>,
}

impl std::fmt::Debug for HeatSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeatSolver")
            .field("h", &self.h)
            .field("epsilon", &self.epsilon)
            .field("n_free", &self.free.len())
            .finish()
    }
}

impl HeatSolver {
    pub fn new(ops: &FemOperators, epsilon: f64, h: f64) -> Result<HeatSolver> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {h}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("viscosity must be >= 0, got {epsilon}")));
        }
        // keep factorization and solves single threaded so results are reproducible
        faer::set_global_parallelism(Par::Seq);

        let n = ops.n_vertices();
        let fixed = ops.fixed_values().to_vec();
        let mut free_index = vec![None; n];
        let mut free = Vec::new();
        for v in 0..n {
            if fixed[v].is_none() {
                free_index[v] = Some(free.len());
                free.push(v);
            }
        }

        let c = 0.5 * h * epsilon;
        let mut coupling = Vec::new();
        let llt = if c > 0.0 && !free.is_empty() {
            let mut triplets = Vec::new();
            for (r, &row_free) in free_index.iter().enumerate() {
                let Some(fr) = row_free else { continue };
                for (col, val) in ops.laplacian().row(r) {
                    // lower triangle only
                    match free_index[col] {
                        Some(fc) if fc <= fr => {
                            let mut a = -c * val;
                            if fc == fr {
                                a += ops.mass()[r];
                            }
                            triplets.push(Triplet::new(fr, fc, a));
                        }
                        Some(_) => {}
                        None => coupling.push((fr, col, -c * val)),
                    }
                }
            }
            let m = free.len();
            let mat = SparseColMat::<usize, f64>::try_new_from_triplets(m, m, &triplets)
                .map_err(|e| Error::Factorization(format!("{e:?}")))?;
            let llt = mat.sp_cholesky(Side::Lower).map_err(|e| {
                Error::Factorization(format!(
                    "{e:?} for a {m}x{m} operator with {} nonzeros (h = {h}, eps = {epsilon})",
                    triplets.len()
                ))
            })?;
            Some(llt)
        } else {
            None
        };

        Ok(HeatSolver {
            h,
            epsilon,
            mass: ops.mass().to_vec(),
            fixed,
            free,
            coupling,
            llt,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// One implicit half-step of size `h/2`.
    pub fn half_step(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.mass.len());
        let mut out: Vec<f64> = u
            .iter()
            .zip(&self.fixed)
            .map(|(&x, f)| f.unwrap_or(x))
            .collect();
        let Some(llt) = &self.llt else {
            return out;
        };
        let mut rhs: Vec<f64> = self.free.iter().map(|&v| self.mass[v] * u[v]).collect();
        for &(fr, col, a) in &self.coupling {
            rhs[fr] -= a * out[col];
        }
        let m = rhs.len();
        llt.solve_in_place(MatMut::from_column_major_slice_mut(&mut rhs, m, 1));
        for (k, &v) in self.free.iter().enumerate() {
            out[v] = rhs[k];
        }
        out
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub iterations: u32,
    pub kkt: KktResiduals,
    /// Largest `|u_i - u_prev_i + h H_i(u)|` over free vertices.
    pub max_constraint_residual: f64,
    pub sup_norm: f64,
    pub wall_time: f64,
}

/// One implicit Hamilton-Jacobi step, returning the new field and diagnostics.
pub fn conic_step(
    kind: &HamiltonianKind,
    u_prev: &[f64],
    h: f64,
    ops: &FemOperators,
    solver: &SolverConfig,
    step: usize,
) -> Result<(Vec<f64>, StepDiagnostics)> {
    let start = Instant::now();
    // H vanishes identically, so the step is the identity with fixed values imposed
    if let HamiltonianKind::FokkerPlanck(phi) = kind {
        if phi.is_zero() {
            check_len(ops.n_vertices(), u_prev.len())?;
            let u: Vec<f64> = u_prev
                .iter()
                .zip(ops.fixed_values())
                .map(|(v, fixed)| fixed.unwrap_or(*v))
                .collect();
            let diag = StepDiagnostics {
                step,
                iterations: 0,
                kkt: KktResiduals::default(),
                max_constraint_residual: 0.0,
                sup_norm: sup_norm(&u),
                wall_time: start.elapsed().as_secs_f64(),
            };
            return Ok((u, diag));
        }
    }
    let program = assemble_step(kind, u_prev, h, ops)?;
    let sol = solve_conic(&program, solver)?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(Error::Infeasible(format!("conic step {step}: {}", sol.kkt)))
        }
        status => {
            return Err(Error::ConicNotConverged {
                step,
                status,
                residuals: sol.kkt,
            })
        }
    }
    // the solver meets equality rows only to its tolerance
    let mut u = sol.u;
    for (v, fixed) in u.iter_mut().zip(ops.fixed_values()) {
        if let Some(x) = fixed {
            *v = *x;
        }
    }
    let res = constraint_residuals(kind, u_prev, &u, h, ops)?;
    let diag = StepDiagnostics {
        step,
        iterations: sol.iterations,
        kkt: sol.kkt,
        max_constraint_residual: res.iter().fold(0.0, |m: f64, r| m.max(*r)),
        sup_norm: sup_norm(&u),
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((u, diag))
}

/// `u_n = HeatHalf(ConicStep_h(HeatHalf(u_{n-1})))`.
pub fn strang_step(
    problem: &PdeProblem,
    heat: &HeatSolver,
    u_prev: &[f64],
    h: f64,
    step: usize,
) -> Result<(Vec<f64>, StepDiagnostics)> {
    if heat.h() != h || heat.epsilon() != problem.epsilon {
        return Err(Error::InvalidArgument(format!(
            "heat solver built for (h = {}, eps = {}), step requested with (h = {h}, eps = {})",
            heat.h(),
            heat.epsilon(),
            problem.epsilon
        )));
    }
    let start = Instant::now();
    let half = heat.half_step(u_prev);
    let (mid, mut diag) = conic_step(&problem.kind, &half, h, &problem.ops, &problem.solver, step)?;
    let u = heat.half_step(&mid);
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step });
    }
    diag.sup_norm = sup_norm(&u);
    diag.wall_time = start.elapsed().as_secs_f64();
    Ok((u, diag))
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub h: f64,
    pub epsilon: f64,
    pub kind: String,
    pub n_steps: usize,
    pub snapshot_every: usize,
    pub times: Vec<f64>,
    #[serde(skip)]
    pub fields: Vec<Vec<f64>>,
    /// State after the last step, stored even when it is not a snapshot.
    #[serde(skip)]
    pub final_field: Vec<f64>,
    #[serde(skip)]
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        self.h * self.n_steps as f64
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut s = String::from(
            "step,time,iterations,kkt_primal,kkt_dual,kkt_gap,max_constraint_residual,sup_norm,wall_time_s\n",
        );
        for d in &self.diagnostics {
            writeln!(
                s,
                "{},{:e},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                d.step,
                d.step as f64 * self.h,
                d.iterations,
                d.kkt.primal,
                d.kkt.dual,
                d.kkt.gap,
                d.max_constraint_residual,
                d.sup_norm,
                d.wall_time
            )
            .unwrap();
        }
        s
    }

    /// Writes `snapshot_NNNNN.txt` files (one value per line), `diagnostics.csv`
    /// and `manifest.json` into `dir`. `extra` is embedded in the manifest.
    pub fn export(&self, dir: impl AsRef<Path>, mesh_file: Option<&str>, extra: serde_json::Value) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = Vec::with_capacity(self.fields.len());
        for (k, field) in self.fields.iter().enumerate() {
            let name = format!("snapshot_{k:05}.txt");
            write_field(dir.join(&name), field)?;
            files.push(name);
        }
        let diag = dir.join("diagnostics.csv");
        std::fs::write(&diag, self.diagnostics_csv()).map_err(|e| Error::io(&diag, e))?;
        let manifest = serde_json::json!({
            "kind": self.kind,
            "h": self.h,
            "epsilon": self.epsilon,
            "n_steps": self.n_steps,
            "snapshot_every": self.snapshot_every,
            "times": self.times,
            "snapshots": files,
            "mesh": mesh_file,
            "diagnostics": "diagnostics.csv",
            "config": extra,
        });
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap())
            .map_err(|e| Error::io(&path, e))
    }
}

/// Runs `n_steps` Strang steps from `problem.u0`, keeping every
/// `snapshot_every`-th field.
pub fn evolve(problem: &PdeProblem, h: f64, n_steps: usize, snapshot_every: usize) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if snapshot_every == 0 {
        return Err(Error::InvalidArgument("snapshot_every must be at least 1".into()));
    }
    let heat = HeatSolver::new(&problem.ops, problem.epsilon, h)?;
    let mut u = problem.u0.clone();
    let mut traj = Trajectory {
        h,
        epsilon: problem.epsilon,
        kind: problem.kind.name().to_string(),
        n_steps,
        snapshot_every,
        times: vec![0.0],
        fields: vec![u.clone()],
        final_field: Vec::new(),
        diagnostics: Vec::with_capacity(n_steps),
    };
    for step in 1..=n_steps {
        let (next, diag) = strang_step(problem, &heat, &u, h, step)?;
        log::debug!("step {step}: {} iterations, {}", diag.iterations, diag.kkt);
        u = next;
        traj.diagnostics.push(diag);
        if step % snapshot_every == 0 {
            traj.times.push(step as f64 * h);
            traj.fields.push(u.clone());
        }
    }
    traj.final_field = u;
    Ok(traj)
}

/// Self-convergence orders `R_k = log2(e_k / e_{k+1})` for errors measured at
/// successively halved resolutions.
pub fn estimate_order(errors: &[f64]) -> Result<Vec<f64>> {
    errors
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if b == 0.0 || a == b || !(a / b).is_finite() || a / b <= 0.0 {
                Err(Error::DivisionByZero(a, b))
            } else {
                Ok((a / b).log2())
            }
        })
        .collect()
}

/// Smooth bump: the one-vertex indicator at `center` diffused implicitly for
/// time `t` in [`BUMP_SUBSTEPS`] steps, scaled to unit mass `1^T M u = 1`.
///
/// A single implicit step would leave the logarithmic singularity of the
/// resolvent at the center.
pub fn heat_kernel_bump(ops: &FemOperators, center: usize, t: f64) -> Result<Vec<f64>> {
    if center >= ops.n_vertices() {
        return Err(Error::InvalidArgument(format!("center vertex {center} out of range")));
    }
    let free = ops.clone().without_dirichlet();
    let heat = HeatSolver::new(&free, 1.0, 2.0 * t / BUMP_SUBSTEPS as f64)?;
    let mut u = vec![0.0; ops.n_vertices()];
    u[center] = 1.0;
    for _ in 0..BUMP_SUBSTEPS {
        u = heat.half_step(&u);
    }
    let mass = ops.integrate(&u);
    Ok(u.into_iter().map(|x| x / mass).collect())
}

pub const BUMP_SUBSTEPS: usize = 8;

pub fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

pub fn write_field(path: impl AsRef<Path>, u: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::with_capacity(u.len() * 24);
    for x in u {
        writeln!(s, "{x:e}").unwrap();
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad float `{}`", l.trim())))
        })
        .collect()
}
