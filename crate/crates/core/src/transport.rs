//! Entropic optimal transport with heat-kernel convolutions.
//!
//! Barycenters use the convolutional Sinkhorn iteration of Solomon et al.
//! (2015). With scalings `v_i`, `w_i`, input densities `mu_i` and kernel `K`
//! (heat diffusion for time `gamma`):
//!
//! ```text
//! w_i <- mu_i / K v_i
//! d_i <- v_i * K w_i
//! mu  <- prod_i d_i^lambda_i
//! v_i <- v_i * mu / d_i
//! ```
//!
//! In log-domain mode every quantity is stored as its logarithm and `log K exp`
//! is evaluated by the log-domain heat flow `u_t - |grad u|^2 = Lap u`, so the
//! scalings never leave floating point range.

use serde::{Deserialize, Serialize};

use crate::conic::SolverConfig;
use crate::error::{check_len, Error, Result};
use crate::fem::FemOperators;
use crate::hamiltonian::HamiltonianKind;
use crate::integrator::{strang_step, HeatSolver, PdeProblem};

/// `log` of this replaces `log 0`.
pub const LOG_FLOOR: f64 = 1e-300;

/// Nonnegative per-vertex density with unit mass `sum_i M_i mu_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    values: Vec<f64>,
}

impl Distribution {
    /// Normalizes `values` to unit mass.
    pub fn new(values: Vec<f64>, ops: &FemOperators) -> Result<Distribution> {
        check_len(ops.n_vertices(), values.len())?;
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("densities must be finite and nonnegative".into()));
        }
        let mass = ops.integrate(&values);
        if !(mass > 0.0) {
            return Err(Error::InvalidArgument("distribution has zero mass".into()));
        }
        Ok(Distribution {
            values: values.into_iter().map(|v| v / mass).collect(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinkhornMode {
    Linear,
    LogDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SinkhornConfig {
    /// Entropy coefficient, used as the total diffusion time of each kernel.
    pub gamma: f64,
    pub max_iters: usize,
    /// Time steps per kernel application.
    pub n_sub: usize,
    pub mode: SinkhornMode,
    /// Stop once the largest L1 marginal error falls below this.
    pub tol: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        SinkhornConfig {
            gamma: 1e-3,
            max_iters: 500,
            n_sub: 1,
            mode: SinkhornMode::LogDomain,
            tol: 1e-6,
        }
    }
}

impl SinkhornConfig {
    fn check(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.max_iters == 0 || self.n_sub == 0 {
            return Err(Error::InvalidArgument("iteration counts must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Heat flow for a fixed total time, applied in the linear domain.
pub struct LinearHeat {
    heat: HeatSolver,
    n_sub: usize,
}

impl LinearHeat {
    pub fn new(ops: &FemOperators, t_total: f64, n_sub: usize) -> Result<LinearHeat> {
        if n_sub == 0 {
            return Err(Error::InvalidArgument("n_sub must be at least 1".into()));
        }
        let free = ops.clone().without_dirichlet();
        // a half step of a solver built for 2h is one implicit step of size h
        let heat = HeatSolver::new(&free, 1.0, 2.0 * t_total / n_sub as f64)?;
        Ok(LinearHeat { heat, n_sub })
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut v = v.to_vec();
        for _ in 0..self.n_sub {
            v = self.heat.half_step(&v);
        }
        v
    }
}

/// Dual tolerance of the kernel solves in [`LogHeat`]. Primal feasibility and
/// the gap keep the default tolerance; the dual residual of these programs
/// can stall above the default once log-densities span thousands of units.
pub const KERNEL_EPS_DUAL: f64 = 1e-6;

/// Heat flow for a fixed total time, applied to logarithms: `n_sub` Strang
/// steps of `u_t - |grad u|^2 = Lap u`.
pub struct LogHeat {
    problem: PdeProblem,
    heat: HeatSolver,
    h: f64,
    n_sub: usize,
}

impl LogHeat {
    pub fn new(ops: &FemOperators, t_total: f64, n_sub: usize) -> Result<LogHeat> {
        if !(t_total > 0.0 && t_total.is_finite()) {
            return Err(Error::InvalidArgument(format!("diffusion time must be positive, got {t_total}")));
        }
        if n_sub == 0 {
            return Err(Error::InvalidArgument("n_sub must be at least 1".into()));
        }
        let ops = ops.clone().without_dirichlet();
        let h = t_total / n_sub as f64;
        let heat = HeatSolver::new(&ops, 1.0, h)?;
        let u0 = vec![0.0; ops.n_vertices()];
        let mut problem = PdeProblem::new(HamiltonianKind::NonlinearDiffusion, 1.0, u0, ops)?;
        problem.solver.eps_dual = KERNEL_EPS_DUAL;
        Ok(LogHeat {
            problem,
            heat,
            h,
            n_sub,
        })
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.problem.solver = solver;
        self
    }

    /// Shifts the field so its maximum is zero (the flow commutes with adding
    /// constants) and replaces `-inf` by `log(LOG_FLOOR)` before stepping.
    /// Finite values are kept however small: Sinkhorn scalings need their
    /// far tails resolved relative to each other.
    pub fn apply(&self, u_log: &[f64]) -> Result<Vec<f64>> {
        check_len(self.problem.ops.n_vertices(), u_log.len())?;
        if u_log.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::NonFinite { step: 0 });
        }
        let shift = u_log.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
        if shift == f64::NEG_INFINITY {
            return Err(Error::InvalidArgument("log field is -inf everywhere".into()));
        }
        let floor = LOG_FLOOR.ln();
        let mut u: Vec<f64> = u_log
            .iter()
            .map(|v| if v.is_finite() { v - shift } else { floor })
            .collect();
        for step in 1..=self.n_sub {
            u = strang_step(&self.problem, &self.heat, &u, self.h, step)?.0;
        }
        u.iter_mut().for_each(|v| *v += shift);
        Ok(u)
    }
}

/// Log-domain heat diffusion of `u_log` for time `t_total` in `n_sub` steps.
pub fn log_heat(u_log: &[f64], t_total: f64, n_sub: usize, ops: &FemOperators) -> Result<Vec<f64>> {
    LogHeat::new(ops, t_total, n_sub)?.apply(u_log)
}

#[derive(Debug, Clone)]
pub struct BarycenterResult {
    pub barycenter: Distribution,
    /// Largest L1 marginal error after each iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl BarycenterResult {
    pub fn residuals_csv(&self) -> String {
        let mut s = String::from("iteration,marginal_residual\n");
        for (k, r) in self.residuals.iter().enumerate() {
            s.push_str(&format!("{},{r:e}\n", k + 1));
        }
        s
    }
}

/// Entropic Wasserstein barycenter of `inputs` with simplex `weights`.
pub fn barycenter(
    inputs: &[Distribution],
    weights: &[f64],
    cfg: &SinkhornConfig,
    ops: &FemOperators,
) -> Result<BarycenterResult> {
    cfg.check()?;
    if inputs.len() < 2 {
        return Err(Error::InvalidArgument("a barycenter needs at least two inputs".into()));
    }
    check_len(inputs.len(), weights.len())?;
    if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("weights must be nonnegative and sum to 1".into()));
    }
    for mu in inputs {
        check_len(ops.n_vertices(), mu.values.len())?;
    }
    match cfg.mode {
        SinkhornMode::Linear => barycenter_linear(inputs, weights, cfg, ops),
        SinkhornMode::LogDomain => barycenter_log(inputs, weights, cfg, ops),
    }
}

/// Barycenter with weights `(1 - t, t)`.
pub fn interpolate(
    mu0: &Distribution,
    mu1: &Distribution,
    t: f64,
    cfg: &SinkhornConfig,
    ops: &FemOperators,
) -> Result<BarycenterResult> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t must lie in [0, 1], got {t}")));
    }
    barycenter(&[mu0.clone(), mu1.clone()], &[1.0 - t, t], cfg, ops)
}

fn l1_error(ops: &FemOperators, a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).zip(ops.mass()).map(|((x, y), m)| m * (x - y).abs()).sum()
}

fn underflow_check(what: &str, iter: usize, v: &[f64]) -> Result<()> {
    if let Some(i) = v.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::NumericalUnderflow(format!(
            "{what} has value {} at vertex {i} in iteration {iter}",
            v[i]
        )));
    }
    Ok(())
}

fn barycenter_linear(
    inputs: &[Distribution],
    weights: &[f64],
    cfg: &SinkhornConfig,
    ops: &FemOperators,
) -> Result<BarycenterResult> {
    let kernel = LinearHeat::new(ops, cfg.gamma, cfg.n_sub)?;
    let n = ops.n_vertices();
    let k = inputs.len();
    let mut v = vec![vec![1.0; n]; k];
    let mut w = vec![vec![1.0; n]; k];
    let mut mu = vec![0.0; n];
    let mut residuals = Vec::new();
    for iter in 1..=cfg.max_iters {
        let mut d = Vec::with_capacity(k);
        for i in 0..k {
            let kv = kernel.apply(&v[i]);
            underflow_check("kernel of v", iter, &kv)?;
            w[i] = inputs[i].values.iter().zip(&kv).map(|(m, x)| m / x).collect();
            let kw = kernel.apply(&w[i]);
            underflow_check("kernel of w", iter, &kw)?;
            d.push(v[i].iter().zip(&kw).map(|(a, b)| a * b).collect::<Vec<f64>>());
        }
        for (j, m) in mu.iter_mut().enumerate() {
            *m = (0..k).map(|i| d[i][j].powf(weights[i])).product();
        }
        underflow_check("barycenter", iter, &mu)?;
        let mut res: f64 = 0.0;
        for i in 0..k {
            for j in 0..n {
                v[i][j] *= mu[j] / d[i][j];
            }
            underflow_check("scaling", iter, &v[i])?;
            let kv = kernel.apply(&v[i]);
            let marginal: Vec<f64> = w[i].iter().zip(&kv).map(|(a, b)| a * b).collect();
            res = res.max(l1_error(ops, &marginal, &inputs[i].values));
        }
        residuals.push(res);
        if !res.is_finite() {
            return Err(Error::NumericalUnderflow(format!("marginal residual {res} in iteration {iter}")));
        }
        if res <= cfg.tol {
            break;
        }
    }
    finish(mu, residuals, cfg, ops)
}

fn barycenter_log(
    inputs: &[Distribution],
    weights: &[f64],
    cfg: &SinkhornConfig,
    ops: &FemOperators,
) -> Result<BarycenterResult> {
    let kernel = LogHeat::new(ops, cfg.gamma, cfg.n_sub)?;
    let n = ops.n_vertices();
    let k = inputs.len();
    let floor = LOG_FLOOR.ln();
    let log_mu_in: Vec<Vec<f64>> = inputs
        .iter()
        .map(|m| m.values.iter().map(|x| x.ln().max(floor)).collect())
        .collect();
    let mut lv = vec![vec![0.0; n]; k];
    let mut lw = vec![vec![0.0; n]; k];
    let mut lmu = vec![0.0; n];
    let mut residuals = Vec::new();
    for iter in 1..=cfg.max_iters {
        let mut ld = Vec::with_capacity(k);
        for i in 0..k {
            let kv = kernel.apply(&lv[i])?;
            lw[i] = log_mu_in[i].iter().zip(&kv).map(|(m, x)| m - x).collect();
            let kw = kernel.apply(&lw[i])?;
            ld.push(lv[i].iter().zip(&kw).map(|(a, b)| a + b).collect::<Vec<f64>>());
        }
        for (j, m) in lmu.iter_mut().enumerate() {
            *m = (0..k).map(|i| weights[i] * ld[i][j]).sum();
        }
        let mut res: f64 = 0.0;
        for i in 0..k {
            for j in 0..n {
                lv[i][j] += lmu[j] - ld[i][j];
            }
            let kv = kernel.apply(&lv[i])?;
            let marginal: Vec<f64> = lw[i].iter().zip(&kv).map(|(a, b)| (a + b).exp()).collect();
            res = res.max(l1_error(ops, &marginal, &inputs[i].values));
        }
        if lmu.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::NonFinite { step: iter });
        }
        residuals.push(res);
        if res <= cfg.tol {
            break;
        }
    }
    // normalize in the log domain before leaving it
    let shift = lmu.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x));
    let mu: Vec<f64> = lmu.iter().map(|x| (x - shift).exp()).collect();
    finish(mu, residuals, cfg, ops)
}

fn finish(mu: Vec<f64>, residuals: Vec<f64>, cfg: &SinkhornConfig, ops: &FemOperators) -> Result<BarycenterResult> {
    let converged = residuals.last().is_some_and(|r| *r <= cfg.tol);
    Ok(BarycenterResult {
        barycenter: Distribution::new(mu, ops)?,
        residuals,
        converged,
    })
}
