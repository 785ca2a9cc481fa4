//! The implicit Hamilton-Jacobi step as a second-order cone program.
//!
//! Every program minimizes `c^T x` over `x = [u; aux]` subject to linear rows
//! `a^T x + b >= 0`, equality rows `a^T x + b = 0` and cones
//! `||A x + c||_2 <= d^T x + e`.

mod assemble;
mod solve;
mod text;

pub use assemble::{assemble_step, constraint_residuals};
pub use solve::{solve_conic, verify_kkt, verify_point};

use serde::{Deserialize, Serialize};

/// Sparse affine form `sum coeffs[k].1 * x[coeffs[k].0] + offset`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, f64)>,
    pub offset: f64,
}

impl LinearRow {
    pub fn new(mut coeffs: Vec<(usize, f64)>, offset: f64) -> LinearRow {
        coeffs.sort_by_key(|c| c.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (i, v) in coeffs {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|c| c.1 != 0.0);
        LinearRow {
            coeffs: merged,
            offset,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, v)| v * x[i]).sum::<f64>() + self.offset
    }
}

/// `||rows(x)||_2 <= bound(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SocConstraint {
    pub bound: LinearRow,
    pub rows: Vec<LinearRow>,
}

impl SocConstraint {
    /// Cone dimension including the bound entry.
    pub fn dim(&self) -> usize {
        self.rows.len() + 1
    }

    /// Signed violation `||A x + c|| - (d^T x + e)`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let n = self.rows.iter().map(|r| r.eval(x).powi(2)).sum::<f64>().sqrt();
        n - self.bound.eval(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub n_vars: usize,
    /// Leading variables holding the vertex field.
    pub n_field: usize,
    pub objective: Vec<f64>,
    pub equalities: Vec<LinearRow>,
    pub inequalities: Vec<LinearRow>,
    pub socs: Vec<SocConstraint>,
}

impl ConicProgram {
    /// Total number of dual entries (one per equality and inequality row,
    /// `dim` per cone).
    pub fn n_duals(&self) -> usize {
        self.equalities.len()
            + self.inequalities.len()
            + self.socs.iter().map(SocConstraint::dim).sum::<usize>()
    }

    pub(crate) fn check(&self) -> crate::Result<()> {
        use crate::Error;
        if self.objective.len() != self.n_vars || self.n_field > self.n_vars {
            return Err(Error::InvalidArgument("objective length differs from n_vars".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("objective is not finite".into()));
        }
        let rows = self
            .equalities
            .iter()
            .chain(&self.inequalities)
            .chain(self.socs.iter().flat_map(|s| std::iter::once(&s.bound).chain(&s.rows)));
        for r in rows {
            if !r.offset.is_finite() || r.coeffs.iter().any(|&(i, v)| i >= self.n_vars || !v.is_finite())
            {
                return Err(Error::InvalidArgument("malformed or non-finite program row".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIters,
    Infeasible,
}

/// Normalized optimality residuals of a primal-dual pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

impl std::fmt::Display for KktResiduals {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "primal {:.3e}, dual {:.3e}, gap {:.3e}", self.primal, self.dual, self.gap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub eps_primal: f64,
    pub eps_dual: f64,
    pub eps_gap: f64,
    pub max_iters: u32,
}

/// Square root of machine epsilon, about 1.49e-8.
pub const DEFAULT_EPS: f64 = 1.4901161193847656e-8;

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps_primal: DEFAULT_EPS,
            eps_dual: DEFAULT_EPS,
            eps_gap: DEFAULT_EPS,
            max_iters: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSolution {
    pub u: Vec<f64>,
    pub aux: Vec<f64>,
    /// Multipliers in row order: equalities, inequalities, cones.
    pub duals: Vec<f64>,
    pub status: SolveStatus,
    pub kkt: KktResiduals,
    pub iterations: u32,
}

impl StepSolution {
    pub fn x(&self) -> Vec<f64> {
        let mut x = self.u.clone();
        x.extend_from_slice(&self.aux);
        x
    }
}
