use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::{ConicProgram, KktResiduals, LinearRow, SolveStatus, SolverConfig, StepSolution};
use crate::error::{Error, Result};

/// Solves `program` with an interior-point method and certifies the result
/// with [`verify_point`]. The status is `Optimal` only if our own residuals
/// meet `config`; anything short of that comes back as `MaxIters` with the
/// best iterate.
pub fn solve_conic(program: &ConicProgram, config: &SolverConfig) -> Result<StepSolution> {
    program.check()?;
    if let Some(msg) = contradictory_equalities(program) {
        log::warn!("presolve: {msg}");
        let x = vec![0.0; program.n_vars];
        let duals = vec![0.0; program.n_duals()];
        return Ok(StepSolution {
            kkt: verify_point(program, &x, &duals),
            u: x[..program.n_field].to_vec(),
            aux: x[program.n_field..].to_vec(),
            duals,
            status: SolveStatus::Infeasible,
            iterations: 0,
        });
    }

    let n = program.n_vars;
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut b = Vec::with_capacity(program.n_duals());
    let mut push = |row: &LinearRow, rows: &mut Vec<usize>, b: &mut Vec<f64>| {
        let r = b.len();
        for &(j, v) in &row.coeffs {
            rows.push(r);
            cols.push(j);
            vals.push(-v);
        }
        b.push(row.offset);
    };
    let mut cones = Vec::new();
    if !program.equalities.is_empty() {
        for row in &program.equalities {
            push(row, &mut rows, &mut b);
        }
        cones.push(SupportedConeT::ZeroConeT(program.equalities.len()));
    }
    if !program.inequalities.is_empty() {
        for row in &program.inequalities {
            push(row, &mut rows, &mut b);
        }
        cones.push(SupportedConeT::NonnegativeConeT(program.inequalities.len()));
    }
    for soc in &program.socs {
        push(&soc.bound, &mut rows, &mut b);
        for row in &soc.rows {
            push(row, &mut rows, &mut b);
        }
        cones.push(SupportedConeT::SecondOrderConeT(soc.dim()));
    }
    let m = b.len();
    let a = CscMatrix::new_from_triplets(m, n, rows, cols, vals);
    let p = CscMatrix::zeros((n, n));

    // Run the interior point method a decade tighter than the acceptance test.
    // Its own stopping rule measures the duality gap, which can sit well below
    // the complementarity s^T z we certify, so retry tighter when needed, and
    // fall back to unscaled data or lighter regularization when it stalls.
    let base = DefaultSettings {
        max_iter: config.max_iters,
        verbose: false,
        tol_feas: 0.1 * config.eps_primal,
        tol_gap_abs: 0.1 * config.eps_gap,
        tol_gap_rel: 0.1 * config.eps_gap,
        tol_ktratio: 1e-7,
        max_threads: 1,
        ..DefaultSettings::default()
    };
    let tight = DefaultSettings {
        tol_feas: 1e-3 * config.eps_primal,
        tol_gap_abs: 1e-3 * config.eps_gap,
        tol_gap_rel: 1e-3 * config.eps_gap,
        ..base.clone()
    };
    let attempts = [
        base,
        tight.clone(),
        DefaultSettings {
            equilibrate_enable: false,
            ..tight.clone()
        },
        DefaultSettings {
            equilibrate_max_iter: 50,
            equilibrate_min_scaling: 1e-8,
            equilibrate_max_scaling: 1e8,
            ..tight.clone()
        },
        DefaultSettings {
            static_regularization_constant: 1e-11,
            max_step_fraction: 0.9,
            ..tight
        },
    ];
    let mut best: Option<(KktResiduals, Vec<f64>, Vec<f64>)> = None;
    let mut total_iters = 0;
    for settings in attempts {
        let mut solver = DefaultSolver::new(&p, &program.objective, &a, &b, &cones, settings)
            .map_err(|e| Error::InvalidArgument(format!("conic solver setup: {e}")))?;
        solver.solve();
        let sol = &solver.solution;
        total_iters += sol.iterations;
        let kkt = verify_point(program, &sol.x, &sol.z);
        let usable = matches!(sol.status, SolverStatus::Solved | SolverStatus::AlmostSolved);
        let certified = usable
            && kkt.primal <= config.eps_primal
            && kkt.dual <= config.eps_dual
            && kkt.gap <= config.eps_gap;
        if certified {
            return Ok(StepSolution {
                u: sol.x[..program.n_field].to_vec(),
                aux: sol.x[program.n_field..].to_vec(),
                duals: sol.z.clone(),
                status: SolveStatus::Optimal,
                kkt,
                iterations: total_iters,
            });
        }
        log::debug!(
            "conic solve ended with {:?} (gap abs {:.2e}, rel {:.2e}); {kkt}",
            sol.status,
            solver.info.gap_abs,
            solver.info.gap_rel,
        );
        if best.as_ref().is_none_or(|b| kkt.max() < b.0.max()) {
            best = Some((kkt, sol.x.clone(), sol.z.clone()));
        }
    }
    let (kkt, x, z) = best.expect("at least one solve ran");
    Ok(StepSolution {
        u: x[..program.n_field].to_vec(),
        aux: x[program.n_field..].to_vec(),
        duals: z,
        status: SolveStatus::MaxIters,
        kkt,
        iterations: total_iters,
    })
}

/// Detects single-variable equality rows that pin a variable to two values,
/// or empty equality rows with a nonzero offset.
fn contradictory_equalities(program: &ConicProgram) -> Option<String> {
    let mut pinned: Vec<Option<f64>> = vec![None; program.n_vars];
    for row in &program.equalities {
        match row.coeffs.as_slice() {
            [] if row.offset != 0.0 => return Some(format!("equality 0 = {}", row.offset)),
            &[(j, a)] => {
                let v = -row.offset / a;
                match pinned[j] {
                    Some(prev) if (prev - v).abs() > 1e-12 * (1.0 + prev.abs()) => {
                        return Some(format!("variable {j} fixed to both {prev} and {v}"));
                    }
                    _ => pinned[j] = Some(v),
                }
            }
            _ => {}
        }
    }
    None
}

/// Optimality residuals of `solution` recomputed from the program data.
pub fn verify_kkt(program: &ConicProgram, solution: &StepSolution) -> KktResiduals {
    verify_point(program, &solution.x(), &solution.duals)
}

/// Residuals of a primal point `x` and multipliers `z` (missing multipliers
/// are read as zero). With slacks `s = a^T x + b` and cone slacks
/// `(d^T x + e, A x + c)`:
///
/// - primal: largest row or cone violation over `1 + max(||b||_inf, ||a^T x||_inf)`;
/// - dual: the largest `|c_j - sum_r z_r a_rj|` over `1 + |c_j| + sum_r |z_r a_rj|`,
///   plus the dual-cone violation of `z` (relative to `1 + |z_0|` per cone);
/// - gap: `|s^T z|` over `1 + |c^T x| + |b^T z|`.
pub fn verify_point(program: &ConicProgram, x: &[f64], z: &[f64]) -> KktResiduals {
    let zr = |r: usize| z.get(r).copied().unwrap_or(0.0);
    let mut b_inf: f64 = 0.0;
    let mut ax_inf: f64 = 0.0;
    let mut primal: f64 = 0.0;
    let mut cone_dual: f64 = 0.0;
    let mut s_dot_z = 0.0;
    let mut b_dot_z = 0.0;
    let mut atz = vec![0.0; program.n_vars];
    // sum of |A_ij z_i| per variable, the scale stationarity can be resolved to
    let mut atz_abs = vec![0.0; program.n_vars];
    let mut r = 0;

    let mut absorb = |row: &LinearRow, r: usize| -> f64 {
        for &(j, v) in &row.coeffs {
            atz[j] += zr(r) * v;
            atz_abs[j] += (zr(r) * v).abs();
        }
        b_inf = b_inf.max(row.offset.abs());
        b_dot_z += row.offset * zr(r);
        let s = row.eval(x);
        ax_inf = ax_inf.max((s - row.offset).abs());
        s
    };

    for row in &program.equalities {
        let s = absorb(row, r);
        primal = primal.max(s.abs());
        r += 1;
    }
    for row in &program.inequalities {
        let s = absorb(row, r);
        primal = primal.max(-s);
        cone_dual = cone_dual.max(-zr(r));
        s_dot_z += s * zr(r);
        r += 1;
    }
    for soc in &program.socs {
        let s0 = absorb(&soc.bound, r);
        let z0 = zr(r);
        s_dot_z += s0 * z0;
        let mut s_rest = 0.0;
        let mut z_rest = 0.0;
        for (k, row) in soc.rows.iter().enumerate() {
            let s = absorb(row, r + 1 + k);
            let zk = zr(r + 1 + k);
            s_rest += s * s;
            z_rest += zk * zk;
            s_dot_z += s * zk;
        }
        primal = primal.max(s_rest.sqrt() - s0);
        cone_dual = cone_dual.max((z_rest.sqrt() - z0) / (1.0 + z0.abs()));
        r += soc.dim();
    }

    let c_dot_x: f64 = program.objective.iter().zip(x).map(|(c, v)| c * v).sum();
    let stationarity = program
        .objective
        .iter()
        .zip(atz.iter().zip(&atz_abs))
        .fold(0.0f64, |m, (c, (g, g_abs))| m.max((c - g).abs() / (1.0 + c.abs() + g_abs)));
    KktResiduals {
        primal: primal.max(0.0) / (1.0 + b_inf.max(ax_inf)),
        dual: stationarity + cone_dual.max(0.0),
        gap: s_dot_z.abs() / (1.0 + c_dot_x.abs() + b_dot_z.abs()),
    }
}
