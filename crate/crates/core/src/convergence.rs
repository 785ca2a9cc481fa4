//! Self-convergence studies: errors against the finest run and the observed
//! orders `R_k = log2(e_k / e_{k+1})`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::FemOperators;
use crate::integrator::{estimate_order, evolve, PdeProblem};
use crate::mesh::TriangleMesh;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    /// Time step or max edge length of each compared run, coarse to fine.
    pub resolution: Vec<f64>,
    /// Mass-weighted L2 distance to the reference run.
    pub errors: Vec<f64>,
    /// `orders[k]` compares `errors[k]` and `errors[k + 1]`.
    pub orders: Vec<f64>,
    /// Resolution of the reference run.
    pub reference: f64,
}

impl ConvergenceTable {
    /// CSV with columns `<label>,error,R`; `R` is empty on the first row.
    pub fn to_csv(&self, label: &str) -> String {
        let mut s = format!("{label},error,R\n");
        for (k, (r, e)) in self.resolution.iter().zip(&self.errors).enumerate() {
            match k.checked_sub(1).and_then(|j| self.orders.get(j)) {
                Some(order) => writeln!(s, "{r:e},{e:e},{order:.6}").unwrap(),
                None => writeln!(s, "{r:e},{e:e},").unwrap(),
            }
        }
        s
    }
}

/// Runs `problem` to `t_final` with steps `h0 / 2^k` for `k = 0..=n_halvings`
/// and measures each run against the finest at the final time.
pub fn time_self_convergence(
    problem: &PdeProblem,
    h0: f64,
    t_final: f64,
    n_halvings: usize,
) -> Result<ConvergenceTable> {
    if n_halvings < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 halvings, got {n_halvings}"
        )));
    }
    if !(h0 > 0.0 && t_final > 0.0) {
        return Err(Error::InvalidArgument("h0 and t_final must be positive".into()));
    }
    let n0 = (t_final / h0).round();
    if n0 < 1.0 || (n0 * h0 - t_final).abs() > 1e-9 * t_final {
        return Err(Error::InvalidArgument(format!(
            "t_final = {t_final} is not a whole number of steps of {h0}"
        )));
    }
    let n0 = n0 as usize;

    let mut finals = Vec::with_capacity(n_halvings + 1);
    let mut hs = Vec::with_capacity(n_halvings + 1);
    for k in 0..=n_halvings {
        let h = h0 / (1u64 << k) as f64;
        let steps = n0 << k;
        log::info!("time convergence: h = {h:e}, {steps} steps");
        let traj = evolve(problem, h, steps, steps)?;
        finals.push(traj.final_field);
        hs.push(h);
    }
    let reference = finals.pop().unwrap();
    let reference_h = hs.pop().unwrap();
    let errors: Vec<f64> = finals
        .iter()
        .map(|u| {
            let d: Vec<f64> = u.iter().zip(&reference).map(|(a, b)| a - b).collect();
            problem.ops.mass_norm(&d)
        })
        .collect();
    let orders = estimate_order(&errors)?;
    Ok(ConvergenceTable {
        resolution: hs,
        errors,
        orders,
        reference: reference_h,
    })
}

/// Evolves the problem built by `make` on every mesh of a refinement ladder
/// (coarse to fine) for `n_steps` steps of `h`. The finest solution is sampled
/// at each coarser mesh's vertices by nearest vertex.
pub fn space_self_convergence<F>(
    meshes: &[TriangleMesh],
    h: f64,
    n_steps: usize,
    mut make: F,
) -> Result<ConvergenceTable>
where
    F: FnMut(&TriangleMesh) -> Result<PdeProblem>,
{
    if meshes.len() < 2 {
        return Err(Error::InvalidArgument("need at least two meshes".into()));
    }
    let mut runs: Vec<(Vec<f64>, FemOperators)> = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        log::info!("space convergence: {} vertices", mesh.n_vertices());
        let problem = make(mesh)?;
        let traj = evolve(&problem, h, n_steps, n_steps)?;
        runs.push((traj.final_field, problem.ops));
    }
    let (fine, _) = runs.pop().unwrap();
    let fine_mesh = meshes.last().unwrap();
    let mut errors = Vec::with_capacity(runs.len());
    for ((u, ops), mesh) in runs.iter().zip(meshes) {
        let d: Vec<f64> = mesh
            .vertices()
            .iter()
            .zip(u)
            .map(|(p, x)| x - fine[fine_mesh.nearest_vertex(*p)])
            .collect();
        errors.push(ops.mass_norm(&d));
    }
    let orders = estimate_order(&errors)?;
    Ok(ConvergenceTable {
        resolution: meshes[..runs.len()].iter().map(TriangleMesh::max_edge_length).collect(),
        errors,
        orders,
        reference: fine_mesh.max_edge_length(),
    })
}
