use super::{ConicProgram, LinearRow, SocConstraint};
use crate::error::{check_len, Error, Result};
use crate::fem::FemOperators;
use crate::hamiltonian::{eval_h, HamiltonianKind};
use crate::mesh::{cross, dot, normalize, Vec3};

/// Two linear forms giving `scale * Gu` on face `f` in an orthonormal tangent basis.
fn tangent_gradient_rows(ops: &FemOperators, f: usize, scale: f64) -> [Vec<(usize, f64)>; 2] {
    let grads = ops.hat_gradients()[f];
    let t1 = normalize(grads[0]);
    let t2 = cross(ops.face_normals()[f], t1);
    let tri = ops.faces()[f];
    let row = |t: Vec3| (0..3).map(|k| (tri[k], scale * dot(grads[k], t))).collect();
    [row(t1), row(t2)]
}

/// Coefficients of `omega_i * sum_j a_j (phi_j . (Gu)_j)` on the field variables.
fn advection_coeffs(ops: &FemOperators, phi: &[Vec3], i: usize, scale: f64, out: &mut Vec<(usize, f64)>) {
    let w = ops.omega()[i];
    for &f in &ops.one_ring()[i] {
        let a = ops.face_areas()[f];
        let tri = ops.faces()[f];
        for k in 0..3 {
            out.push((tri[k], scale * w * a * dot(phi[f], ops.hat_gradients()[f][k])));
        }
    }
}

/// Builds the convex program for one implicit step of `u_t + H(u) = 0`:
/// minimize `sum_i M_i u_i` subject to one relaxed row `u_i - u_prev_i + h H_i(u) >= 0`
/// per free vertex, with equality rows at Dirichlet vertices.
///
/// The per-face auxiliaries are `y_j = h z_j >= h |(Gu)_j|^2` for nonlinear
/// diffusion and `t_j >= |(Gu)_j|` for the G-equation.
pub fn assemble_step(
    kind: &HamiltonianKind,
    u_prev: &[f64],
    h: f64,
    ops: &FemOperators,
) -> Result<ConicProgram> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {h}")));
    }
    let nv = ops.n_vertices();
    let nf = ops.n_faces();
    check_len(nv, u_prev.len())?;
    kind.check(ops)?;

    let n_aux = match kind {
        HamiltonianKind::FokkerPlanck(_) => 0,
        _ => nf,
    };
    let n_vars = nv + n_aux;
    // discrete volume integral of u, scaled so the weights average to one
    let mean_mass = ops.mass().iter().sum::<f64>() / nv as f64;
    let mut objective = vec![0.0; n_vars];
    for (c, m) in objective.iter_mut().zip(ops.mass()) {
        *c = m / mean_mass;
    }

    let mut equalities = Vec::new();
    let mut inequalities = Vec::with_capacity(nv);
    let divergence = match kind {
        HamiltonianKind::FokkerPlanck(phi) => Some(ops.pointwise_divergence(phi.as_slice())),
        _ => None,
    };

    for i in 0..nv {
        if let Some(val) = ops.fixed_values()[i] {
            equalities.push(LinearRow::new(vec![(i, 1.0)], -val));
            continue;
        }
        let mut coeffs = vec![(i, 1.0)];
        match kind {
            HamiltonianKind::NonlinearDiffusion => {
                let w = ops.omega()[i];
                for &f in &ops.one_ring()[i] {
                    coeffs.push((nv + f, -w * ops.face_areas()[f]));
                }
            }
            HamiltonianKind::GEquation(phi) => {
                advection_coeffs(ops, phi.as_slice(), i, h, &mut coeffs);
                let w = ops.omega()[i];
                for &f in &ops.one_ring()[i] {
                    coeffs.push((nv + f, -h * w * ops.face_areas()[f]));
                }
            }
            HamiltonianKind::FokkerPlanck(phi) => {
                advection_coeffs(ops, phi.as_slice(), i, h, &mut coeffs);
                coeffs.push((i, h * divergence.as_ref().unwrap()[i]));
            }
        }
        inequalities.push(LinearRow::new(coeffs, -u_prev[i]));
    }

    let mut socs = Vec::with_capacity(n_aux);
    match kind {
        // y_j >= h |(Gu)_j|^2 as the rotated cone
        // ||((y/k - k)/2, sqrt(h) Gu)|| <= (y/k + k)/2 with k near sqrt(h) |Gu|,
        // so every entry of the cone is on the scale of sqrt(h) |Gu|.
        HamiltonianKind::NonlinearDiffusion => {
            let g_prev = ops.gradient(u_prev);
            let sh = h.sqrt();
            for f in 0..nf {
                let y = nv + f;
                let k = sh * dot(g_prev[f], g_prev[f]).sqrt().max(1.0);
                let [g1, g2] = tangent_gradient_rows(ops, f, sh);
                socs.push(SocConstraint {
                    bound: LinearRow::new(vec![(y, 0.5 / k)], 0.5 * k),
                    rows: vec![
                        LinearRow::new(vec![(y, 0.5 / k)], -0.5 * k),
                        LinearRow::new(g1, 0.0),
                        LinearRow::new(g2, 0.0),
                    ],
                });
            }
        }
        // t_j >= |(Gu)_j|
        HamiltonianKind::GEquation(_) => {
            for f in 0..nf {
                let [g1, g2] = tangent_gradient_rows(ops, f, 1.0);
                socs.push(SocConstraint {
                    bound: LinearRow::new(vec![(nv + f, 1.0)], 0.0),
                    rows: vec![LinearRow::new(g1, 0.0), LinearRow::new(g2, 0.0)],
                });
            }
        }
        HamiltonianKind::FokkerPlanck(_) => {}
    }

    Ok(ConicProgram {
        n_vars,
        n_field: nv,
        objective,
        equalities,
        inequalities,
        socs,
    })
}

/// `|u_i - u_prev_i + h H_i(u)|` at free vertices, zero at fixed ones.
///
/// This is the unrelaxed implicit-step residual, so it measures how tight the
/// convex relaxation is at `u`.
pub fn constraint_residuals(
    kind: &HamiltonianKind,
    u_prev: &[f64],
    u: &[f64],
    h: f64,
    ops: &FemOperators,
) -> Result<Vec<f64>> {
    check_len(u.len(), u_prev.len())?;
    let hv = eval_h(kind, u, ops)?;
    Ok((0..u.len())
        .map(|i| {
            if ops.is_free(i) {
                (u[i] - u_prev[i] + h * hv[i]).abs()
            } else {
                0.0
            }
        })
        .collect())
}
