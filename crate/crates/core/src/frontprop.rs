//! Periodic-grid reference schemes for the unit-speed front `u_t = |grad u|`
//! and their comparison with the conic G-equation step.
//!
//! For this sign the viscosity solution is `u(x, t) = max_{|y - x| <= t} u0(y)`:
//! maxima stay put and minima rise. The Godunov upwind gradient that matches
//! it takes `max(D+, 0)` and `min(D-, 0)` on each axis.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{BoundaryCondition, FemOperators};
use crate::hamiltonian::{FaceVectorField, HamiltonianKind};
use crate::integrator::{strang_step, sup_norm, HeatSolver, PdeProblem};
use crate::mesh::MeshKind;

/// Node values on an `nx` by `ny` lattice with spacing `dx`, wrapped in both
/// axes. Node `(i, j)` sits at `(i dx, j dx)` and is stored at `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    nx: usize,
    ny: usize,
    dx: f64,
    values: Vec<f64>,
}

impl PeriodicGrid {
    pub fn new(nx: usize, ny: usize, dx: f64, values: Vec<f64>) -> Result<PeriodicGrid> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidArgument(format!(
                "periodic grid needs at least 3 x 3 nodes, got {nx} x {ny}"
            )));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {dx}")));
        }
        crate::error::check_len(nx * ny, values.len())?;
        Ok(PeriodicGrid { nx, ny, dx, values })
    }

    pub fn from_fn(nx: usize, ny: usize, dx: f64, f: impl Fn(f64, f64) -> f64) -> Result<PeriodicGrid> {
        let values = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| f(i as f64 * dx, j as f64 * dx))
            .collect();
        PeriodicGrid::new(nx, ny, dx, values)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at `(i, j)` with indices taken modulo the grid size.
    pub fn at(&self, i: isize, j: isize) -> f64 {
        let i = i.rem_euclid(self.nx as isize) as usize;
        let j = j.rem_euclid(self.ny as isize) as usize;
        self.values[j * self.nx + i]
    }

    /// The field moved by whole cells: `out(i, j) = self(i - di, j - dj)`.
    pub fn shifted(&self, di: isize, dj: isize) -> PeriodicGrid {
        self.map_nodes(|g, i, j| g.at(i - di, j - dj))
    }

    fn map_nodes(&self, f: impl Fn(&PeriodicGrid, isize, isize) -> f64) -> PeriodicGrid {
        let values = (0..self.ny as isize)
            .flat_map(|j| (0..self.nx as isize).map(move |i| (i, j)))
            .map(|(i, j)| f(self, i, j))
            .collect();
        PeriodicGrid {
            values,
            ..*self
        }
    }

    /// One-sided differences `(D-x, D+x, D-y, D+y)` at `(i, j)`.
    fn differences(&self, i: isize, j: isize) -> [f64; 4] {
        let u = self.at(i, j);
        [
            (u - self.at(i - 1, j)) / self.dx,
            (self.at(i + 1, j) - u) / self.dx,
            (u - self.at(i, j - 1)) / self.dx,
            (self.at(i, j + 1) - u) / self.dx,
        ]
    }
}

/// First-order Godunov (Osher-Sethian) step of `u_t = |grad u|`.
///
/// Stable for `h <= dx / 2`; larger steps blow up.
pub fn osher_sethian_step(u: &PeriodicGrid, h: f64) -> PeriodicGrid {
    u.map_nodes(|g, i, j| {
        let [dmx, dpx, dmy, dpy] = g.differences(i, j);
        let grad = (dpx.max(0.0).powi(2) + dmx.min(0.0).powi(2) + dpy.max(0.0).powi(2) + dmy.min(0.0).powi(2))
            .sqrt();
        g.at(i, j) + h * grad
    })
}

/// Lax-Friedrichs step of `u_t + H(grad u) = 0` with `H(p) = -|p|` and
/// dissipation `alpha` per axis.
pub fn lax_friedrichs_step(u: &PeriodicGrid, h: f64, alpha: f64) -> Result<PeriodicGrid> {
    // |H_q| = 1 everywhere, so less dissipation loses monotonicity
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("dissipation must be at least 1, got {alpha}")));
    }
    Ok(u.map_nodes(|g, i, j| {
        let [dmx, dpx, dmy, dpy] = g.differences(i, j);
        let px = 0.5 * (dmx + dpx);
        let py = 0.5 * (dmy + dpy);
        let flux = -(px * px + py * py).sqrt() - 0.5 * alpha * (dpx - dmx) - 0.5 * alpha * (dpy - dmy);
        g.at(i, j) - h * flux
    }))
}

/// `max(0, r0 - |x - c|)` on the unit square, centred at `(0.5, 0.5)`.
pub fn radial_cone(x: f64, y: f64, r0: f64) -> f64 {
    (r0 - ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt()).max(0.0)
}

/// Initial front, centred on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontShape {
    /// [`radial_cone`] of the given radius.
    Cone { radius: f64 },
    /// `height * exp(-|x - c|^2 / (2 width^2))`.
    Gaussian { height: f64, width: f64 },
}

impl FrontShape {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            FrontShape::Cone { radius } => radial_cone(x, y, radius),
            FrontShape::Gaussian { height, width } => {
                let r2 = (x - 0.5).powi(2) + (y - 0.5).powi(2);
                height * (-r2 / (2.0 * width * width)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    /// Nodes per axis; the spacing is `1 / n`.
    pub n: usize,
    pub h: f64,
    pub steps: usize,
    /// Viscosity added to the conic G-equation run.
    pub eps_reg: f64,
    pub front: FrontShape,
    /// Cells next to the boundary left out of the discrepancies.
    pub boundary_strip: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            n: 50,
            h: 0.01,
            steps: 100,
            eps_reg: 1e-6,
            front: FrontShape::Cone { radius: 0.25 },
            boundary_strip: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub step: usize,
    pub time: f64,
    /// Relative interior L2 distance between the conic run and Osher-Sethian.
    pub l2_disc_ab: f64,
    /// Relative interior L2 distance between Lax-Friedrichs and Osher-Sethian.
    pub l2_disc_ac: f64,
    pub sup_a: f64,
    pub sup_b: f64,
    pub sup_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub config: CompareConfig,
    /// Sup norm of the initial front.
    pub initial_sup: f64,
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,time,l2_disc_ab,l2_disc_ac,sup_a,sup_b,sup_c\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.step, r.time, r.l2_disc_ab, r.l2_disc_ac, r.sup_a, r.sup_b, r.sup_c
            )
            .unwrap();
        }
        s
    }
}

/// Interior relative L2 distance `|a - b| / |b|` over nodes at least `strip`
/// cells from the boundary; all those nodes carry the same area.
fn interior_discrepancy(n: usize, strip: usize, a: &[f64], b: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in strip..n - strip {
        for i in strip..n - strip {
            let k = j * n + i;
            num += (a[k] - b[k]).powi(2);
            den += b[k].powi(2);
        }
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Runs (a) the conic G-equation with zero flow and viscosity `eps_reg` on the
/// triangulated unit square, (b) Osher-Sethian and (c) Lax-Friedrichs with
/// `alpha = 1` on the periodic grid, all from the same front, and reports the
/// discrepancies to (b) after every step.
pub fn compare_schemes(cfg: &CompareConfig) -> Result<CompareReport> {
    let n = cfg.n;
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 nodes per axis, got {n}")));
    }
    if 2 * cfg.boundary_strip >= n {
        return Err(Error::InvalidArgument(format!(
            "boundary strip of {} cells leaves no interior on {n} nodes",
            cfg.boundary_strip
        )));
    }
    if !(cfg.h > 0.0 && cfg.h.is_finite()) || !(cfg.eps_reg >= 0.0) {
        return Err(Error::InvalidArgument("need h > 0 and eps_reg >= 0".into()));
    }
    let dx = 1.0 / n as f64;
    let mut b = PeriodicGrid::from_fn(n, n, dx, |x, y| cfg.front.eval(x, y))?;
    let mut c = b.clone();
    let initial_sup = sup_norm(b.values());
    let mut report = CompareReport {
        config: *cfg,
        initial_sup,
        rows: Vec::with_capacity(cfg.steps),
    };
    if cfg.steps == 0 {
        return Ok(report);
    }

    // n x n vertices, numbered like the periodic grid
    let mesh = MeshKind::Grid {
        nx: n - 1,
        ny: n - 1,
        spacing: dx,
    }
    .generate()?;
    let ops = FemOperators::build(&mesh, &BoundaryCondition::Neumann)?;
    let kind = HamiltonianKind::GEquation(FaceVectorField::zeros(ops.n_faces()));
    let problem = PdeProblem::new(kind, cfg.eps_reg, b.values().to_vec(), ops)?;
    let heat = HeatSolver::new(&problem.ops, cfg.eps_reg, cfg.h)?;
    let mut a = problem.u0.clone();

    for step in 1..=cfg.steps {
        a = strang_step(&problem, &heat, &a, cfg.h, step)?.0;
        b = osher_sethian_step(&b, cfg.h);
        c = lax_friedrichs_step(&c, cfg.h, 1.0)?;
        report.rows.push(CompareRow {
            step,
            time: step as f64 * cfg.h,
            l2_disc_ab: interior_discrepancy(n, cfg.boundary_strip, &a, b.values()),
            l2_disc_ac: interior_discrepancy(n, cfg.boundary_strip, c.values(), b.values()),
            sup_a: sup_norm(&a),
            sup_b: sup_norm(b.values()),
            sup_c: sup_norm(c.values()),
        });
    }
    Ok(report)
}
