//! Strang-split solvers for `u_t + H(x, grad u, u) = eps * Lap u` on triangle meshes.
//!
//! Each time step runs an implicit heat half-step, an implicit Hamilton-Jacobi
//! step posed as a second-order cone program, and a second heat half-step.

pub mod conic;
pub mod convergence;
pub mod error;
pub mod fem;
pub mod flow;
pub mod frontprop;
pub mod hamiltonian;
pub mod integrator;
pub mod mesh;
pub mod sparse;
pub mod transport;

pub use conic::{
    assemble_step, solve_conic, verify_kkt, ConicProgram, KktResiduals, SolveStatus,
    SolverConfig, StepSolution,
};
pub use convergence::{space_self_convergence, time_self_convergence, ConvergenceTable};
pub use error::{Error, Result};
pub use fem::{BoundaryCondition, FemOperators};
pub use flow::{make_flow, FlowDomain, FlowKind};
pub use frontprop::{compare_schemes, CompareConfig, CompareReport, FrontShape, PeriodicGrid};
pub use hamiltonian::{eval_h, FaceVectorField, HamiltonianKind};
pub use mesh::{MeshFormat, MeshKind, TriangleMesh, Vec3};
pub use integrator::{
    estimate_order, evolve, heat_kernel_bump, strang_step, HeatSolver, PdeProblem, Trajectory,
};
pub use transport::{
    barycenter, interpolate, log_heat, BarycenterResult, Distribution, SinkhornConfig, SinkhornMode,
};
