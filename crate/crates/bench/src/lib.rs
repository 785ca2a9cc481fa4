//! Shared fixtures for the solver benchmarks.

use parasplit_core::{
    heat_kernel_bump, make_flow, BoundaryCondition, FaceVectorField, FemOperators, FlowDomain,
    FlowKind, MeshKind, TriangleMesh,
};

/// An icosphere, its operators, and a Kolmogorov flow on it.
pub struct SphereFixture {
    pub mesh: TriangleMesh,
    pub ops: FemOperators,
    pub flow: FaceVectorField,
}

impl SphereFixture {
    pub fn new(level: u32) -> SphereFixture {
        let mesh = MeshKind::Icosphere { level }.generate().expect("icosphere");
        let ops = FemOperators::build(&mesh, &BoundaryCondition::Neumann).expect("operators");
        let flow = make_flow(&FlowKind::Kolmogorov { strength: 1.0 }, &mesh, &ops, FlowDomain::Sphere)
            .expect("flow");
        SphereFixture { mesh, ops, flow }
    }

    /// A smooth bump centred at vertex 0.
    pub fn bump(&self) -> Vec<f64> {
        heat_kernel_bump(&self.ops, 0, 0.05).expect("bump")
    }
}
