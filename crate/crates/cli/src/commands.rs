//! One function per subcommand. Each writes its outputs and a `manifest.json`
//! with the resolved config into the output directory.

use std::path::Path;
use std::time::Instant;

use parasplit_core::frontprop::compare_schemes;
use parasplit_core::integrator::write_field;
use parasplit_core::{
    barycenter, evolve, interpolate, space_self_convergence, time_self_convergence, Error,
    Result, TriangleMesh,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    distribution, problem, BarycenterConfig, CompareGridConfig, ConvergeSpaceConfig,
    ConvergeTimeConfig, EvolveConfig, InterpolateConfig, MeshGenConfig,
};

/// Settings shared by every command.
#[derive(Debug, Clone, Serialize)]
pub struct RunContext {
    pub command: &'static str,
    pub seed: u64,
    pub threads: usize,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_mesh(out: &Path, mesh: &TriangleMesh) -> Result<String> {
    mesh.write_off(out.join("mesh.off"))?;
    Ok("mesh.off".into())
}

/// Writes `manifest.json` with the resolved config and run context.
pub fn write_manifest(out: &Path, ctx: &RunContext, config: &impl Serialize, outputs: Value, wall: f64) -> Result<()> {
    let manifest = json!({
        "command": ctx.command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": ctx.seed,
        "threads": ctx.threads,
        "config": config,
        "outputs": outputs,
        "wall_time_s": wall,
    });
    write(&out.join("manifest.json"), &serde_json::to_string_pretty(&manifest).unwrap())
}

pub fn evolve_cmd(cfg: &EvolveConfig, ctx: &RunContext, out: &Path) -> Result<()> {
    let start = Instant::now();
    let mesh = cfg.mesh.build(ctx.seed)?;
    let p = problem(&cfg.pde, &cfg.initial, &cfg.mesh, &mesh, cfg.solver)?;
    let traj = evolve(&p, cfg.time.h, cfg.time.steps, cfg.time.snapshot_every)?;
    let mesh_file = write_mesh(out, &mesh)?;
    let extra = json!({ "run": ctx, "config": cfg, "wall_time_s": start.elapsed().as_secs_f64() });
    traj.export(out, Some(&mesh_file), extra)
}

pub fn converge_time_cmd(cfg: &ConvergeTimeConfig, ctx: &RunContext, out: &Path) -> Result<()> {
    let start = Instant::now();
    let mesh = cfg.mesh.build(ctx.seed)?;
    let p = problem(&cfg.pde, &cfg.initial, &cfg.mesh, &mesh, cfg.solver)?;
    let c = &cfg.convergence;
    let table = time_self_convergence(&p, c.h0, c.t_final, c.halvings)?;
    write(&out.join("convergence.csv"), &table.to_csv("h"))?;
    println!("{}", table.to_csv("h").trim_end());
    write_manifest(out, ctx, cfg, json!({ "table": "convergence.csv", "result": table }), start.elapsed().as_secs_f64())
}

pub fn converge_space_cmd(cfg: &ConvergeSpaceConfig, ctx: &RunContext, out: &Path) -> Result<()> {
    let start = Instant::now();
    let mut meshes = Vec::with_capacity(cfg.ladder.meshes.len());
    for (k, spec) in cfg.ladder.meshes.iter().enumerate() {
        meshes.push(spec.build(ctx.seed.wrapping_add(k as u64))?);
    }
    let mut specs = cfg.ladder.meshes.iter();
    let table = space_self_convergence(&meshes, cfg.ladder.h, cfg.ladder.steps, |mesh| {
        let spec = specs.next().expect("one spec per mesh");
        problem(&cfg.pde, &cfg.initial, spec, mesh, cfg.solver)
    })?;
    write(&out.join("convergence.csv"), &table.to_csv("l_max"))?;
    println!("{}", table.to_csv("l_max").trim_end());
    write_manifest(out, ctx, cfg, json!({ "table": "convergence.csv", "result": table }), start.elapsed().as_secs_f64())
}

pub fn barycenter_cmd(cfg: &BarycenterConfig, ctx: &RunContext, out: &Path) -> Result<()> {
    let start = Instant::now();
    let mesh = cfg.mesh.build(ctx.seed)?;
    let ops = cfg.mesh.operators(&mesh)?;
    let inputs = cfg
        .inputs
        .iter()
        .map(|f| distribution(f, &mesh, &ops))
        .collect::<Result<Vec<_>>>()?;
    let result = barycenter(&inputs, &cfg.weights(), &cfg.sinkhorn, &ops)?;
    let mesh_file = write_mesh(out, &mesh)?;
    write_field(out.join("barycenter.txt"), result.barycenter.values())?;
    write(&out.join("residuals.csv"), &result.residuals_csv())?;
    let outputs = json!({
        "mesh": mesh_file,
        "barycenter": "barycenter.txt",
        "residuals": "residuals.csv",
        "iterations": result.residuals.len(),
        "converged": result.converged,
        "argmax_vertex": result.barycenter.argmax(),
    });
    write_manifest(out, ctx, cfg, outputs, start.elapsed().as_secs_f64())
}

pub fn interpolate_cmd(cfg: &InterpolateConfig, ctx: &RunContext, out: &Path) -> Result<()> {
    let start = Instant::now();
    let mesh = cfg.mesh.build(ctx.seed)?;
    let ops = cfg.mesh.operators(&mesh)?;
    let mu0 = distribution(&cfg.from, &mesh, &ops)?;
    let mu1 = distribution(&cfg.to, &mesh, &ops)?;
    let mesh_file = write_mesh(out, &mesh)?;
    let mut frames = Vec::with_capacity(cfg.times.len());
    for (k, &t) in cfg.times.iter().enumerate() {
        let r = interpolate(&mu0, &mu1, t, &cfg.sinkhorn, &ops)?;
        let name = format!("interp_{k:03}.txt");
        write_field(out.join(&name), r.barycenter.values())?;
        frames.push(json!({ "t": t, "file": name, "iterations": r.residuals.len(), "converged": r.converged }));
    }
    write_manifest(out, ctx, cfg, json!({ "mesh": mesh_file, "frames": frames }), start.elapsed().as_secs_f64())
}

pub fn compare_grid_cmd(cfg: &CompareGridConfig, ctx: &RunContext, out: &Path) -> Result<()> {
    let start = Instant::now();
    let report = compare_schemes(&cfg.compare)?;
    write(&out.join("compare.csv"), &report.to_csv())?;
    let outputs = json!({ "report": "compare.csv", "initial_sup": report.initial_sup, "rows": report.rows.len() });
    write_manifest(out, ctx, cfg, outputs, start.elapsed().as_secs_f64())
}

pub fn mesh_gen_cmd(cfg: &MeshGenConfig, ctx: &RunContext, out: &Path) -> Result<()> {
    let start = Instant::now();
    let mesh = cfg.mesh.build(ctx.seed)?;
    let mesh_file = write_mesh(out, &mesh)?;
    let outputs = json!({
        "mesh": mesh_file,
        "vertices": mesh.n_vertices(),
        "faces": mesh.n_faces(),
        "max_edge_length": mesh.max_edge_length(),
    });
    write_manifest(out, ctx, cfg, outputs, start.elapsed().as_secs_f64())
}
