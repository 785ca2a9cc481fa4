//! `parasplit`: run solver experiments from TOML configs.
//!
//! Exit codes: 0 success, 1 other failure, 2 invalid config or input,
//! 3 solver failure, 4 numerical underflow, 5 non-finite field.
//! On failure a JSON error record goes to stderr and to `error.json` in the
//! output directory when it can be created.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parasplit_core::Error;
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::commands::RunContext;

#[derive(Debug, Parser)]
#[command(name = "parasplit", version, about = "Strang-split conic solvers for parabolic PDE on meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; the solvers run single-threaded for reproducibility,
    /// so this is validated and recorded only.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Seed for every random draw (mesh noise).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Time-step a PDE and export snapshots and diagnostics.
    Evolve,
    /// Time self-convergence table.
    ConvergeTime,
    /// Space self-convergence table over a mesh ladder.
    ConvergeSpace,
    /// Entropic Wasserstein barycenter.
    Barycenter,
    /// Displacement interpolation between two distributions.
    Interpolate,
    /// Conic G-equation against the grid reference schemes.
    CompareGrid,
    /// Generate (and optionally perturb) a mesh.
    MeshGen,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::ConvergeTime => "converge-time",
            Command::ConvergeSpace => "converge-space",
            Command::Barycenter => "barycenter",
            Command::Interpolate => "interpolate",
            Command::CompareGrid => "compare-grid",
            Command::MeshGen => "mesh-gen",
        }
    }
}

/// Failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let (code, kind) = match &e {
            Error::Io { .. } => (1, "io"),
            Error::DivisionByZero(..) => (1, "order_estimate"),
            Error::ConicNotConverged { .. } | Error::Infeasible(_) | Error::Factorization(_) => {
                (3, "solver")
            }
            Error::NumericalUnderflow(_) => (4, "underflow"),
            Error::NonFinite { .. } => (5, "non_finite"),
            _ => (2, "validation"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn validation(message: String) -> Failure {
    Failure {
        code: 2,
        kind: "validation",
        message,
    }
}

fn load<T: DeserializeOwned>(path: Option<&Path>) -> Result<(T, PathBuf), Failure> {
    let path = path.ok_or_else(|| validation("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read config {}: {e}", path.display())))?;
    let cfg = toml::from_str(&text).map_err(|e| validation(format!("config {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn run(cli: &Cli, ctx: &RunContext) -> Result<(), Failure> {
    if cli.threads == 0 {
        return Err(validation("--threads must be at least 1".into()));
    }
    let cfg_path = cli.config.as_deref();
    let out = cli.out.as_path();
    // validate everything before creating outputs or computing
    macro_rules! dispatch {
        ($ty:ty, $cmd:path) => {{
            let (mut cfg, base): ($ty, _) = load(cfg_path)?;
            cfg.validate(&base)?;
            std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
            $cmd(&cfg, ctx, out)?;
        }};
    }
    match cli.command {
        Command::Evolve => dispatch!(config::EvolveConfig, commands::evolve_cmd),
        Command::ConvergeTime => dispatch!(config::ConvergeTimeConfig, commands::converge_time_cmd),
        Command::ConvergeSpace => dispatch!(config::ConvergeSpaceConfig, commands::converge_space_cmd),
        Command::Barycenter => dispatch!(config::BarycenterConfig, commands::barycenter_cmd),
        Command::Interpolate => dispatch!(config::InterpolateConfig, commands::interpolate_cmd),
        Command::CompareGrid => dispatch!(config::CompareGridConfig, commands::compare_grid_cmd),
        Command::MeshGen => dispatch!(config::MeshGenConfig, commands::mesh_gen_cmd),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let ctx = RunContext {
        command: cli.command.name(),
        seed: cli.seed,
        threads: cli.threads,
    };
    match run(&cli, &ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let record = json!({
                "command": ctx.command,
                "error": f.kind,
                "exit_code": f.code,
                "message": f.message,
            });
            let text = serde_json::to_string(&record).unwrap();
            eprintln!("{text}");
            if (f.kind != "validation" || cli.out.is_dir()) && std::fs::create_dir_all(&cli.out).is_ok() {
                let _ = std::fs::write(cli.out.join("error.json"), &text);
            }
            ExitCode::from(f.code)
        }
    }
}
