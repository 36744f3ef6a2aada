//! Command-line driver for the plate experiments.
//!
//! Settings come from an optional TOML file (`--config`) and are then
//! overridden by command-line flags. `FVK_WORKERS` sets the size of the
//! worker pool. Exit status: 0 success, 1 I/O or other error, 2 invalid
//! configuration, 3 solver failure, 4 failed check of a verification run.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fvk::experiments::{self, ExperimentKind, Outcome, RunConfig};
use fvk::forms::{Disclination, Variant};
use fvk::FvkError;

#[derive(Parser)]
#[command(name = "fvk", version, about = "Föppl–von Kármán plates with wedge disclinations")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, env = "FVK_WORKERS", global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured pressure test: energy errors and profiles.
    VerifyTest1(Common),
    /// Disclination dipole: membrane energy error and flatness.
    VerifyTest2(Common),
    /// Aspect-ratio sweep with one negative disclination.
    SweepBeta(Common),
    /// Load sweep at fixed aspect ratio.
    SweepGamma(Common),
    /// Multi-disclination arrangements.
    Disclinations(Common),
    /// A single run with explicit parameters.
    Custom(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target mesh size of the generated disc.
    #[arg(long)]
    mesh_h: Option<f64>,
    /// Gmsh MSH 2.2 mesh to use instead of a generated one.
    #[arg(long)]
    mesh_file: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    /// Interior-penalty parameter.
    #[arg(long)]
    alpha: Option<f64>,
    /// Formulation; repeat to run several.
    #[arg(long, value_parser = parse_variant)]
    variant: Vec<Variant>,
    /// Uniform transverse load p.
    #[arg(long, allow_hyphen_values = true)]
    pressure: Option<f64>,
    /// Comma-separated sweep values of beta.
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Comma-separated sweep values of gamma.
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    /// Named disclination arrangement; repeat for several.
    #[arg(long)]
    preset: Vec<String>,
    /// Disclination as `x,y,angle`; repeat for several.
    #[arg(long, value_parser = parse_disclination, allow_hyphen_values = true)]
    disclination: Vec<Disclination>,
    /// Number of parameter continuation steps per solve.
    #[arg(long)]
    continuation_steps: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Skip the VTK field exports.
    #[arg(long)]
    no_vtk: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: FvkError| e.to_string())
}

fn parse_disclination(s: &str) -> Result<Disclination, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, angle] => Ok(Disclination::new([x, y], angle)),
        _ => Err(format!("expected x,y,angle, got {s:?}")),
    }
}

impl Common {
    fn into_config(self, kind: ExperimentKind) -> Result<RunConfig, FvkError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        c.experiment = Some(kind);
        if let Some(h) = self.mesh_h {
            c.mesh_h = h;
            c.mesh_file = None;
        }
        if self.mesh_file.is_some() {
            c.mesh_file = self.mesh_file;
        }
        c.beta = self.beta.or(c.beta);
        c.gamma = self.gamma.or(c.gamma);
        c.nu = self.nu.unwrap_or(c.nu);
        c.alpha = self.alpha.unwrap_or(c.alpha);
        if !self.variant.is_empty() {
            c.variants = self.variant;
        }
        c.pressure = self.pressure.or(c.pressure);
        c.betas = self.betas.or(c.betas);
        c.gammas = self.gammas.or(c.gammas);
        if !self.preset.is_empty() {
            c.presets = Some(self.preset);
        }
        if !self.disclination.is_empty() {
            c.disclinations = self.disclination;
        }
        if let Some(n) = self.continuation_steps {
            c.solver.continuation_steps = n;
        }
        if let Some(n) = self.max_iters {
            c.solver.max_iters = n;
        }
        if self.no_vtk {
            c.write_vtk = false;
        }
        if let Some(out) = self.out {
            c.out = out;
        }
        c.validate()?;
        Ok(c)
    }
}

fn print_outcome(o: &Outcome) {
    println!("{} -> {}", o.experiment, o.out_dir.display());
    println!(
        "mesh: {} vertices, {} triangles, h_max {:.4}, {} free dofs",
        o.mesh.vertices, o.mesh.triangles, o.mesh.max_diameter, o.mesh.free_dofs
    );
    for r in &o.runs {
        println!(
            "  {:<16} E_m {:.6e}  E_b {:.6e}  E_c {:.6e}  newton {:>3}  {}  {:.1}s",
            r.label,
            r.energies.membrane,
            r.energies.bending,
            r.energies.coupling,
            r.report.iterations,
            if r.report.converged { "converged" } else { "FAILED" },
            r.seconds
        );
        if let Some(f) = &r.report.failure {
            println!("    {f}");
        }
    }
    for (k, v) in &o.summary {
        println!("  {k} = {v:.6e}");
    }
    for c in &o.checks {
        println!(
            "  [{}] {}: {:.6e} ({})",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let (kind, common) = match cli.command {
        Command::VerifyTest1(c) => (ExperimentKind::VerifyTest1, c),
        Command::VerifyTest2(c) => (ExperimentKind::VerifyTest2, c),
        Command::SweepBeta(c) => (ExperimentKind::SweepBeta, c),
        Command::SweepGamma(c) => (ExperimentKind::SweepGamma, c),
        Command::Disclinations(c) => (ExperimentKind::Disclinations, c),
        Command::Custom(c) => (ExperimentKind::Custom, c),
    };
    let result = common.into_config(kind).and_then(|c| experiments::run(&c));
    match result {
        Ok(outcome) => {
            print_outcome(&outcome);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                FvkError::Config(_) | FvkError::Parameter(_) | FvkError::Parse { .. } => 2,
                _ => 1,
            })
        }
    }
}
