//! The four symmetric multi-disclination arrangements: mean Gaussian
//! curvature, the sign of the radial stress and VTK field exports.
//!
//! cargo run --release --example multi_disclinations -- out/disclinations

use fvk::experiments::{run, ExperimentKind, RunConfig};

fn main() -> fvk::Result<()> {
    let mut config = RunConfig::new(ExperimentKind::Disclinations);
    config.mesh_h = 0.05;
    config.out = std::env::args().nth(1).unwrap_or_else(|| "out/disclinations".into()).into();

    let outcome = run(&config)?;
    for c in &outcome.checks {
        println!("{:<40} {:>12.4e}  {}", c.name, c.value, if c.passed { "ok" } else { "FAILED" });
    }
    println!("files:");
    for f in &outcome.files {
        println!("  {}", f.display());
    }
    Ok(())
}
