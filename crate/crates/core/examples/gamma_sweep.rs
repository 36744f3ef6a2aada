//! Load sweep at β = 20: quadratic growth of the bending energy while the
//! coupling is weak, then the nonlinear regime.
//!
//! cargo run --release --example gamma_sweep -- out/sweep_gamma

use fvk::experiments::{run, ExperimentKind, RunConfig};

fn main() -> fvk::Result<()> {
    let mut config = RunConfig::new(ExperimentKind::SweepGamma);
    config.mesh_h = 0.1;
    config.out = std::env::args().nth(1).unwrap_or_else(|| "out/sweep_gamma".into()).into();

    let outcome = run(&config)?;
    for r in &outcome.runs {
        println!(
            "γ = {:.3e}: E_m = {:.5e}  E_b = {:.5e}  E_c = {:.5e}  ({} Newton steps)",
            r.gamma, r.energies.membrane, r.energies.bending, r.energies.coupling, r.report.iterations
        );
    }
    for (k, v) in &outcome.summary {
        println!("{k}: {v:.4}");
    }
    Ok(())
}
