//! Aspect-ratio sweep with one negative disclination at the centre: the
//! membrane energy follows the Kirchhoff–Love value β⁴/(32π).
//!
//! cargo run --release --example beta_sweep -- out/sweep_beta

use fvk::experiments::{run, ExperimentKind, RunConfig};

fn main() -> fvk::Result<()> {
    let mut config = RunConfig::new(ExperimentKind::SweepBeta);
    config.mesh_h = 0.1;
    config.write_vtk = false;
    config.out = std::env::args().nth(1).unwrap_or_else(|| "out/sweep_beta".into()).into();

    let outcome = run(&config)?;
    for r in &outcome.runs {
        let kl = fvk::analytic::kl_membrane_energy(r.beta);
        println!(
            "β = {:>5}: E_m = {:.6e}  E_m/E_m^KL = {:.4}  E_b = {:.4e}",
            r.beta,
            r.energies.membrane,
            r.energies.membrane / kl,
            r.energies.bending
        );
    }
    println!("fitted slope of E_m: {:.4}", outcome.summary["membrane_slope"]);
    println!("tables in {}", outcome.out_dir.display());
    Ok(())
}
