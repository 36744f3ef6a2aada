//! Drive an experiment from a TOML configuration, the format accepted by
//! `fvk --config`.
//!
//! cargo run --release --example config_file

use fvk::experiments::{run, RunConfig};

const CONFIG: &str = r#"
experiment = "custom"
mesh_h = 0.1
beta = 20.0
gamma = 5e-8
pressure = -1.0
presets = ["flower"]
variants = ["var", "cmn18"]
profile_samples = 101
grid_samples = 51
write_vtk = false
out = "out/config_example"

[solver]
max_iters = 30
"#;

fn main() -> fvk::Result<()> {
    let config = RunConfig::from_toml_str(CONFIG)?;
    config.validate()?;
    let outcome = run(&config)?;
    for r in &outcome.runs {
        println!("{}: E_m = {:.6e}, converged = {}", r.label, r.energies.membrane, r.report.converged);
    }
    println!("exit status would be {}", outcome.exit_code());
    println!("manifest: {}", outcome.out_dir.join("manifest.toml").display());
    Ok(())
}
