//! A strongly loaded compressed plate reached by ramping the data in:
//! each step starts from the previous solution.
//!
//! cargo run --release --example continuation

use fvk::analytic;
use fvk::experiments::{scaled_problem, solve};
use fvk::forms::{Load, PlateProblem, PlateSystem};
use fvk::mesh::generate_disc_mesh;
use fvk::post;
use fvk::solver::{continuation, SolverConfig};
use fvk::space::Space;

fn main() -> fvk::Result<()> {
    let space = Space::new(generate_disc_mesh(0.1)?)?;
    let problem = PlateProblem::new(20.0, 1e-2)
        .with_load(Load::Uniform(-1.0))
        .with_disclinations(analytic::preset("four-positive").expect("preset"));

    // explicit ramp over the data scale
    let ramp = [0.25, 0.5, 0.75, 1.0];
    let out = continuation(
        &ramp,
        |lambda| PlateSystem::new(&space, &scaled_problem(&problem, lambda)?),
        vec![0.0; 2 * space.n_free()],
        &SolverConfig::default(),
    )?;
    for (lambda, r) in &out.reports {
        println!("λ = {lambda:.2}: {} iterations, converged {}", r.iterations, r.converged);
    }

    // the same through the solver configuration
    let config = SolverConfig {
        continuation_steps: 4,
        ..Default::default()
    };
    let solved = solve(&space, &problem, None, &config)?;
    let k = post::gaussian_curvature_field(&space, &solved.state.w);
    let (pos, neg) = k.sign_summary(1e-3);
    println!(
        "E_b = {:.4e}, max |w| = {:.4e}, curvature of both signs: {}",
        solved.energies.bending,
        solved.state.w.max_abs(),
        pos && neg
    );
    Ok(())
}
