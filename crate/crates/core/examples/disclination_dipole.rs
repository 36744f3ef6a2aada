//! Two opposite disclinations on a flat plate: the Airy potential against
//! the Green's function solution along the ξ₂ = 0 slice.
//!
//! cargo run --release --example disclination_dipole

use fvk::analytic;
use fvk::experiments::solve;
use fvk::forms::PlateProblem;
use fvk::mesh::generate_disc_mesh;
use fvk::post::{self, Axis};
use fvk::solver::SolverConfig;
use fvk::space::Space;

fn main() -> fvk::Result<()> {
    let space = Space::new(generate_disc_mesh(0.05)?)?;
    let beta = 100.0;
    let exact = analytic::test2_exact(beta, [0.2, 0.0]);
    let problem = PlateProblem::new(beta, 0.0).with_disclinations(exact.disclinations.clone());
    let solved = solve(&space, &problem, None, &SolverConfig::default())?;

    println!("newton iterations {}", solved.report.iterations);
    println!(
        "e_m = {:.4}%, max |w| = {:e}",
        post::percent_error(solved.energies.membrane, exact.energies.membrane).unwrap_or(f64::NAN),
        solved.state.w.max_abs()
    );
    let profile = post::extract_profile(&space, &solved.state.v, Axis::X, 11, false)?;
    println!("{:>6} {:>14} {:>14}", "ξ₁", "v_h", "v*");
    for (x, v) in profile.abscissae.iter().zip(&profile.values) {
        println!("{x:>6.2} {v:>14.6} {:>14.6}", (exact.v)([*x, 0.0]));
    }
    Ok(())
}
