//! Assemble a problem by hand: a user-defined load, an off-centre
//! disclination pair and the low-level Newton solver, then sample the
//! deflection and the radial stress.
//!
//! cargo run --release --example custom_load

use std::sync::Arc;

use fvk::forms::{Disclination, DisclinationSet, Load, PlateProblem, PlateSystem, State, Variant};
use fvk::mesh::generate_disc_mesh;
use fvk::post::{self, Axis};
use fvk::solver::{newton, SolverConfig};
use fvk::space::Space;

fn main() -> fvk::Result<()> {
    let space = Space::new(generate_disc_mesh(0.08)?)?;
    // a load concentrated on the right half of the plate
    let load = Load::Custom(Arc::new(|x| -(-8.0 * ((x[0] - 0.4).powi(2) + x[1] * x[1])).exp()));
    let disclinations = DisclinationSet::new(vec![
        Disclination::new([-0.3, 0.3], -0.5),
        Disclination::new([-0.3, -0.3], -0.5),
    ])?;
    let problem = PlateProblem::new(15.0, 2e-4)
        .with_variant(Variant::Bnrs17)
        .with_load(load)
        .with_disclinations(disclinations);

    let system = PlateSystem::new(&space, &problem)?;
    let (x, report) = newton(&system, vec![0.0; 2 * space.n_free()], &SolverConfig::default())?;
    println!("converged: {} in {} iterations", report.converged, report.iterations);
    for (k, r) in report.residual_history.iter().enumerate() {
        println!("  ‖R_{k}‖ = {r:.3e}");
    }
    let state = State::from_vec(x);
    let e = post::compute_energies(&space, &problem, &state)?;
    println!("E_m = {:.5e}, E_b = {:.5e}, E_c = {:.5e}", e.membrane, e.bending, e.coupling);

    let w = post::extract_profile(&space, &state.w, Axis::X, 9, false)?;
    for (x, v) in w.abscissae.iter().zip(&w.values) {
        let s = post::radial_stress_at(&space, &state.v, [*x * 0.99, 0.0])?;
        println!("ξ₁ = {x:>5.2}: w = {v:>11.4e}, σ_rr = {s:>11.4e}");
    }
    let k = post::gaussian_curvature_field(&space, &state.w);
    println!("|∫[w,w]| / ∫|[w,w]| = {:.3e}", k.relative_mean());
    Ok(())
}
