//! The manufactured pressure test for the three formulations: energies and
//! their percentage errors against the closed-form pair.
//!
//! cargo run --release --example manufactured_solution -- 0.05

use fvk::analytic;
use fvk::forms::{PlateProblem, PlateSystem, State, Variant};
use fvk::mesh::generate_disc_mesh;
use fvk::post;
use fvk::solver::{newton, SolverConfig};
use fvk::space::Space;

fn main() -> fvk::Result<()> {
    let h: f64 = std::env::args().nth(1).map_or(0.1, |s| s.parse().expect("mesh size"));
    let space = Space::new(generate_disc_mesh(h)?)?;
    let exact = analytic::test1_exact(0.15);
    let beta = 100.0f64;
    println!("h = {h}, {} unknowns", 2 * space.n_free());
    println!("{:<8} {:>10} {:>10} {:>10} {:>6}", "variant", "e_b %", "e_m %", "e_c %", "iters");
    for variant in Variant::ALL {
        let problem = PlateProblem::new(beta, exact.load_factor / beta.powi(4))
            .with_load(exact.load.clone())
            .with_variant(variant);
        let system = PlateSystem::new(&space, &problem)?;
        let (x, report) = newton(&system, vec![0.0; 2 * space.n_free()], &SolverConfig::default())?;
        let state = State::from_vec(x);
        let e = post::energy_errors(&post::compute_energies(&space, &problem, &state)?, &exact.energies.into());
        println!(
            "{:<8} {:>10.4} {:>10.4} {:>10.4} {:>6}",
            variant.name(),
            e.bending.unwrap_or(f64::NAN),
            e.membrane.unwrap_or(f64::NAN),
            e.coupling.unwrap_or(f64::NAN),
            report.iterations
        );
        let l2 = post::l2_error(&space, &state.w, |x| (exact.w)(x));
        println!("         ‖w − w*‖ = {l2:.3e}");
    }
    Ok(())
}
