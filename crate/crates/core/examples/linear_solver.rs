//! The sparse linear solver on plate Jacobians: symmetric ones go through
//! an LBLᵀ factorisation, nonsymmetric ones through GMRES preconditioned
//! by their symmetric part, with sparse LU as the fallback when the Krylov
//! iteration stalls (as it does at this arbitrary state).
//!
//! cargo run --release --example linear_solver

use std::time::Instant;

use fvk::analytic;
use fvk::forms::{PlateProblem, PlateSystem, Variant};
use fvk::mesh::generate_disc_mesh;
use fvk::solver::{LinearSolver, NonlinearSystem};
use fvk::space::Space;
use fvk::sparse;

fn main() -> fvk::Result<()> {
    let space = Space::new(generate_disc_mesh(0.05)?)?;
    let exact = analytic::test1_exact(0.15);
    let mut solver = LinearSolver::new();
    for variant in Variant::ALL {
        let problem = PlateProblem::new(100.0, 1e-8).with_load(exact.load.clone()).with_variant(variant);
        let system = PlateSystem::new(&space, &problem)?;
        // a state with w ≠ 0 so that the variants differ
        let x: Vec<f64> = (0..system.size()).map(|i| 1e-3 * ((i % 17) as f64 - 8.0)).collect();
        let j = system.jacobian(&x)?;
        let r = system.residual(&x)?;
        let start = Instant::now();
        let dx = solver.solve(&j, &r)?;
        let res: Vec<f64> = j.matvec(&dx).iter().zip(&r).map(|(a, b)| a - b).collect();
        println!(
            "{:<7} n = {:>6}, nnz = {:>8}, method {:?}, ‖J dx − r‖/‖r‖ = {:.2e}, {:.2}s",
            variant.name(),
            j.nrows(),
            j.nnz(),
            solver.last_method().expect("a solve happened"),
            sparse::norm2(&res) / sparse::norm2(&r),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
