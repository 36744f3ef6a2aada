//! Read a Gmsh MSH 2.2 mesh (written on the fly if no path is given) and
//! solve the disclination dipole on it.
//!
//! cargo run --release --example import_mesh -- disc.msh

use fvk::analytic;
use fvk::experiments::solve;
use fvk::forms::PlateProblem;
use fvk::mesh::{generate_disc_mesh, import_msh, write_msh};
use fvk::post;
use fvk::solver::SolverConfig;
use fvk::space::Space;

fn main() -> fvk::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let p = std::env::temp_dir().join("fvk_example_disc.msh");
            write_msh(&generate_disc_mesh(0.1)?, &p)?;
            p
        }
    };
    let mesh = import_msh(&path)?;
    println!("{}: {} vertices, {} triangles", path.display(), mesh.n_vertices(), mesh.n_triangles());

    let space = Space::new(mesh)?;
    let exact = analytic::test2_exact(100.0, [0.2, 0.0]);
    let problem = PlateProblem::new(100.0, 0.0).with_disclinations(exact.disclinations.clone());
    let solved = solve(&space, &problem, None, &SolverConfig::default())?;
    let e_m = post::percent_error(solved.energies.membrane, exact.energies.membrane);
    println!("membrane energy {:.8e} (exact {:.8e})", solved.energies.membrane, exact.energies.membrane);
    println!("relative error  {:.4}%", e_m.unwrap_or(f64::NAN));
    Ok(())
}
