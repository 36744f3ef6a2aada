//! The Monge–Ampère symmetry of the bracket for φ = (1 − r²)², χ = ξ₁²,
//! η = ξ₂²: exact on the disc, perturbed on the inscribed polygon.
//!
//! cargo run --release --example monge_ampere

use fvk::analytic::RadialPoly;
use fvk::element::triangle_rule;
use fvk::geom::Sym2;
use fvk::mesh::generate_disc_mesh;
use fvk::post::{disc_quadrature, mesh_quadrature, monge_ampere_integrals, QuadraticFn, RadialFn};
use fvk::space::Space;

fn main() -> fvk::Result<()> {
    let phi = RadialFn(RadialPoly::one_minus_s_pow(2, 1.0));
    let chi = QuadraticFn(Sym2::new(2.0, 0.0, 0.0));
    let eta = QuadraticFn(Sym2::new(0.0, 0.0, 2.0));
    println!("closed form: {:.12}", -4.0 * std::f64::consts::PI / 3.0);
    for h in [0.2, 0.1, 0.05] {
        let space = Space::new(generate_disc_mesh(h)?)?;
        let disc = monge_ampere_integrals(&disc_quadrature(&space, 6), &phi, &chi, &eta);
        let poly = monge_ampere_integrals(&mesh_quadrature(&space, &triangle_rule(6)), &phi, &chi, &eta);
        println!("h = {h}: disc {disc:.12?}");
        println!("        polygon {poly:.12?}");
    }
    Ok(())
}
