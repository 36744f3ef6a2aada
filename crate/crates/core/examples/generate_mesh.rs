//! Generate a disc triangulation, print its statistics and save it as a
//! Gmsh MSH 2.2 file.
//!
//! cargo run --release --example generate_mesh -- 0.05 disc.msh

use fvk::mesh::{generate_disc_mesh, write_msh};

fn main() -> fvk::Result<()> {
    let mut args = std::env::args().skip(1);
    let h: f64 = args.next().map_or(0.1, |s| s.parse().expect("mesh size"));
    let path = args.next().unwrap_or_else(|| "disc.msh".into());

    let mesh = generate_disc_mesh(h)?;
    let (interior, boundary) = mesh.classify_edges();
    println!("target h        {h}");
    println!("vertices        {}", mesh.n_vertices());
    println!("triangles       {}", mesh.n_triangles());
    println!("edges           {} interior, {} boundary", interior.len(), boundary.len());
    println!("max diameter    {:.5}", mesh.max_diameter());
    println!("area            {:.6} (disc: {:.6})", mesh.area(), std::f64::consts::PI);
    println!("euler char.     {}", mesh.euler_characteristic());
    write_msh(&mesh, &path)?;
    println!("wrote {path}");
    Ok(())
}
