use super::{Mesh, EPS_GEOM};
use crate::error::{FvkError, Result};
use crate::geom::Vec2;

/// Uniform bucket grid over the mesh bounding box. Each bucket lists the
/// triangles whose bounding box overlaps it, in ascending index order, so a
/// query returns the lowest-index containing triangle.
#[derive(Debug, Clone)]
pub struct PointLocator {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl PointLocator {
    pub fn new(mesh: &Mesh) -> Self {
        let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
        for v in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
        let per_side = ((mesh.n_triangles() as f64).sqrt().ceil() as usize).clamp(1, 2048);
        let cell = span / per_side as f64;
        let nx = (((hi[0] - lo[0]) / cell).floor() as usize + 1).max(1);
        let ny = (((hi[1] - lo[1]) / cell).floor() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let pts = tri.map(|v| mesh.vertices()[v]);
            let bx0 = pts.iter().map(|p| p[0]).fold(f64::MAX, f64::min) - EPS_GEOM;
            let bx1 = pts.iter().map(|p| p[0]).fold(f64::MIN, f64::max) + EPS_GEOM;
            let by0 = pts.iter().map(|p| p[1]).fold(f64::MAX, f64::min) - EPS_GEOM;
            let by1 = pts.iter().map(|p| p[1]).fold(f64::MIN, f64::max) + EPS_GEOM;
            let (i0, i1) = (Self::index(bx0, lo[0], cell, nx), Self::index(bx1, lo[0], cell, nx));
            let (j0, j1) = (Self::index(by0, lo[1], cell, ny), Self::index(by1, lo[1], cell, ny));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(t as u32);
                }
            }
        }
        PointLocator {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn index(x: f64, lo: f64, cell: f64, n: usize) -> usize {
        (((x - lo) / cell).floor().max(0.0) as usize).min(n - 1)
    }

    /// Containing triangle and barycentric coordinates (all ≥ −ε).
    pub fn locate(&self, mesh: &Mesh, p: Vec2) -> Result<(usize, [f64; 3])> {
        let outside = FvkError::Location { x: p[0], y: p[1] };
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(outside);
        }
        let fx = (p[0] - self.origin[0]) / self.cell;
        let fy = (p[1] - self.origin[1]) / self.cell;
        if fx < -1.0 || fy < -1.0 || fx > self.nx as f64 + 1.0 || fy > self.ny as f64 + 1.0 {
            return Err(outside);
        }
        let i = Self::index(p[0], self.origin[0], self.cell, self.nx);
        let j = Self::index(p[1], self.origin[1], self.cell, self.ny);
        for &t in &self.buckets[j * self.nx + i] {
            let t = t as usize;
            let bary = barycentric(mesh, t, p);
            if bary.iter().all(|&b| b >= -EPS_GEOM) {
                return Ok((t, bary));
            }
        }
        Err(outside)
    }
}

pub(crate) fn barycentric(mesh: &Mesh, t: usize, p: Vec2) -> [f64; 3] {
    let [a, b, c] = mesh.triangle_coords(t);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_disc_mesh;

    fn brute_force(mesh: &Mesh, p: Vec2) -> Option<usize> {
        (0..mesh.n_triangles())
            .find(|&t| barycentric(mesh, t, p).iter().all(|&b| b >= -EPS_GEOM))
    }

    #[test]
    fn agrees_with_brute_force_scan() {
        let mesh = generate_disc_mesh(0.15).unwrap();
        let loc = PointLocator::new(&mesh);
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let p = [2.2 * next() - 1.1, 2.2 * next() - 1.1];
            match (loc.locate(&mesh, p), brute_force(&mesh, p)) {
                (Ok((t, _)), Some(s)) => assert_eq!(t, s),
                (Err(_), None) => {}
                (a, b) => panic!("mismatch at {p:?}: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn centroid_and_origin() {
        let mesh = generate_disc_mesh(0.2).unwrap();
        let loc = PointLocator::new(&mesh);
        let c = mesh.centroid(7);
        let (t, b) = loc.locate(&mesh, c).unwrap();
        assert_eq!(t, 7);
        for x in b {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
        let (t, b) = loc.locate(&mesh, [0.0, 0.0]).unwrap();
        let local = mesh.triangles()[t].iter().position(|&v| v == 0).unwrap();
        assert!((b[local] - 1.0).abs() < 1e-12);
        assert!(matches!(loc.locate(&mesh, [2.0, 0.0]), Err(FvkError::Location { .. })));
    }
}
