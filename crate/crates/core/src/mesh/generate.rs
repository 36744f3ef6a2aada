use std::f64::consts::PI;

use super::Mesh;
use crate::error::{FvkError, Result};

/// Ring `k` of the polar mesh: `count` points at angles
/// `2π (2j + offset) / (2 count)`.
#[derive(Clone, Copy)]
struct Ring {
    first: usize,
    count: usize,
    offset: i64,
}

impl Ring {
    /// Angle of point `j` (unwrapped) as the fraction `(2j + offset) / (2 count)`
    /// of a full turn; only the numerator is returned.
    fn numerator(&self, j: i64) -> i64 {
        2 * j + self.offset
    }

    fn vertex(&self, j: i64) -> usize {
        self.first + j.rem_euclid(self.count as i64) as usize
    }
}

/// `a/(2 na) < b/(2 nb)` in exact integer arithmetic.
fn less(a: i64, na: usize, b: i64, nb: usize) -> bool {
    a * (nb as i64) < b * (na as i64)
}

fn less_eq(a: i64, na: usize, b: i64, nb: usize) -> bool {
    a * (nb as i64) <= b * (na as i64)
}

/// Structured polar triangulation of the unit disc.
///
/// Vertices sit on `N = ⌈1.1 / h⌉` concentric rings of radius `k / N`, with
/// an even number (≈ 2πk) of points on ring `k`, plus a vertex at the origin.
/// Neighbouring rings are zipped together by angle using exact rational
/// comparisons, so the mesh is invariant under the point reflection
/// `ξ ↦ −ξ`. The outer ring lies on the unit circle and contains `(±1, 0)`.
pub fn generate_disc_mesh(target_h: f64) -> Result<Mesh> {
    if !(target_h > 0.0 && target_h < 1.0) {
        return Err(FvkError::Parameter(format!(
            "target_h must lie in (0, 1), got {target_h}"
        )));
    }
    let n_rings = (1.1 / target_h).ceil() as usize;

    let mut vertices = vec![[0.0, 0.0]];
    let mut rings = Vec::with_capacity(n_rings);
    for k in 1..=n_rings {
        let count = (2 * (PI * k as f64).round() as usize).max(6);
        let offset = ((n_rings - k) % 2) as i64;
        let ring = Ring {
            first: vertices.len(),
            count,
            offset,
        };
        let radius = if k == n_rings {
            1.0
        } else {
            k as f64 / n_rings as f64
        };
        for j in 0..count as i64 {
            let angle = PI * ring.numerator(j) as f64 / count as f64;
            vertices.push([radius * angle.cos(), radius * angle.sin()]);
        }
        rings.push(ring);
    }

    let mut triangles = Vec::new();
    let first = rings[0];
    for j in 0..first.count as i64 {
        triangles.push([0, first.vertex(j), first.vertex(j + 1)]);
    }
    for pair in rings.windows(2) {
        zip_rings(pair[0], pair[1], &mut triangles);
    }
    Mesh::new(vertices, triangles)
}

/// Triangulates the annulus between two rings by merging their angle
/// sequences. Ties advance the inner ring first.
fn zip_rings(inner: Ring, outer: Ring, triangles: &mut Vec<[usize; 3]>) {
    let (n_in, n_out) = (inner.count, outer.count);
    let in_num = |i: i64| inner.numerator(i);
    let out_num = |j: i64| outer.numerator(j);

    // last outer point strictly before inner point 0
    let mut j: i64 = 0;
    while !less(out_num(j), n_out, in_num(0), n_in) {
        j -= 1;
    }
    while less(out_num(j + 1), n_out, in_num(0), n_in) {
        j += 1;
    }
    let j_end = j + n_out as i64;
    let mut i: i64 = 0;
    let i_end = n_in as i64;

    while i < i_end || j < j_end {
        let take_inner = i < i_end
            && (j == j_end || less_eq(in_num(i + 1), n_in, out_num(j + 1), n_out));
        if take_inner {
            triangles.push([inner.vertex(i), outer.vertex(j), inner.vertex(i + 1)]);
            i += 1;
        } else {
            triangles.push([inner.vertex(i), outer.vertex(j), outer.vertex(j + 1)]);
            j += 1;
        }
    }
}
