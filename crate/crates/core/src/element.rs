//! Cubic Lagrange reference triangle, quadrature rules and affine maps.
//!
//! The reference triangle has vertices `(0,0)`, `(1,0)`, `(0,1)`. Node order:
//!
//! | index | location        | entity                       |
//! |-------|-----------------|------------------------------|
//! | 0–2   | vertices        | vertex `k`                   |
//! | 3, 4  | (1/3,0), (2/3,0)| edge 0 (v0→v1), near v0 / v1 |
//! | 5, 6  | (2/3,1/3), (1/3,2/3) | edge 1 (v1→v2)          |
//! | 7, 8  | (0,2/3), (0,1/3)| edge 2 (v2→v0)               |
//! | 9     | (1/3,1/3)       | interior                     |

use crate::error::{FvkError, Result};
use crate::geom::{Sym2, Vec2};

pub const N_NODES: usize = 10;

pub const NODES: [Vec2; N_NODES] = [
    [0.0, 0.0],
    [1.0, 0.0],
    [0.0, 1.0],
    [1.0 / 3.0, 0.0],
    [2.0 / 3.0, 0.0],
    [2.0 / 3.0, 1.0 / 3.0],
    [1.0 / 3.0, 2.0 / 3.0],
    [0.0, 2.0 / 3.0],
    [0.0, 1.0 / 3.0],
    [1.0 / 3.0, 1.0 / 3.0],
];

/// Edge nodes as `(near, far)` barycentric index pairs for nodes 3..=8.
const EDGE_NODES: [(usize, usize); 6] = [(0, 1), (1, 0), (1, 2), (2, 1), (2, 0), (0, 2)];

/// Reference-coordinate derivatives of the barycentric coordinates
/// `λ0 = 1 − x − y`, `λ1 = x`, `λ2 = y`.
const DLAMBDA: [Vec2; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

/// Values, gradients and Hessians of the ten basis functions at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEval {
    pub values: [f64; N_NODES],
    pub grads: [Vec2; N_NODES],
    pub hessians: [Sym2; N_NODES],
}

/// The cubic Lagrange element on the reference triangle.
#[derive(Debug, Clone, Copy, Default)]
pub struct P3ReferenceElement;

impl P3ReferenceElement {
    pub fn nodes(&self) -> &'static [Vec2; N_NODES] {
        &NODES
    }

    pub fn eval(&self, p: Vec2) -> BasisEval {
        eval_basis(p)
    }
}

/// Exact basis values and reference derivatives at `p`.
pub fn eval_basis(p: Vec2) -> BasisEval {
    let l = [1.0 - p[0] - p[1], p[0], p[1]];
    let mut out = BasisEval {
        values: [0.0; N_NODES],
        grads: [[0.0; 2]; N_NODES],
        hessians: [Sym2::default(); N_NODES],
    };
    // each basis function as (value, ∂/∂λ, ∂²/∂λ²) in barycentric variables
    let mut put = |i: usize, val: f64, d: [f64; 3], dd: [[f64; 3]; 3]| {
        out.values[i] = val;
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += d[k] * DLAMBDA[k][0];
            g[1] += d[k] * DLAMBDA[k][1];
        }
        out.grads[i] = g;
        let mut h = Sym2::default();
        for a in 0..3 {
            for b in 0..3 {
                let c = dd[a][b];
                if c != 0.0 {
                    h.xx += c * DLAMBDA[a][0] * DLAMBDA[b][0];
                    h.xy += c * DLAMBDA[a][0] * DLAMBDA[b][1];
                    h.yy += c * DLAMBDA[a][1] * DLAMBDA[b][1];
                }
            }
        }
        out.hessians[i] = h;
    };

    for v in 0..3 {
        let t = l[v];
        let val = 0.5 * t * (3.0 * t - 1.0) * (3.0 * t - 2.0);
        let mut d = [0.0; 3];
        let mut dd = [[0.0; 3]; 3];
        d[v] = 0.5 * (27.0 * t * t - 18.0 * t + 2.0);
        dd[v][v] = 27.0 * t - 9.0;
        put(v, val, d, dd);
    }
    for (k, &(a, b)) in EDGE_NODES.iter().enumerate() {
        let (la, lb) = (l[a], l[b]);
        let val = 4.5 * la * lb * (3.0 * la - 1.0);
        let mut d = [0.0; 3];
        let mut dd = [[0.0; 3]; 3];
        d[a] = 4.5 * (6.0 * la * lb - lb);
        d[b] = 4.5 * (3.0 * la * la - la);
        dd[a][a] = 27.0 * lb;
        dd[a][b] = 4.5 * (6.0 * la - 1.0);
        dd[b][a] = dd[a][b];
        put(3 + k, val, d, dd);
    }
    {
        let val = 27.0 * l[0] * l[1] * l[2];
        let d = [27.0 * l[1] * l[2], 27.0 * l[0] * l[2], 27.0 * l[0] * l[1]];
        let dd = [
            [0.0, 27.0 * l[2], 27.0 * l[1]],
            [27.0 * l[2], 0.0, 27.0 * l[0]],
            [27.0 * l[1], 27.0 * l[0], 0.0],
        ];
        put(9, val, d, dd);
    }
    out
}

/// Points and weights of a quadrature rule together with its exactness degree.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * weight;
        w[n - 1 - i] = 0.5 * weight;
    }
    (x, w)
}

/// Collapsed (Duffy) tensor Gauss rule on the reference triangle with `n²`
/// points; exact for polynomials of total degree `2n − 2`.
pub fn triangle_rule(n: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = x[i];
            let v = x[j] * (1.0 - u);
            points.push([u, v]);
            weights.push(w[i] * w[j] * (1.0 - u));
        }
    }
    QuadratureRule {
        points,
        weights,
        degree: 2 * n - 2,
    }
}

/// Cell rule, exact to degree 6.
pub fn cell_quadrature() -> QuadratureRule {
    triangle_rule(4)
}

/// Gauss rule on `[0, 1]` (first coordinate of each point), exact to degree 7.
pub fn edge_quadrature() -> QuadratureRule {
    let (x, w) = gauss_legendre(4);
    QuadratureRule {
        points: x.into_iter().map(|t| [t, 0.0]).collect(),
        weights: w,
        degree: 7,
    }
}

/// Affine map `x = x0 + J ξ` from the reference triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub origin: Vec2,
    pub jacobian: [[f64; 2]; 2],
    pub inverse: [[f64; 2]; 2],
    pub det: f64,
}

impl AffineMap {
    pub fn from_triangle(v: [Vec2; 3]) -> Result<Self> {
        let jacobian = [
            [v[1][0] - v[0][0], v[2][0] - v[0][0]],
            [v[1][1] - v[0][1], v[2][1] - v[0][1]],
        ];
        Self::new(v[0], jacobian)
    }

    pub fn new(origin: Vec2, jacobian: [[f64; 2]; 2]) -> Result<Self> {
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        if !(det > 0.0) {
            return Err(FvkError::Geometry(format!(
                "affine map has non-positive determinant {det}"
            )));
        }
        let inverse = [
            [jacobian[1][1] / det, -jacobian[0][1] / det],
            [-jacobian[1][0] / det, jacobian[0][0] / det],
        ];
        Ok(AffineMap {
            origin,
            jacobian,
            inverse,
            det,
        })
    }

    pub fn to_physical(&self, p: Vec2) -> Vec2 {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * p[0] + j[0][1] * p[1],
            self.origin[1] + j[1][0] * p[0] + j[1][1] * p[1],
        ]
    }

    pub fn to_reference(&self, x: Vec2) -> Vec2 {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        let k = &self.inverse;
        [k[0][0] * d[0] + k[0][1] * d[1], k[1][0] * d[0] + k[1][1] * d[1]]
    }

    /// `J^{-T} g`.
    #[inline]
    pub fn grad(&self, g: Vec2) -> Vec2 {
        let k = &self.inverse;
        [k[0][0] * g[0] + k[1][0] * g[1], k[0][1] * g[0] + k[1][1] * g[1]]
    }

    /// `J^{-T} H J^{-1}`.
    #[inline]
    pub fn hessian(&self, h: Sym2) -> Sym2 {
        let k = &self.inverse;
        // rows of J^{-T} are the columns of J^{-1}
        let c0 = [k[0][0], k[1][0]];
        let c1 = [k[0][1], k[1][1]];
        Sym2::new(h.form(c0, c0), h.form(c0, c1), h.form(c1, c1))
    }
}

/// Physical gradients and Hessians from reference ones.
pub fn physical_derivatives(
    eval: &BasisEval,
    map: &AffineMap,
) -> ([Vec2; N_NODES], [Sym2; N_NODES]) {
    let mut g = [[0.0; 2]; N_NODES];
    let mut h = [Sym2::default(); N_NODES];
    for i in 0..N_NODES {
        g[i] = map.grad(eval.grads[i]);
        h[i] = map.hessian(eval.hessians[i]);
    }
    (g, h)
}
