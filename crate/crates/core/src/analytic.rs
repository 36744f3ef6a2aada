//! Closed-form reference solutions: the clamped-disc biharmonic Green's
//! function, the manufactured pressure test, the disclination dipole and
//! the Kirchhoff–Love reductions.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::forms::{Disclination, DisclinationSet, Load};
use crate::geom::{self, Vec2};

pub type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;

/// Green's function of `Δ²` on the unit disc with clamped boundary
/// conditions. At `ξ = y` the continuous limit `(1 − |y|²)² / 16π` is
/// returned.
pub fn green_disc(xi: Vec2, y: Vec2) -> f64 {
    let xi2 = geom::dot(xi, xi);
    let y2 = geom::dot(y, y);
    let d = geom::sub(xi, y);
    let d2 = geom::dot(d, d);
    let smooth = (1.0 - xi2) * (1.0 - y2);
    if d2 == 0.0 {
        return smooth / (16.0 * PI);
    }
    let denom = xi2 * y2 - 2.0 * geom::dot(xi, y) + 1.0;
    (smooth + d2 * (d2 / denom).ln()) / (16.0 * PI)
}

/// Polynomial in `s = r²`, for radially symmetric fields. Coefficients are
/// in ascending powers of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPoly(pub Vec<f64>);

impl RadialPoly {
    /// `scale · (1 − s)^k`.
    pub fn one_minus_s_pow(k: usize, scale: f64) -> Self {
        let mut c = vec![0.0; k + 1];
        let mut binom = 1.0;
        for (j, cj) in c.iter_mut().enumerate() {
            *cj = scale * binom * if j % 2 == 0 { 1.0 } else { -1.0 };
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        RadialPoly(c)
    }

    pub fn add(&self, o: &RadialPoly) -> RadialPoly {
        let n = self.0.len().max(o.0.len());
        RadialPoly(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&0.0) + o.0.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn scale(&self, a: f64) -> RadialPoly {
        RadialPoly(self.0.iter().map(|c| a * c).collect())
    }

    pub fn mul(&self, o: &RadialPoly) -> RadialPoly {
        let mut c = vec![0.0; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        RadialPoly(c)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// `d/ds`.
    pub fn ds(&self) -> RadialPoly {
        if self.0.len() <= 1 {
            return RadialPoly(vec![0.0]);
        }
        RadialPoly(self.0.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect())
    }

    fn times_s(&self) -> RadialPoly {
        let mut c = vec![0.0];
        c.extend_from_slice(&self.0);
        RadialPoly(c)
    }

    /// Hoop curvature `f'(r)/r = 2 f_s`.
    pub fn hoop(&self) -> RadialPoly {
        self.ds().scale(2.0)
    }

    /// Radial curvature `f''(r) = 2 f_s + 4 s f_ss`.
    pub fn radial(&self) -> RadialPoly {
        let fs = self.ds();
        fs.scale(2.0).add(&fs.ds().times_s().scale(4.0))
    }

    /// `Δf = 4 (s f_s)_s`.
    pub fn laplacian(&self) -> RadialPoly {
        self.ds().times_s().ds().scale(4.0)
    }

    pub fn bilaplacian(&self) -> RadialPoly {
        self.laplacian().laplacian()
    }

    /// `[f, g] = f_rr g_θθ + f_θθ g_rr` for radial fields.
    pub fn bracket(&self, g: &RadialPoly) -> RadialPoly {
        self.radial().mul(&g.hoop()).add(&self.hoop().mul(&g.radial()))
    }

    /// Gradient at `ξ`: `2 f_s ξ`.
    pub fn grad(&self, xi: Vec2) -> Vec2 {
        let d = 2.0 * self.ds().eval(geom::dot(xi, xi));
        [d * xi[0], d * xi[1]]
    }
}

/// Energies of an exact solution, using the same definitions as
/// [`crate::post::EnergyBreakdown`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactEnergies {
    pub membrane: f64,
    pub bending: f64,
    pub coupling: f64,
}

/// A closed-form pair `(w*, v*)` with the data that produces it.
#[derive(Clone)]
pub struct ExactSolution {
    pub w: ScalarFn,
    pub v: ScalarFn,
    pub load: Load,
    /// Prefactor `γβ⁴` in front of the load for which the pair is exact.
    pub load_factor: f64,
    pub disclinations: DisclinationSet,
    pub energies: ExactEnergies,
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExactSolution")
            .field("load", &self.load)
            .field("load_factor", &self.load_factor)
            .field("disclinations", &self.disclinations)
            .field("energies", &self.energies)
            .finish_non_exhaustive()
    }
}

pub fn c_nu(nu: f64) -> f64 {
    1.0 / (12.0 * (1.0 - nu * nu))
}

/// Radial profiles `(w*, v*, p)` of the manufactured pressure test.
pub fn test1_profiles(c_nu: f64) -> (RadialPoly, RadialPoly, RadialPoly) {
    let w = RadialPoly::one_minus_s_pow(2, (2.0 * c_nu).sqrt());
    let v = RadialPoly::one_minus_s_pow(2, -c_nu / 12.0)
        .add(&RadialPoly::one_minus_s_pow(3, -c_nu / 18.0))
        .add(&RadialPoly::one_minus_s_pow(4, -c_nu / 24.0));
    let amp = (2.0 * c_nu.powi(3)).sqrt();
    let p = RadialPoly::one_minus_s_pow(4, amp * 40.0 / 3.0)
        .add(&RadialPoly(vec![amp * 16.0 / 3.0 * 11.0, amp * 16.0 / 3.0]));
    (w, v, p)
}

/// Transverse load of the manufactured test at `ξ`.
pub fn test1_load(c_nu: f64, xi: Vec2) -> f64 {
    let s = geom::dot(xi, xi);
    let amp = (2.0 * c_nu.powi(3)).sqrt();
    amp * (40.0 / 3.0 * (1.0 - s).powi(4) + 16.0 / 3.0 * (11.0 + s))
}

/// Manufactured pressure test: no disclinations, load factor `γβ⁴ = 1`.
pub fn test1_exact(nu: f64) -> ExactSolution {
    let c = c_nu(nu);
    let (w, v) = {
        let (w, v, _) = test1_profiles(c);
        (w, v)
    };
    let wf: ScalarFn = Arc::new(move |x| w.eval(geom::dot(x, x)));
    let vf: ScalarFn = Arc::new(move |x| v.eval(geom::dot(x, x)));
    ExactSolution {
        w: wf,
        v: vf,
        load: Load::Manufactured,
        load_factor: 1.0,
        disclinations: DisclinationSet::empty(),
        energies: ExactEnergies {
            membrane: 2.0 * PI * c * c / 7.0,
            bending: 64.0 * PI * c * c / 3.0,
            coupling: 4.0 * PI * c * c / 7.0,
        },
    }
}

/// Disclination dipole: `+1` at `y1`, `−1` at `−y1`, no load, flat plate.
pub fn test2_exact(beta: f64, y1: Vec2) -> ExactSolution {
    let b2 = beta * beta;
    let m = [-y1[0], -y1[1]];
    let vf: ScalarFn = Arc::new(move |x| b2 * (green_disc(x, y1) - green_disc(x, m)));
    let disclinations = DisclinationSet::new(vec![
        Disclination::new(y1, 1.0),
        Disclination::new(m, -1.0),
    ])
    .expect("dipole positions lie inside the disc");
    ExactSolution {
        w: Arc::new(|_| 0.0),
        v: vf,
        load: Load::Zero,
        load_factor: 0.0,
        disclinations,
        energies: ExactEnergies {
            membrane: b2 * b2 * (green_disc(y1, y1) - green_disc(y1, m)),
            bending: 0.0,
            coupling: 0.0,
        },
    }
}

/// Membrane energy of the linear (Kirchhoff–Love) problem
/// `Δ²v = ±β² δ₀`.
pub fn kl_membrane_energy(beta: f64) -> f64 {
    beta.powi(4) / (32.0 * PI)
}

/// Bending energy of the linear problem `c_ν Δ²w = −γβ⁴`.
pub fn kl_bending_energy(gamma: f64, beta: f64, c_nu: f64) -> f64 {
    let f = gamma * beta.powi(4);
    PI * f * f / (384.0 * c_nu)
}

/// Airy potential for a single disclination of angle `s` at the origin,
/// neglecting the coupling.
pub fn kl_membrane_solution(beta: f64, s: f64, xi: Vec2) -> f64 {
    s * beta * beta * green_disc(xi, [0.0, 0.0])
}

/// Deflection solving `c_ν Δ²w = −γβ⁴` on the clamped disc.
pub fn kl_bending_solution(gamma: f64, beta: f64, c_nu: f64, xi: Vec2) -> f64 {
    let s = geom::dot(xi, xi);
    -gamma * beta.powi(4) * (1.0 - s).powi(2) / (64.0 * c_nu)
}

const PRESET_POSITIONS: [Vec2; 4] = [[0.5, 0.0], [0.0, 0.5], [-0.5, 0.0], [0.0, -0.5]];

fn ring_preset(angle: f64, centre: Option<f64>) -> DisclinationSet {
    let mut items: Vec<Disclination> = Vec::new();
    if let Some(s) = centre {
        items.push(Disclination::new([0.0, 0.0], s));
    }
    items.extend(PRESET_POSITIONS.iter().map(|&p| Disclination::new(p, angle)));
    DisclinationSet::new(items).expect("preset positions lie inside the disc")
}

/// The four symmetric multi-disclination arrangements, by name.
pub fn multi_disclination_presets() -> Vec<(&'static str, DisclinationSet)> {
    vec![
        ("four-negative", ring_preset(-0.5, None)),
        ("four-positive", ring_preset(0.5, None)),
        ("flower", ring_preset(-0.25, Some(1.0))),
        ("inverted-flower", ring_preset(0.25, Some(-1.0))),
    ]
}

pub fn preset(name: &str) -> Option<DisclinationSet> {
    multi_disclination_presets()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
}
