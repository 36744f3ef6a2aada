//! The discrete plate functional, its first variation (the residual) and
//! the exact Jacobian, for the variational formulation and the two
//! literature variants.
//!
//! Unknowns are stacked as `x = [v; w]` over the free dofs. Edge terms use
//! `[[u]] = u⁻ − u⁺` and `{u} = (u⁺ + u⁻)/2` with the normal pointing from
//! `T⁻` to `T⁺`, so that `[[∂_n u]]` is the sum of the outward normal
//! derivatives of both sides; on boundary edges both reduce to the
//! one-sided trace, which keeps the consistency terms of the biharmonic
//! form consistent on every edge.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::element::{
    cell_quadrature, edge_quadrature, eval_basis, physical_derivatives, BasisEval, N_NODES, NODES,
};
use crate::error::{FvkError, Result};
use crate::geom::{self, Sym2, Vec2};
use crate::solver::NonlinearSystem;
use crate::space::{Field, Space, CONSTRAINED};
use crate::sparse::{self, CsrMatrix};


#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Variational formulation: the residual is the exact gradient of `I_η`.
    #[default]
    Var,
    /// Brenner–Neilan–Reiser–Sung style coupling terms.
    Bnrs17,
    /// Carstensen–Mallik–Nataraj style: broken brackets, no edge coupling.
    Cmn18,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Var, Variant::Bnrs17, Variant::Cmn18];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Var => "var",
            Variant::Bnrs17 => "bnrs17",
            Variant::Cmn18 => "cmn18",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = FvkError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "var" => Ok(Variant::Var),
            "bnrs17" => Ok(Variant::Bnrs17),
            "cmn18" => Ok(Variant::Cmn18),
            other => Err(FvkError::Parameter(format!(
                "unknown variant {other:?} (expected var, bnrs17 or cmn18)"
            ))),
        }
    }
}

/// A wedge disclination of Frank angle `angle` at `position`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disclination {
    pub position: Vec2,
    pub angle: f64,
}

impl Disclination {
    pub fn new(position: Vec2, angle: f64) -> Self {
        Disclination { position, angle }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DisclinationSet(Vec<Disclination>);

impl DisclinationSet {
    /// Positions must lie strictly inside the unit disc; angles must be
    /// nonzero and finite.
    pub fn new(items: Vec<Disclination>) -> Result<Self> {
        let set = DisclinationSet(items);
        set.validate()?;
        Ok(set)
    }

    pub fn empty() -> Self {
        DisclinationSet(Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        for d in &self.0 {
            if !(geom::norm(d.position) < 1.0) {
                return Err(FvkError::Parameter(format!(
                    "disclination at {:?} is not strictly inside the unit disc",
                    d.position
                )));
            }
            if d.angle == 0.0 || !d.angle.is_finite() {
                return Err(FvkError::Parameter(format!(
                    "disclination angle must be nonzero and finite, got {}",
                    d.angle
                )));
            }
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Disclination> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_angle(&self) -> f64 {
        self.0.iter().map(|d| d.angle).sum()
    }
}

/// Transverse load profile `p(ξ)`; the problem multiplies it by `γβ⁴`.
#[derive(Clone, Default)]
pub enum Load {
    #[default]
    Zero,
    Uniform(f64),
    /// The radial load of the manufactured pressure test (depends on `c_ν`).
    Manufactured,
    Custom(Arc<dyn Fn(Vec2) -> f64 + Send + Sync>),
}

impl Load {
    pub fn eval(&self, c_nu: f64, x: Vec2) -> f64 {
        match self {
            Load::Zero => 0.0,
            Load::Uniform(p) => *p,
            Load::Manufactured => analytic::test1_load(c_nu, x),
            Load::Custom(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Load::Zero) || matches!(self, Load::Uniform(p) if *p == 0.0)
    }
}

impl fmt::Debug for Load {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Load::Zero => f.write_str("Zero"),
            Load::Uniform(p) => write!(f, "Uniform({p})"),
            Load::Manufactured => f.write_str("Manufactured"),
            Load::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Non-dimensional plate parameters and data.
#[derive(Debug, Clone)]
pub struct PlateProblem {
    pub beta: f64,
    pub gamma: f64,
    pub nu: f64,
    pub alpha: f64,
    pub variant: Variant,
    pub load: Load,
    pub disclinations: DisclinationSet,
}

impl Default for PlateProblem {
    fn default() -> Self {
        PlateProblem {
            beta: 1.0,
            gamma: 0.0,
            nu: 0.15,
            alpha: 300.0,
            variant: Variant::Var,
            load: Load::Zero,
            disclinations: DisclinationSet::empty(),
        }
    }
}

impl PlateProblem {
    pub fn new(beta: f64, gamma: f64) -> Self {
        PlateProblem {
            beta,
            gamma,
            ..Default::default()
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_load(mut self, load: Load) -> Self {
        self.load = load;
        self
    }

    pub fn with_disclinations(mut self, d: DisclinationSet) -> Self {
        self.disclinations = d;
        self
    }

    /// `c_ν = 1 / (12 (1 − ν²))`.
    pub fn c_nu(&self) -> f64 {
        analytic::c_nu(self.nu)
    }

    /// Prefactor `γβ⁴` of the transverse load.
    pub fn load_factor(&self) -> f64 {
        self.gamma * self.beta.powi(4)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FvkError::Parameter(m));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !self.gamma.is_finite() {
            return bad(format!("gamma must be finite, got {}", self.gamma));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return bad(format!("nu must lie in (-1, 1/2), got {}", self.nu));
        }
        self.disclinations.validate()
    }
}

/// Stacked state `(v, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub v: Field,
    pub w: Field,
}

impl State {
    pub fn zeros(space: &Space) -> Self {
        State {
            v: space.zero_field(),
            w: space.zero_field(),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut x = self.v.coeffs().to_vec();
        x.extend_from_slice(self.w.coeffs());
        x
    }

    pub fn from_vec(mut x: Vec<f64>) -> Self {
        assert!(x.len().is_multiple_of(2), "stacked state must have even length");
        let w = x.split_off(x.len() / 2);
        State {
            v: Field::from_vec(x),
            w: Field::from_vec(w),
        }
    }
}

/// Residual and Jacobian at one state.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub residual: Vec<f64>,
    pub jacobian: CsrMatrix,
}

// ---------------------------------------------------------------------------
// quadrature data

/// Physical basis data at one cell quadrature point.
pub struct CellPoint {
    pub weight: f64,
    pub x: Vec2,
    pub values: [f64; N_NODES],
    pub grads: [Vec2; N_NODES],
    pub hessians: [Sym2; N_NODES],
}

/// Reference basis evaluations at the cell and edge quadrature points.
pub struct Quadrature {
    cell_points: Vec<Vec2>,
    cell_weights: Vec<f64>,
    cell: Vec<BasisEval>,
    edge_weights: Vec<f64>,
    /// `edge[k][reversed][q]`: basis on local edge `k`, traversed forwards
    /// (from local vertex `k`) or backwards.
    edge: [[Vec<BasisEval>; 2]; 3],
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new()
    }
}

impl Quadrature {
    pub fn new() -> Self {
        let cq = cell_quadrature();
        let eq = edge_quadrature();
        let cell = cq.points.iter().map(|&p| eval_basis(p)).collect();
        let edge = std::array::from_fn(|k| {
            let (a, b) = (NODES[k], NODES[(k + 1) % 3]);
            std::array::from_fn(|rev| {
                eq.points
                    .iter()
                    .map(|p| {
                        let s = if rev == 1 { 1.0 - p[0] } else { p[0] };
                        eval_basis([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
                    })
                    .collect()
            })
        });
        Quadrature {
            cell_points: cq.points,
            cell_weights: cq.weights,
            cell,
            edge_weights: eq.weights,
            edge,
        }
    }

    pub fn cell_points(&self, space: &Space, t: usize) -> impl Iterator<Item = CellPoint> + '_ {
        let map = *space.map(t);
        (0..self.cell.len()).map(move |q| {
            let e = &self.cell[q];
            let (grads, hessians) = physical_derivatives(e, &map);
            CellPoint {
                weight: self.cell_weights[q] * map.det,
                x: map.to_physical(self.cell_points[q]),
                values: e.values,
                grads,
                hessians,
            }
        })
    }
}

/// Per-edge data needed by the edge loops.
#[derive(Debug, Clone)]
struct EdgeInfo {
    /// `(cell, local edge, reversed)` for `T⁻` and, if interior, `T⁺`.
    sides: Vec<(usize, usize, usize)>,
    normal: Vec2,
    tangent: Vec2,
    length: f64,
    penalty: f64,
    /// Free dof indices of the local functions (10 or 20).
    dofs: Vec<usize>,
}

impl EdgeInfo {
    fn interior(&self) -> bool {
        self.sides.len() == 2
    }
}

/// Edge traces of the local functions at one edge quadrature point. Each
/// entry is the contribution of a single cell-local basis function.
struct EdgePoint {
    weight: f64,
    /// `[[∂_n φ]]`
    jn: Vec<f64>,
    /// `{∂_nn φ}`
    snn: Vec<f64>,
    /// `{∂_t φ}`
    tg: Vec<f64>,
    /// `{∂_tt φ}`
    stt: Vec<f64>,
    /// `{φ}`
    val: Vec<f64>,
}

fn edge_points(space: &Space, quad: &Quadrature, info: &EdgeInfo) -> Vec<EdgePoint> {
    let n_loc = N_NODES * info.sides.len();
    let (n, t) = (info.normal, info.tangent);
    let interior = info.interior();
    (0..quad.edge_weights.len())
        .map(|q| {
            let mut p = EdgePoint {
                weight: quad.edge_weights[q] * info.length,
                jn: vec![0.0; n_loc],
                snn: vec![0.0; n_loc],
                tg: vec![0.0; n_loc],
                stt: vec![0.0; n_loc],
                val: vec![0.0; n_loc],
            };
            for (side, &(cell, k, rev)) in info.sides.iter().enumerate() {
                let e = &quad.edge[k][rev][q];
                let (g, h) = physical_derivatives(e, space.map(cell));
                // T⁻ is side 0, T⁺ side 1
                let (jump, avg) = match (interior, side) {
                    (false, _) => (1.0, 1.0),
                    (true, 0) => (1.0, 0.5),
                    (true, _) => (-1.0, 0.5),
                };
                for i in 0..N_NODES {
                    let l = side * N_NODES + i;
                    p.jn[l] = jump * geom::dot(g[i], n);
                    p.snn[l] = avg * h[i].form(n, n);
                    p.tg[l] = avg * geom::dot(g[i], t);
                    p.stt[l] = avg * h[i].form(t, t);
                    p.val[l] = avg * e.values[i];
                }
            }
            p
        })
        .collect()
}

fn dotn(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maps `f` over `0..n` in parallel, chunk by chunk, and feeds the results
/// to `sink` in index order so that accumulation is deterministic.
fn par_ordered<T, F, S>(n: usize, f: F, mut sink: S)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
    S: FnMut(usize, T),
{
    const CHUNK: usize = 512;
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let out: Vec<T> = (start..end).into_par_iter().map(&f).collect();
        for (i, v) in out.into_iter().enumerate() {
            sink(start + i, v);
        }
        start = end;
    }
}

fn scatter(m: &mut CsrMatrix, dofs: &[usize], local: &[f64]) {
    let n = dofs.len();
    for (a, &r) in dofs.iter().enumerate() {
        if r == CONSTRAINED {
            continue;
        }
        for (b, &c) in dofs.iter().enumerate() {
            if c != CONSTRAINED {
                let v = local[a * n + b];
                if v != 0.0 {
                    m.add(r, c, v);
                }
            }
        }
    }
}

fn scatter_vec(out: &mut [f64], dofs: &[usize], local: &[f64]) {
    for (&r, &v) in dofs.iter().zip(local) {
        if r != CONSTRAINED {
            out[r] += v;
        }
    }
}

// ---------------------------------------------------------------------------
// linear operators and loads

/// Sparsity of one `n_free × n_free` block: cell couplings plus, across
/// every interior edge, the union of both cells' dofs.
pub fn dg_pattern(space: &Space) -> CsrMatrix {
    let nf = space.n_free();
    let mesh = space.mesh();
    let dm = space.dofmap();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); nf];
    let mut add_group = |dofs: &[usize]| {
        for &r in dofs.iter().filter(|&&r| r != CONSTRAINED) {
            rows[r].extend(dofs.iter().copied().filter(|&c| c != CONSTRAINED));
        }
    };
    for t in 0..mesh.n_triangles() {
        add_group(dm.cell_free(t));
    }
    for e in 0..mesh.n_edges() {
        if let Some(p) = mesh.edge_cells(e).plus {
            let mut dofs = dm.cell_free(mesh.edge_cells(e).minus).to_vec();
            dofs.extend_from_slice(dm.cell_free(p));
            add_group(&dofs);
        }
    }
    CsrMatrix::from_pattern(nf, nf, rows)
}

fn edge_infos(space: &Space, alpha: f64) -> Vec<EdgeInfo> {
    let mesh = space.mesh();
    let dm = space.dofmap();
    (0..mesh.n_edges())
        .map(|e| {
            let g = mesh.edge_geometry(e);
            let cells = mesh.edge_cells(e);
            let [a, _] = mesh.edges()[e];
            let side = |t: usize| {
                let k = mesh
                    .triangle_edges(t)
                    .iter()
                    .position(|&x| x == e)
                    .expect("edge belongs to its incident cell");
                let rev = usize::from(mesh.triangles()[t][k] != a);
                (t, k, rev)
            };
            let mut sides = vec![side(cells.minus)];
            let mut dofs = dm.cell_free(cells.minus).to_vec();
            if let Some(p) = cells.plus {
                sides.push(side(p));
                dofs.extend_from_slice(dm.cell_free(p));
            }
            EdgeInfo {
                sides,
                normal: g.normal,
                tangent: g.tangent,
                length: g.length,
                penalty: alpha / g.avg_diameter,
                dofs,
            }
        })
        .collect()
}

/// The two parts of the interior-penalty biharmonic form on `pattern`:
/// `K` (cell Hessian products and symmetric consistency terms) and `P`
/// (normal-derivative jump penalty), both summed over all edges.
fn assemble_linear(
    space: &Space,
    quad: &Quadrature,
    edges: &[EdgeInfo],
    pattern: &CsrMatrix,
) -> (CsrMatrix, CsrMatrix) {
    let mut k_mat = pattern.clone();
    let mut p_mat = pattern.clone();
    let dm = space.dofmap();
    par_ordered(
        space.mesh().n_triangles(),
        |t| {
            let mut local = [0.0; N_NODES * N_NODES];
            for cp in quad.cell_points(space, t) {
                for i in 0..N_NODES {
                    for j in 0..N_NODES {
                        local[i * N_NODES + j] += cp.weight * cp.hessians[i].ddot(cp.hessians[j]);
                    }
                }
            }
            local
        },
        |t, local| scatter(&mut k_mat, dm.cell_free(t), &local),
    );
    par_ordered(
        edges.len(),
        |e| {
            let info = &edges[e];
            let n = info.dofs.len();
            let mut kl = vec![0.0; n * n];
            let mut pl = vec![0.0; n * n];
            for p in edge_points(space, quad, info) {
                for i in 0..n {
                    for j in 0..n {
                        kl[i * n + j] -= p.weight * (p.jn[j] * p.snn[i] + p.jn[i] * p.snn[j]);
                        pl[i * n + j] += p.weight * info.penalty * p.jn[i] * p.jn[j];
                    }
                }
            }
            (kl, pl)
        },
        |e, (kl, pl)| {
            scatter(&mut k_mat, &edges[e].dofs, &kl);
            scatter(&mut p_mat, &edges[e].dofs, &pl);
        },
    );
    (k_mat, p_mat)
}

/// Symmetric interior-penalty matrix of `Δ²` on the free dofs:
/// `A(u,φ) = Σ_T ∫ ∇²u:∇²φ − Σ_e ∫ ([[∂_n u]]{∂_nn φ} + [[∂_n φ]]{∂_nn u})
/// + Σ_e α/{η} ∫ [[∂_n u]][[∂_n φ]]`.
pub fn assemble_biharmonic_dg(space: &Space, alpha: f64) -> Result<CsrMatrix> {
    if !(alpha > 0.0) {
        return Err(FvkError::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    let quad = Quadrature::new();
    let edges = edge_infos(space, alpha);
    let pattern = dg_pattern(space);
    let (mut k, p) = assemble_linear(space, &quad, &edges, &pattern);
    k.values_mut().iter_mut().zip(p.values()).for_each(|(a, b)| *a += b);
    Ok(k)
}

/// `β² Σ_i s_i φ_j(y_i)` for every free basis function `φ_j`.
pub fn assemble_dirac_load(space: &Space, disclinations: &DisclinationSet, beta: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; space.n_free()];
    for d in disclinations.iter() {
        let (t, _) = space.locate_point(d.position)?;
        let e = eval_basis(space.map(t).to_reference(d.position));
        let local: Vec<f64> = e.values.iter().map(|v| beta * beta * d.angle * v).collect();
        scatter_vec(&mut out, space.dofmap().cell_free(t), &local);
    }
    Ok(out)
}

/// `factor · ∫ p φ_j` for every free basis function.
pub fn assemble_pressure_load(space: &Space, load: &Load, c_nu: f64, factor: f64) -> Vec<f64> {
    let mut out = vec![0.0; space.n_free()];
    if load.is_zero() || factor == 0.0 {
        return out;
    }
    let quad = Quadrature::new();
    let dm = space.dofmap();
    par_ordered(
        space.mesh().n_triangles(),
        |t| {
            let mut local = [0.0; N_NODES];
            for cp in quad.cell_points(space, t) {
                let p = factor * load.eval(c_nu, cp.x) * cp.weight;
                for i in 0..N_NODES {
                    local[i] += p * cp.values[i];
                }
            }
            local
        },
        |t, local| scatter_vec(&mut out, dm.cell_free(t), &local),
    );
    out
}

// ---------------------------------------------------------------------------
// the nonlinear system

/// Residual, Jacobian and functional of one plate problem on one space.
/// State-independent operators and loads are assembled once.
pub struct PlateSystem<'a> {
    space: &'a Space,
    problem: PlateProblem,
    quad: Quadrature,
    edges: Vec<EdgeInfo>,
    pattern: CsrMatrix,
    k_mat: CsrMatrix,
    p_mat: CsrMatrix,
    dirac: Vec<f64>,
    pressure: Vec<f64>,
    full_pattern: CsrMatrix,
}

/// Cell contributions of the coupling terms for one cell.
struct CellCoupling {
    rv: [f64; N_NODES],
    rw: [f64; N_NODES],
    energy: f64,
}

impl<'a> PlateSystem<'a> {
    pub fn new(space: &'a Space, problem: &PlateProblem) -> Result<Self> {
        problem.validate()?;
        let quad = Quadrature::new();
        let edges = edge_infos(space, problem.alpha);
        let pattern = dg_pattern(space);
        let (k_mat, p_mat) = assemble_linear(space, &quad, &edges, &pattern);
        let dirac = assemble_dirac_load(space, &problem.disclinations, problem.beta)?;
        let pressure =
            assemble_pressure_load(space, &problem.load, problem.c_nu(), problem.load_factor());
        let full_pattern = stacked_pattern(&pattern);
        Ok(PlateSystem {
            space,
            problem: problem.clone(),
            quad,
            edges,
            pattern,
            k_mat,
            p_mat,
            dirac,
            pressure,
            full_pattern,
        })
    }

    pub fn space(&self) -> &Space {
        self.space
    }

    pub fn problem(&self) -> &PlateProblem {
        &self.problem
    }

    pub fn n_free(&self) -> usize {
        self.space.n_free()
    }

    /// `A = K + P`, the interior-penalty biharmonic matrix.
    pub fn biharmonic(&self) -> CsrMatrix {
        let mut a = self.k_mat.clone();
        a.values_mut().iter_mut().zip(self.p_mat.values()).for_each(|(x, y)| *x += y);
        a
    }

    pub fn dirac_load(&self) -> &[f64] {
        &self.dirac
    }

    pub fn pressure_load(&self) -> &[f64] {
        &self.pressure
    }

    fn split<'x>(&self, x: &'x [f64]) -> (&'x [f64], &'x [f64]) {
        assert_eq!(x.len(), 2 * self.n_free(), "state has the wrong length");
        x.split_at(self.n_free())
    }

    fn local(&self, x: &[f64], dofs: &[usize]) -> Vec<f64> {
        dofs.iter().map(|&f| if f == CONSTRAINED { 0.0 } else { x[f] }).collect()
    }

    fn cell_coupling(&self, v: &[f64], w: &[f64], t: usize) -> CellCoupling {
        let dofs = self.space.dofmap().cell_free(t);
        let (cv, cw) = (self.local(v, dofs), self.local(w, dofs));
        let mut out = CellCoupling {
            rv: [0.0; N_NODES],
            rw: [0.0; N_NODES],
            energy: 0.0,
        };
        for cp in self.quad.cell_points(self.space, t) {
            let (gw, hv, hw) = state_at(&cp, &cv, &cw);
            let cof_hv = hv.cof();
            out.energy += cp.weight * 0.5 * cof_hv.form(gw, gw);
            for i in 0..N_NODES {
                match self.problem.variant {
                    Variant::Var => {
                        out.rv[i] += cp.weight * 0.5 * cp.hessians[i].cof().form(gw, gw);
                        out.rw[i] += cp.weight * cof_hv.form(gw, cp.grads[i]);
                    }
                    Variant::Bnrs17 | Variant::Cmn18 => {
                        out.rv[i] -= cp.weight * hw.det() * cp.values[i];
                        out.rw[i] -= cp.weight * cof_hv.ddot(hw) * cp.values[i];
                    }
                }
            }
        }
        out
    }

    /// Local Jacobian blocks `(vw, wv, ww)` of the cell coupling terms.
    fn cell_coupling_jacobian(&self, v: &[f64], w: &[f64], t: usize) -> [[f64; N_NODES * N_NODES]; 3] {
        let dofs = self.space.dofmap().cell_free(t);
        let (cv, cw) = (self.local(v, dofs), self.local(w, dofs));
        let mut out = [[0.0; N_NODES * N_NODES]; 3];
        for cp in self.quad.cell_points(self.space, t) {
            let (gw, hv, hw) = state_at(&cp, &cv, &cw);
            let cof_hv = hv.cof();
            let cof_hw = hw.cof();
            for i in 0..N_NODES {
                for j in 0..N_NODES {
                    let ij = i * N_NODES + j;
                    let (vw, wv, ww) = match self.problem.variant {
                        Variant::Var => (
                            cp.hessians[i].cof().form(cp.grads[j], gw),
                            cp.hessians[j].cof().form(gw, cp.grads[i]),
                            cof_hv.form(cp.grads[j], cp.grads[i]),
                        ),
                        Variant::Bnrs17 | Variant::Cmn18 => (
                            -cp.values[i] * cof_hw.ddot(cp.hessians[j]),
                            -cp.values[i] * cp.hessians[j].cof().ddot(hw),
                            -cp.values[i] * cof_hv.ddot(cp.hessians[j]),
                        ),
                    };
                    out[0][ij] += cp.weight * vw;
                    out[1][ij] += cp.weight * wv;
                    out[2][ij] += cp.weight * ww;
                }
            }
        }
        out
    }

    /// Edge coupling residual contributions `(rv, rw, energy)`.
    fn edge_coupling(&self, v: &[f64], w: &[f64], info: &EdgeInfo) -> (Vec<f64>, Vec<f64>, f64) {
        let n = info.dofs.len();
        let (cv, cw) = (self.local(v, &info.dofs), self.local(w, &info.dofs));
        let mut rv = vec![0.0; n];
        let mut rw = vec![0.0; n];
        let mut energy = 0.0;
        for p in edge_points(self.space, &self.quad, info) {
            let jn_v = dotn(&p.jn, &cv);
            let jn_w = dotn(&p.jn, &cw);
            let tw = dotn(&p.tg, &cw);
            match self.problem.variant {
                Variant::Var => {
                    let s = -p.weight;
                    energy += s * 0.5 * tw * tw * jn_v;
                    for i in 0..n {
                        rv[i] += s * 0.5 * tw * tw * p.jn[i];
                        rw[i] += s * tw * p.tg[i] * jn_v;
                    }
                }
                Variant::Bnrs17 => {
                    let stt_v = dotn(&p.stt, &cv);
                    let stt_w = dotn(&p.stt, &cw);
                    for i in 0..n {
                        rv[i] += p.weight * 0.5 * stt_w * jn_w * p.val[i];
                        rw[i] += p.weight * 0.5 * (stt_v * jn_w + stt_w * jn_v) * p.val[i];
                    }
                }
                Variant::Cmn18 => {}
            }
        }
        (rv, rw, energy)
    }

    fn edge_coupling_jacobian(&self, v: &[f64], w: &[f64], info: &EdgeInfo) -> [Vec<f64>; 3] {
        let n = info.dofs.len();
        let (cv, cw) = (self.local(v, &info.dofs), self.local(w, &info.dofs));
        let mut out = [vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n]];
        for p in edge_points(self.space, &self.quad, info) {
            let jn_v = dotn(&p.jn, &cv);
            let jn_w = dotn(&p.jn, &cw);
            let tw = dotn(&p.tg, &cw);
            let stt_v = dotn(&p.stt, &cv);
            let stt_w = dotn(&p.stt, &cw);
            for i in 0..n {
                for j in 0..n {
                    let ij = i * n + j;
                    let (vw, wv, ww) = match self.problem.variant {
                        Variant::Var => (
                            tw * p.tg[j] * p.jn[i],
                            tw * p.tg[i] * p.jn[j],
                            p.tg[j] * p.tg[i] * jn_v,
                        ),
                        Variant::Bnrs17 => {
                            let d = 0.5 * p.val[i];
                            (
                                d * (p.stt[j] * jn_w + stt_w * p.jn[j]),
                                d * (p.stt[j] * jn_w + stt_w * p.jn[j]),
                                d * (stt_v * p.jn[j] + p.stt[j] * jn_v),
                            )
                        }
                        Variant::Cmn18 => (0.0, 0.0, 0.0),
                    };
                    let s = if self.problem.variant == Variant::Var {
                        -p.weight
                    } else {
                        p.weight
                    };
                    out[0][ij] += s * vw;
                    out[1][ij] += s * wv;
                    out[2][ij] += s * ww;
                }
            }
        }
        out
    }

    fn coupling_edges(&self) -> impl Iterator<Item = &EdgeInfo> {
        self.edges.iter().filter(|e| e.interior())
    }

    /// Nonlinear coupling residual `(C_v, C_w)` and its energy.
    fn coupling(&self, v: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let nf = self.n_free();
        let mut cv = vec![0.0; nf];
        let mut cw = vec![0.0; nf];
        let mut energy = 0.0;
        let dm = self.space.dofmap();
        par_ordered(
            self.space.mesh().n_triangles(),
            |t| self.cell_coupling(v, w, t),
            |t, c| {
                scatter_vec(&mut cv, dm.cell_free(t), &c.rv);
                scatter_vec(&mut cw, dm.cell_free(t), &c.rw);
                energy += c.energy;
            },
        );
        if self.problem.variant != Variant::Cmn18 {
            let edges: Vec<&EdgeInfo> = self.coupling_edges().collect();
            par_ordered(
                edges.len(),
                |e| self.edge_coupling(v, w, edges[e]),
                |e, (rv, rw, en)| {
                    scatter_vec(&mut cv, &edges[e].dofs, &rv);
                    scatter_vec(&mut cw, &edges[e].dofs, &rw);
                    energy += en;
                },
            );
        }
        (cv, cw, energy)
    }

    pub fn residual_split(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (v, w) = self.split(x);
        let (cv, cw, _) = self.coupling(v, w);
        let c = self.problem.c_nu();
        let kv = self.k_mat.matvec(v);
        let pv = self.p_mat.matvec(v);
        let kw = self.k_mat.matvec(w);
        let pw = self.p_mat.matvec(w);
        let rv = (0..v.len()).map(|i| -kv[i] - pv[i] + cv[i] + self.dirac[i]).collect();
        let rw = (0..w.len()).map(|i| c * kw[i] + pw[i] + cw[i] - self.pressure[i]).collect();
        (rv, rw)
    }

    pub fn residual_vec(&self, x: &[f64]) -> Vec<f64> {
        let (mut rv, rw) = self.residual_split(x);
        rv.extend(rw);
        rv
    }

    /// The discrete functional `I_η` of the variational formulation.
    pub fn functional(&self, x: &[f64]) -> f64 {
        let (v, w) = self.split(x);
        let energy = self.var_coupling_energy(v, w);
        let c = self.problem.c_nu();
        let quad = |m: &CsrMatrix, u: &[f64]| sparse::dot(u, &m.matvec(u));
        -0.5 * (quad(&self.k_mat, v) + quad(&self.p_mat, v))
            + 0.5 * c * quad(&self.k_mat, w)
            + 0.5 * quad(&self.p_mat, w)
            + energy
            + sparse::dot(&self.dirac, v)
            - sparse::dot(&self.pressure, w)
    }

    /// Coupling part of `I_η`, evaluated for every variant:
    /// `½ Σ_T ∫ cof(∇²v):(∇w⊗∇w) − ½ Σ_{e interior} ∫ (∂_t w)² [[∂_n v]]`.
    fn var_coupling_energy(&self, v: &[f64], w: &[f64]) -> f64 {
        let mut energy = 0.0;
        for t in 0..self.space.mesh().n_triangles() {
            let dofs = self.space.dofmap().cell_free(t);
            let (cv, cw) = (self.local(v, dofs), self.local(w, dofs));
            for cp in self.quad.cell_points(self.space, t) {
                let (gw, hv, _) = state_at(&cp, &cv, &cw);
                energy += cp.weight * 0.5 * hv.cof().form(gw, gw);
            }
        }
        for info in self.coupling_edges() {
            let (cv, cw) = (self.local(v, &info.dofs), self.local(w, &info.dofs));
            for p in edge_points(self.space, &self.quad, info) {
                let tw = dotn(&p.tg, &cw);
                energy -= p.weight * 0.5 * tw * tw * dotn(&p.jn, &cv);
            }
        }
        energy
    }

    pub fn jacobian_matrix(&self, x: &[f64]) -> CsrMatrix {
        let (v, w) = self.split(x);
        let nnz = self.pattern.nnz();
        let mut vw = self.pattern.clone();
        let mut wv = self.pattern.clone();
        let mut ww = self.pattern.clone();
        let dm = self.space.dofmap();
        par_ordered(
            self.space.mesh().n_triangles(),
            |t| self.cell_coupling_jacobian(v, w, t),
            |t, [a, b, c]| {
                let dofs = dm.cell_free(t);
                scatter(&mut vw, dofs, &a);
                scatter(&mut wv, dofs, &b);
                scatter(&mut ww, dofs, &c);
            },
        );
        if self.problem.variant != Variant::Cmn18 {
            let edges: Vec<&EdgeInfo> = self.coupling_edges().collect();
            par_ordered(
                edges.len(),
                |e| self.edge_coupling_jacobian(v, w, edges[e]),
                |e, [a, b, c]| {
                    let dofs = &edges[e].dofs;
                    scatter(&mut vw, dofs, &a);
                    scatter(&mut wv, dofs, &b);
                    scatter(&mut ww, dofs, &c);
                },
            );
        }
        let c = self.problem.c_nu();
        let (k, p) = (self.k_mat.values(), self.p_mat.values());
        let vv: Vec<f64> = (0..nnz).map(|s| -k[s] - p[s]).collect();
        let ww: Vec<f64> = (0..nnz).map(|s| c * k[s] + p[s] + ww.values()[s]).collect();
        let mut out = self.full_pattern.clone();
        fill_stacked(&self.pattern, &mut out, [&vv, vw.values(), wv.values(), &ww]);
        out
    }

    pub fn assemble(&self, x: &[f64]) -> AssembledSystem {
        AssembledSystem {
            residual: self.residual_vec(x),
            jacobian: self.jacobian_matrix(x),
        }
    }
}

fn state_at(cp: &CellPoint, cv: &[f64], cw: &[f64]) -> (Vec2, Sym2, Sym2) {
    let mut gw = [0.0; 2];
    let mut hv = Sym2::default();
    let mut hw = Sym2::default();
    for i in 0..N_NODES {
        gw[0] += cw[i] * cp.grads[i][0];
        gw[1] += cw[i] * cp.grads[i][1];
        hv = hv.add(cp.hessians[i].scale(cv[i]));
        hw = hw.add(cp.hessians[i].scale(cw[i]));
    }
    (gw, hv, hw)
}

/// Pattern of `[[S, S], [S, S]]` for a block pattern `S`.
fn stacked_pattern(s: &CsrMatrix) -> CsrMatrix {
    let n = s.nrows();
    let rows = (0..2 * n)
        .map(|r| {
            let (cols, _) = s.row(r % n);
            cols.iter().copied().chain(cols.iter().map(|c| c + n)).collect()
        })
        .collect();
    CsrMatrix::from_pattern(2 * n, 2 * n, rows)
}

/// Writes the four block value arrays (on pattern `s`) into `out`, whose
/// pattern is `stacked_pattern(s)`.
fn fill_stacked(s: &CsrMatrix, out: &mut CsrMatrix, blocks: [&[f64]; 4]) {
    let n = s.nrows();
    let nnz = s.nnz();
    let rp = s.row_ptr().to_vec();
    let vals = out.values_mut();
    for r in 0..n {
        let (a, b) = (rp[r], rp[r + 1]);
        let len = b - a;
        let top = 2 * a;
        let bottom = 2 * nnz + 2 * a;
        vals[top..top + len].copy_from_slice(&blocks[0][a..b]);
        vals[top + len..top + 2 * len].copy_from_slice(&blocks[1][a..b]);
        vals[bottom..bottom + len].copy_from_slice(&blocks[2][a..b]);
        vals[bottom + len..bottom + 2 * len].copy_from_slice(&blocks[3][a..b]);
    }
}

impl NonlinearSystem for PlateSystem<'_> {
    fn size(&self) -> usize {
        2 * self.n_free()
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.residual_vec(x))
    }

    fn jacobian(&self, x: &[f64]) -> Result<CsrMatrix> {
        Ok(self.jacobian_matrix(x))
    }
}

/// Residual at `state`, stacked as `[R_v; R_w]`.
pub fn assemble_residual(space: &Space, problem: &PlateProblem, state: &State) -> Result<Vec<f64>> {
    Ok(PlateSystem::new(space, problem)?.residual_vec(&state.to_vec()))
}

/// Jacobian of [`assemble_residual`] at `state`.
pub fn assemble_jacobian(space: &Space, problem: &PlateProblem, state: &State) -> Result<CsrMatrix> {
    Ok(PlateSystem::new(space, problem)?.jacobian_matrix(&state.to_vec()))
}

pub fn evaluate_functional(space: &Space, problem: &PlateProblem, state: &State) -> Result<f64> {
    Ok(PlateSystem::new(space, problem)?.functional(&state.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_disc_mesh, Mesh};

    fn disc(h: f64) -> Space {
        Space::new(generate_disc_mesh(h).unwrap()).unwrap()
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    fn random_vec(n: usize, scale: f64, seed: &mut u64) -> Vec<f64> {
        (0..n).map(|_| scale * lcg(seed)).collect()
    }

    fn problem(variant: Variant) -> PlateProblem {
        PlateProblem::new(3.0, 0.02)
            .with_variant(variant)
            .with_load(Load::Uniform(-1.0))
            .with_disclinations(DisclinationSet::new(vec![Disclination::new([0.1, 0.05], -1.0)]).unwrap())
    }

    #[test]
    fn variant_parsing() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("foo".parse::<Variant>().is_err());
    }

    #[test]
    fn problem_validation() {
        assert!(PlateProblem::new(0.0, 1.0).validate().is_err());
        assert!(PlateProblem::new(1.0, 1.0).with_nu(0.5).validate().is_err());
        assert!(PlateProblem::new(1.0, 1.0).with_alpha(-1.0).validate().is_err());
        assert!(DisclinationSet::new(vec![Disclination::new([1.0, 0.0], 1.0)]).is_err());
        assert!(DisclinationSet::new(vec![Disclination::new([0.0, 0.0], 0.0)]).is_err());
        let p = PlateProblem::new(1.0, 1.0);
        assert!((p.c_nu() - 1.0 / (12.0 * (1.0 - 0.15 * 0.15))).abs() < 1e-14);
    }

    #[test]
    fn biharmonic_matrix_is_symmetric_positive_definite() {
        let space = disc(0.3);
        let a = assemble_biharmonic_dg(&space, 300.0).unwrap();
        assert!(a.asymmetry() <= 1e-10 * a.max_abs());
        let dense = nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a.get(i, j));
        assert!(dense.cholesky().is_some());
    }

    #[test]
    fn dirac_load_locality() {
        let space = disc(0.3);
        assert!(assemble_dirac_load(&space, &DisclinationSet::empty(), 10.0)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
        let c = space.mesh().centroid(7);
        let set = DisclinationSet::new(vec![Disclination::new(c, 1.0)]).unwrap();
        let f = assemble_dirac_load(&space, &set, 2.0).unwrap();
        assert!(f.iter().filter(|&&x| x != 0.0).count() <= 10);
        // nodal partition of unity: weights of all ten local functions sum to β² s
        let outside = [[2.0, 0.0]];
        let bad = DisclinationSet(vec![Disclination::new(outside[0], 1.0)]);
        assert!(assemble_dirac_load(&space, &bad, 1.0).is_err());
    }

    #[test]
    fn dipole_load_is_antisymmetric_under_point_reflection() {
        let space = disc(0.2);
        let set = DisclinationSet::new(vec![
            Disclination::new([0.23, 0.11], 1.0),
            Disclination::new([-0.23, -0.11], -1.0),
        ])
        .unwrap();
        let f = assemble_dirac_load(&space, &set, 5.0).unwrap();
        let dm = space.dofmap();
        let coords: Vec<Vec2> = (0..dm.n_free()).map(|i| dm.coord(dm.free_to_global(i))).collect();
        for (i, x) in coords.iter().enumerate() {
            let j = coords
                .iter()
                .position(|y| geom::dist(*y, [-x[0], -x[1]]) < 1e-12)
                .unwrap();
            assert!((f[i] + f[j]).abs() < 1e-12, "{} vs {}", f[i], f[j]);
        }
    }

    #[test]
    fn pressure_load_integrates_the_area() {
        let space = disc(0.2);
        let f = assemble_pressure_load(&space, &Load::Uniform(1.0), 0.1, 2.5);
        // free functions alone do not sum to one; add the constrained ones
        let quad = Quadrature::new();
        let mut total = f.iter().sum::<f64>();
        for t in 0..space.mesh().n_triangles() {
            let dofs = space.dofmap().cell_free(t);
            for cp in quad.cell_points(&space, t) {
                for i in 0..N_NODES {
                    if dofs[i] == CONSTRAINED {
                        total += 2.5 * cp.weight * cp.values[i];
                    }
                }
            }
        }
        assert!((total - 2.5 * space.mesh().area()).abs() < 1e-12);
        let neg = assemble_pressure_load(&space, &Load::Uniform(-1.0), 0.1, 2.5);
        assert!(f.iter().zip(&neg).all(|(a, b)| a == &-b));
        assert!(assemble_pressure_load(&space, &Load::Zero, 0.1, 2.5).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zero_state_without_data_has_zero_residual() {
        let space = disc(0.4);
        let sys = PlateSystem::new(&space, &PlateProblem::new(2.0, 1.0)).unwrap();
        let x = vec![0.0; sys.size()];
        assert!(sys.residual_vec(&x).iter().all(|&r| r == 0.0));
        assert_eq!(sys.functional(&x), 0.0);
    }

    #[test]
    fn linear_terms_only_at_zero_state() {
        let space = disc(0.4);
        let p = PlateProblem::new(1.0, 1.0).with_load(Load::Uniform(-1.0));
        let sys = PlateSystem::new(&space, &p).unwrap();
        let (rv, rw) = sys.residual_split(&vec![0.0; sys.size()]);
        assert!(rv.iter().all(|&r| r == 0.0));
        let f = assemble_pressure_load(&space, &Load::Uniform(-1.0), p.c_nu(), 1.0);
        for (a, b) in rw.iter().zip(&f) {
            assert!((a + b).abs() < 1e-15);
        }
    }

    #[test]
    fn vw_block_vanishes_at_flat_state() {
        let space = disc(0.4);
        let mut seed = 3;
        for variant in Variant::ALL {
            let sys = PlateSystem::new(&space, &problem(variant)).unwrap();
            let n = sys.n_free();
            let mut x = random_vec(2 * n, 1.0, &mut seed);
            x[n..].iter_mut().for_each(|w| *w = 0.0);
            let j = sys.jacobian_matrix(&x);
            assert_eq!(j.block(0..n, n..2 * n).max_abs(), 0.0, "{variant}");
        }
    }

    #[test]
    fn variants_agree_on_flat_states() {
        let space = disc(0.4);
        let mut seed = 5;
        let n = space.n_free();
        let mut x = random_vec(2 * n, 1.0, &mut seed);
        x[n..].iter_mut().for_each(|w| *w = 0.0);
        let r: Vec<Vec<f64>> = Variant::ALL
            .iter()
            .map(|&v| PlateSystem::new(&space, &problem(v)).unwrap().residual_split(&x).0)
            .collect();
        assert_eq!(r[0], r[1]);
        assert_eq!(r[0], r[2]);
    }

    #[test]
    fn pure_bending_functional() {
        let space = disc(0.3);
        let p = PlateProblem::new(1.0, 0.0);
        let sys = PlateSystem::new(&space, &p).unwrap();
        let w = space.interpolate(|x| (1.0 - geom::dot(x, x)).powi(2) * (1.0 + x[0]));
        let mut x = vec![0.0; space.n_free()];
        x.extend_from_slice(w.coeffs());
        let a = sys.biharmonic();
        let k_w = sparse::dot(w.coeffs(), &sys.k_mat.matvec(w.coeffs()));
        let p_w = sparse::dot(w.coeffs(), &sys.p_mat.matvec(w.coeffs()));
        let expected = 0.5 * p.c_nu() * k_w + 0.5 * p_w;
        let i = sys.functional(&x);
        assert!(i > 0.0);
        assert!((i - expected).abs() < 1e-12 * expected);
        assert!(sparse::dot(w.coeffs(), &a.matvec(w.coeffs())) > 0.0);
    }

    #[test]
    fn membrane_functional_is_quadratic() {
        let space = disc(0.4);
        let sys = PlateSystem::new(&space, &PlateProblem::new(1.0, 0.0)).unwrap();
        let mut seed = 11;
        let n = space.n_free();
        let mut x = random_vec(n, 1.0, &mut seed);
        x.extend(vec![0.0; n]);
        let i1 = sys.functional(&x);
        let x3: Vec<f64> = x.iter().map(|a| 3.0 * a).collect();
        assert!((sys.functional(&x3) - 9.0 * i1).abs() < 1e-10 * i1.abs());
    }

    #[test]
    fn labelling_invariance() {
        let mesh = generate_disc_mesh(0.35).unwrap();
        let swapped: Mesh = mesh.with_swapped_edge_labels();
        let (s1, s2) = (Space::new(mesh).unwrap(), Space::new(swapped).unwrap());
        let mut seed = 17;
        let x = random_vec(2 * s1.n_free(), 0.5, &mut seed);
        for variant in Variant::ALL {
            let r1 = PlateSystem::new(&s1, &problem(variant)).unwrap().residual_vec(&x);
            let r2 = PlateSystem::new(&s2, &problem(variant)).unwrap().residual_vec(&x);
            let scale = sparse::max_abs(&r1);
            for (a, b) in r1.iter().zip(&r2) {
                assert!((a - b).abs() <= 1e-12 * scale.max(1.0), "{variant}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn residual_is_the_gradient_of_the_functional() {
        let space = disc(0.45);
        let sys = PlateSystem::new(&space, &problem(Variant::Var)).unwrap();
        let n = sys.size();
        let mut seed = 23;
        for _ in 0..4 {
            let x = random_vec(n, 0.5, &mut seed);
            let d = random_vec(n, 1.0, &mut seed);
            let r = sys.residual_vec(&x);
            let eps = 1e-6;
            let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + eps * b).collect();
            let xm: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - eps * b).collect();
            let fd = (sys.functional(&xp) - sys.functional(&xm)) / (2.0 * eps);
            let rd = sparse::dot(&r, &d);
            assert!((fd - rd).abs() <= 1e-6 * (1.0 + rd.abs()), "{fd} vs {rd}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let space = disc(0.45);
        let mut seed = 29;
        for variant in Variant::ALL {
            let sys = PlateSystem::new(&space, &problem(variant)).unwrap();
            let n = sys.size();
            let x = random_vec(n, 0.5, &mut seed);
            let d = random_vec(n, 1.0, &mut seed);
            let eps = 1e-6;
            let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + eps * b).collect();
            let xm: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - eps * b).collect();
            let (rp, rm) = (sys.residual_vec(&xp), sys.residual_vec(&xm));
            let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
            let jd = sys.jacobian_matrix(&x).matvec(&d);
            let err: Vec<f64> = fd.iter().zip(&jd).map(|(a, b)| a - b).collect();
            assert!(
                sparse::norm2(&err) <= 1e-5 * sparse::norm2(&jd),
                "{variant}: {} vs {}",
                sparse::norm2(&err),
                sparse::norm2(&jd)
            );
        }
    }

    #[test]
    fn var_jacobian_is_symmetric() {
        let space = disc(0.45);
        let sys = PlateSystem::new(&space, &problem(Variant::Var)).unwrap();
        let mut seed = 31;
        let x = random_vec(sys.size(), 0.5, &mut seed);
        let j = sys.jacobian_matrix(&x);
        assert!(j.asymmetry() <= 1e-9 * j.max_abs());
        let b = PlateSystem::new(&space, &problem(Variant::Bnrs17)).unwrap().jacobian_matrix(&x);
        assert!(b.asymmetry() > 1e-6 * b.max_abs());
    }
}
