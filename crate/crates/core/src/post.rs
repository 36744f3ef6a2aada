//! Energies, error metrics, derived fields and data exports.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::analytic::{ExactEnergies, RadialPoly};
use crate::element::{eval_basis, physical_derivatives, QuadratureRule, N_NODES, NODES};
use crate::error::{FvkError, Result};
use crate::forms::{PlateProblem, Quadrature, State};
use crate::geom::{self, Sym2, Vec2};
use crate::space::{Field, Space};

/// Energy terms of a state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    /// `½ Σ_T ∫ |∇²v|²`
    pub membrane: f64,
    /// `c_ν/2 Σ_T ∫ |∇²w|²`
    pub bending: f64,
    /// `½ Σ_T ∫ cof(∇²v) : (∇w ⊗ ∇w)`
    pub coupling: f64,
    /// `β² Σ_i s_i v(y_i)`
    pub dirac_work: f64,
    /// `γβ⁴ ∫ p w`
    pub pressure_work: f64,
}

impl From<ExactEnergies> for EnergyBreakdown {
    fn from(e: ExactEnergies) -> Self {
        EnergyBreakdown {
            membrane: e.membrane,
            bending: e.bending,
            coupling: e.coupling,
            ..Default::default()
        }
    }
}

pub fn compute_energies(space: &Space, problem: &PlateProblem, state: &State) -> Result<EnergyBreakdown> {
    let quad = Quadrature::new();
    let c = problem.c_nu();
    let factor = problem.load_factor();
    let mut out = EnergyBreakdown::default();
    for t in 0..space.mesh().n_triangles() {
        let cv = space.local_coeffs(&state.v, t);
        let cw = space.local_coeffs(&state.w, t);
        for cp in quad.cell_points(space, t) {
            let mut w = 0.0;
            let mut gw = [0.0; 2];
            let mut hv = Sym2::default();
            let mut hw = Sym2::default();
            for i in 0..N_NODES {
                w += cw[i] * cp.values[i];
                gw[0] += cw[i] * cp.grads[i][0];
                gw[1] += cw[i] * cp.grads[i][1];
                hv = hv.add(cp.hessians[i].scale(cv[i]));
                hw = hw.add(cp.hessians[i].scale(cw[i]));
            }
            out.membrane += cp.weight * 0.5 * hv.norm_sq();
            out.bending += cp.weight * 0.5 * c * hw.norm_sq();
            out.coupling += cp.weight * 0.5 * hv.cof().form(gw, gw);
            if factor != 0.0 {
                out.pressure_work += cp.weight * factor * problem.load.eval(c, cp.x) * w;
            }
        }
    }
    for d in problem.disclinations.iter() {
        out.dirac_work += problem.beta.powi(2) * d.angle * space.evaluate(&state.v, d.position)?;
    }
    Ok(out)
}

/// `100 (computed − exact) / exact`, or `None` for a zero reference.
pub fn percent_error(computed: f64, exact: f64) -> Option<f64> {
    (exact != 0.0 && exact.is_finite()).then(|| 100.0 * (computed - exact) / exact)
}

/// Percentage errors `e_b`, `e_m`, `e_c`; `None` where the reference
/// vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyErrors {
    pub bending: Option<f64>,
    pub membrane: Option<f64>,
    pub coupling: Option<f64>,
}

pub fn energy_errors(computed: &EnergyBreakdown, exact: &EnergyBreakdown) -> EnergyErrors {
    EnergyErrors {
        bending: percent_error(computed.bending, exact.bending),
        membrane: percent_error(computed.membrane, exact.membrane),
        coupling: percent_error(computed.coupling, exact.coupling),
    }
}

/// Cellwise quadratic field `[w,w] = 2 det ∇²w` (twice the Gaussian
/// curvature).
#[derive(Debug, Clone)]
pub struct CurvatureField {
    /// Hessian of `w` at the three vertices of each cell; it is affine.
    vertex_hessians: Vec<[Sym2; 3]>,
    /// `∫ [w,w]`
    pub integral: f64,
    /// `∫ |[w,w]|`
    pub abs_integral: f64,
}

impl CurvatureField {
    /// `[w,w]` in cell `t` at barycentric coordinates `bary`.
    pub fn eval(&self, t: usize, bary: [f64; 3]) -> f64 {
        let h = &self.vertex_hessians[t];
        let m = h[0].scale(bary[0]).add(h[1].scale(bary[1])).add(h[2].scale(bary[2]));
        2.0 * m.det()
    }

    pub fn n_cells(&self) -> usize {
        self.vertex_hessians.len()
    }

    /// `|∫[w,w]| / ∫|[w,w]|`, zero for a flat field.
    pub fn relative_mean(&self) -> f64 {
        if self.abs_integral == 0.0 {
            0.0
        } else {
            self.integral.abs() / self.abs_integral
        }
    }

    /// Whether both strictly positive and strictly negative values occur
    /// (above `tol · max|[w,w]|`) at the cell quadrature points.
    pub fn sign_summary(&self, tol: f64) -> (bool, bool) {
        let rule = crate::element::cell_quadrature();
        let samples: Vec<f64> = (0..self.n_cells())
            .flat_map(|t| {
                rule.points
                    .iter()
                    .map(move |p| self.eval(t, [1.0 - p[0] - p[1], p[0], p[1]]))
                    .collect::<Vec<_>>()
            })
            .collect();
        let max = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let pos = samples.iter().any(|&v| v > tol * max);
        let neg = samples.iter().any(|&v| v < -tol * max);
        (pos, neg)
    }
}

pub fn gaussian_curvature_field(space: &Space, w: &Field) -> CurvatureField {
    let rule = crate::element::triangle_rule(4);
    let mut vertex_hessians = Vec::with_capacity(space.mesh().n_triangles());
    let (mut integral, mut abs_integral) = (0.0, 0.0);
    for t in 0..space.mesh().n_triangles() {
        let hs: [Sym2; 3] = std::array::from_fn(|k| space.eval_in_cell(w, t, NODES[k]).hessian);
        let det = space.map(t).det;
        for (p, wt) in rule.points.iter().zip(&rule.weights) {
            let bary = [1.0 - p[0] - p[1], p[0], p[1]];
            let m = hs[0].scale(bary[0]).add(hs[1].scale(bary[1])).add(hs[2].scale(bary[2]));
            let k = 2.0 * m.det();
            integral += wt * det * k;
            abs_integral += wt * det * k.abs();
        }
        vertex_hessians.push(hs);
    }
    CurvatureField {
        vertex_hessians,
        integral,
        abs_integral,
    }
}

/// Radial stress `σ_rr = e_r · cof(∇²v) e_r`; at the origin `e_r = e₁`.
pub fn radial_stress_at(space: &Space, v: &Field, p: Vec2) -> Result<f64> {
    let h = space.evaluate_full(v, p)?.hessian;
    Ok(radial_stress_from_hessian(h, p))
}

fn radial_stress_from_hessian(h: Sym2, p: Vec2) -> f64 {
    let r = geom::norm(p);
    let e = if r == 0.0 { [1.0, 0.0] } else { [p[0] / r, p[1] / r] };
    h.cof().form(e, e)
}

pub fn radial_stress_field(space: &Space, v: &Field, points: &[Vec2]) -> Result<Vec<f64>> {
    points.iter().map(|&p| radial_stress_at(space, v, p)).collect()
}

/// `σ_rr` at the quadrature points of every cell, a dense sample set for
/// sign checks.
pub fn radial_stress_samples(space: &Space, v: &Field) -> Vec<f64> {
    let rule = crate::element::cell_quadrature();
    let mut out = Vec::new();
    for t in 0..space.mesh().n_triangles() {
        for p in &rule.points {
            let pv = space.eval_in_cell(v, t, *p);
            out.push(radial_stress_from_hessian(pv.hessian, space.map(t).to_physical(*p)));
        }
    }
    out
}

/// Extremes of a sample set: `(min, max, max |x|)`.
pub fn extremes(samples: &[f64]) -> (f64, f64, f64) {
    samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0f64), |(lo, hi, a), &x| {
        (lo.min(x), hi.max(x), a.max(x.abs()))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    /// `ξ₂ = 0`, abscissa `ξ₁`.
    X,
    /// `ξ₁ = 0`, abscissa `ξ₂`.
    Y,
}

/// Samples of a field along a diameter of the disc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    /// The value the samples were divided by, if normalised.
    pub normalization: Option<f64>,
}

pub const DEFAULT_PROFILE_SAMPLES: usize = 401;

/// Uniform samples on `[−1, 1]` along `axis`. With `normalize`, values are
/// divided by their largest magnitude; an all-zero profile is left as is
/// and reported with `normalization = None`.
pub fn extract_profile(
    space: &Space,
    field: &Field,
    axis: Axis,
    n_samples: usize,
    normalize: bool,
) -> Result<Profile> {
    if n_samples < 2 {
        return Err(FvkError::Parameter("a profile needs at least 2 samples".into()));
    }
    let abscissae: Vec<f64> = (0..n_samples)
        .map(|i| -1.0 + 2.0 * i as f64 / (n_samples - 1) as f64)
        .collect();
    let mut values = abscissae
        .iter()
        .map(|&s| {
            let p = match axis {
                Axis::X => [s, 0.0],
                Axis::Y => [0.0, s],
            };
            match space.evaluate(field, p) {
                // clamped fields vanish outside the inscribed polygon
                Err(FvkError::Location { .. }) if geom::norm(p) > 1.0 - space.mesh().max_diameter().powi(2) => Ok(0.0),
                r => r,
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut normalization = None;
    if normalize {
        let m = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m > 0.0 {
            values.iter_mut().for_each(|v| *v /= m);
            normalization = Some(m);
        }
    }
    Ok(Profile {
        abscissae,
        values,
        normalization,
    })
}

/// `‖u_h − u‖_{L²}` by cell quadrature.
pub fn l2_error(space: &Space, field: &Field, exact: impl Fn(Vec2) -> f64) -> f64 {
    let quad = Quadrature::new();
    let mut sum = 0.0;
    for t in 0..space.mesh().n_triangles() {
        let c = space.local_coeffs(field, t);
        for cp in quad.cell_points(space, t) {
            let u: f64 = (0..N_NODES).map(|i| c[i] * cp.values[i]).sum();
            sum += cp.weight * (u - exact(cp.x)).powi(2);
        }
    }
    sum.sqrt()
}

/// A smooth function given with its derivatives.
pub trait Smooth {
    fn value(&self, x: Vec2) -> f64;
    fn grad(&self, x: Vec2) -> Vec2;
    fn hessian(&self, x: Vec2) -> Sym2;
}

/// A radial function `f(|ξ|²)` given by a polynomial in `s = |ξ|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFn(pub RadialPoly);

impl Smooth for RadialFn {
    fn value(&self, x: Vec2) -> f64 {
        self.0.eval(geom::dot(x, x))
    }
    fn grad(&self, x: Vec2) -> Vec2 {
        self.0.grad(x)
    }
    fn hessian(&self, x: Vec2) -> Sym2 {
        // ∇²f = 2 f_s I + 4 f_ss ξ⊗ξ
        let s = geom::dot(x, x);
        let fs = self.0.ds().eval(s);
        let fss = self.0.ds().ds().eval(s);
        Sym2::IDENTITY.scale(2.0 * fs).add(Sym2::outer(x).scale(4.0 * fss))
    }
}

/// The quadratic form `½ ξ·Aξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFn(pub Sym2);

impl Smooth for QuadraticFn {
    fn value(&self, x: Vec2) -> f64 {
        0.5 * self.0.form(x, x)
    }
    fn grad(&self, x: Vec2) -> Vec2 {
        self.0.apply(x)
    }
    fn hessian(&self, _: Vec2) -> Sym2 {
        self.0
    }
}

/// Weighted points `(ξ, ω)` covering the mesh polygon with `rule` on every
/// cell.
pub fn mesh_quadrature(space: &Space, rule: &QuadratureRule) -> Vec<(Vec2, f64)> {
    let mut out = Vec::with_capacity(rule.points.len() * space.mesh().n_triangles());
    for t in 0..space.mesh().n_triangles() {
        let map = space.map(t);
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            out.push((map.to_physical(*p), w * map.det));
        }
    }
    out
}

/// Weighted points covering the exact disc bounded by the circle through
/// the boundary vertices. Cells with one boundary edge are mapped onto
/// their curved counterpart by `ξ = q c + (1 − q) γ(s)`, with `c` the
/// interior vertex and `γ` the arc; other cells use the affine map. Each
/// coordinate uses an `n`-point Gauss rule.
pub fn disc_quadrature(space: &Space, n: usize) -> Vec<(Vec2, f64)> {
    let mesh = space.mesh();
    let (x, w) = crate::element::gauss_legendre(n);
    let affine = crate::element::triangle_rule(n);
    let mut out = Vec::new();
    for t in 0..mesh.n_triangles() {
        let bnd: Vec<usize> = mesh
            .triangle_edges(t)
            .into_iter()
            .filter(|&e| mesh.is_boundary_edge(e))
            .collect();
        if bnd.len() != 1 {
            let map = space.map(t);
            for (p, wt) in affine.points.iter().zip(&affine.weights) {
                out.push((map.to_physical(*p), wt * map.det));
            }
            continue;
        }
        let [ia, ib] = mesh.edges()[bnd[0]];
        let tri = mesh.triangles()[t];
        let ic = tri.into_iter().find(|&i| i != ia && i != ib).unwrap_or(ia);
        let (a, b, c) = (mesh.vertices()[ia], mesh.vertices()[ib], mesh.vertices()[ic]);
        let radius = 0.5 * (geom::norm(a) + geom::norm(b));
        let ta = a[1].atan2(a[0]);
        let mut dt = b[1].atan2(b[0]) - ta;
        if dt > std::f64::consts::PI {
            dt -= 2.0 * std::f64::consts::PI;
        } else if dt < -std::f64::consts::PI {
            dt += 2.0 * std::f64::consts::PI;
        }
        for (q, wq) in x.iter().zip(&w) {
            for (s, ws) in x.iter().zip(&w) {
                let th = ta + s * dt;
                let g = [radius * th.cos(), radius * th.sin()];
                let dg = [-radius * dt * th.sin(), radius * dt * th.cos()];
                let fq = geom::sub(c, g);
                let fs = [(1.0 - q) * dg[0], (1.0 - q) * dg[1]];
                let jac = (fq[0] * fs[1] - fq[1] * fs[0]).abs();
                out.push(([q * c[0] + (1.0 - q) * g[0], q * c[1] + (1.0 - q) * g[1]], wq * ws * jac));
            }
        }
    }
    out
}

/// The three integrals of the Monge–Ampère symmetry identity,
/// `∫ cof(∇²φ):(∇χ⊗∇η)`, `−∫ [χ,η] φ` and `−∫ [φ,η] χ`, over weighted
/// points.
pub fn monge_ampere_integrals(
    points: &[(Vec2, f64)],
    phi: &dyn Smooth,
    chi: &dyn Smooth,
    eta: &dyn Smooth,
) -> [f64; 3] {
    let mut out = [0.0; 3];
    for &(x, wt) in points {
        let hphi = phi.hessian(x);
        out[0] += wt * hphi.cof().form(chi.grad(x), eta.grad(x));
        out[1] -= wt * chi.hessian(x).cof().ddot(eta.hessian(x)) * phi.value(x);
        out[2] -= wt * hphi.cof().ddot(eta.hessian(x)) * chi.value(x);
    }
    out
}

/// Coupling energy in its two equivalent forms for smooth functions:
/// `½ ∫ cof(∇²v):(∇w⊗∇w)` and `−½ ∫ [w,w] v`.
pub fn coupling_energy_forms(space: &Space, rule: &QuadratureRule, v: &dyn Smooth, w: &dyn Smooth) -> (f64, f64) {
    let (mut a, mut b) = (0.0, 0.0);
    for t in 0..space.mesh().n_triangles() {
        let map = space.map(t);
        for (p, wq) in rule.points.iter().zip(&rule.weights) {
            let x = map.to_physical(*p);
            let wt = wq * map.det;
            let gw = w.grad(x);
            let hw = w.hessian(x);
            a += wt * 0.5 * v.hessian(x).cof().form(gw, gw);
            b -= wt * hw.det() * v.value(x);
        }
    }
    (a, b)
}

// ---------------------------------------------------------------------------
// exports

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a CSV table with one header row; numbers keep full precision.
pub fn write_csv(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let text: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|&x| fmt_f64(x)).collect()).collect();
    write_csv_text(path, header, &text)
}

/// As [`write_csv`] for pre-formatted cells (mixed text and numbers).
pub fn write_csv_text(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => FvkError::io(path, io),
        other => FvkError::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(FvkError::Parameter(format!(
                "csv row has {} cells, header has {}",
                r.len(),
                header.len()
            )));
        }
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| FvkError::io(path, e))
}

pub fn write_profiles_csv(path: impl AsRef<Path>, names: &[&str], profiles: &[&Profile]) -> Result<()> {
    let mut header = vec!["xi"];
    header.extend_from_slice(names);
    let n = profiles.first().map_or(0, |p| p.abscissae.len());
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = vec![profiles[0].abscissae[i]];
            r.extend(profiles.iter().map(|p| p.values[i]));
            r
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Lattice of the nine sub-triangles of a cubic cell in local node numbers.
const SUB_TRIANGLES: [[usize; 3]; 9] = [
    [0, 3, 8],
    [3, 4, 9],
    [4, 1, 5],
    [8, 9, 7],
    [9, 5, 6],
    [7, 6, 2],
    [3, 9, 8],
    [4, 5, 9],
    [9, 6, 7],
];

/// Nodal values of `w`, `v`, `[w,w]` and `σ_rr` on the P1 refinement of
/// the mesh (every cubic cell split into nine triangles).
pub struct NodalFields {
    pub points: Vec<Vec2>,
    pub triangles: Vec<[usize; 3]>,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub curvature: Vec<f64>,
    pub sigma_rr: Vec<f64>,
}

pub fn nodal_fields(space: &Space, state: &State) -> NodalFields {
    let dm = space.dofmap();
    let n = dm.n_total();
    let points: Vec<Vec2> = (0..n).map(|g| dm.coord(g)).collect();
    let nodal = |f: &Field| -> Vec<f64> {
        (0..n).map(|g| dm.free_index(g).map_or(0.0, |i| f.coeffs()[i])).collect()
    };
    let mut curvature = vec![0.0; n];
    let mut sigma_rr = vec![0.0; n];
    let mut count = vec![0usize; n];
    let mut triangles = Vec::with_capacity(9 * space.mesh().n_triangles());
    for t in 0..space.mesh().n_triangles() {
        let dofs = dm.cell_dofs(t);
        let cv = space.local_coeffs(&state.v, t);
        let cw = space.local_coeffs(&state.w, t);
        for (k, node) in NODES.iter().enumerate() {
            let e = eval_basis(*node);
            let (_, h) = physical_derivatives(&e, space.map(t));
            let mut hv = Sym2::default();
            let mut hw = Sym2::default();
            for i in 0..N_NODES {
                hv = hv.add(h[i].scale(cv[i]));
                hw = hw.add(h[i].scale(cw[i]));
            }
            let g = dofs[k];
            curvature[g] += 2.0 * hw.det();
            sigma_rr[g] += radial_stress_from_hessian(hv, points[g]);
            count[g] += 1;
        }
        triangles.extend(SUB_TRIANGLES.iter().map(|s| s.map(|l| dofs[l])));
    }
    for g in 0..n {
        curvature[g] /= count[g].max(1) as f64;
        sigma_rr[g] /= count[g].max(1) as f64;
    }
    NodalFields {
        points,
        triangles,
        w: nodal(&state.w),
        v: nodal(&state.v),
        curvature,
        sigma_rr,
    }
}

/// Legacy ASCII VTK unstructured grid with `w`, `v`, `[w,w]` (averaged over
/// incident cells) and `σ_rr` as point data.
pub fn vtk_string(space: &Space, state: &State) -> String {
    let f = nodal_fields(space, state);
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nplate fields\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", f.points.len());
    for p in &f.points {
        let _ = writeln!(s, "{} {} 0", fmt_f64(p[0]), fmt_f64(p[1]));
    }
    let _ = writeln!(s, "CELLS {} {}", f.triangles.len(), 4 * f.triangles.len());
    for t in &f.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", f.triangles.len());
    for _ in &f.triangles {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}", f.points.len());
    for (name, data) in [
        ("w", &f.w),
        ("v", &f.v),
        ("gauss_bracket", &f.curvature),
        ("sigma_rr", &f.sigma_rr),
    ] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for x in data.iter() {
            let _ = writeln!(s, "{}", fmt_f64(*x));
        }
    }
    s
}

pub fn write_vtk(path: impl AsRef<Path>, space: &Space, state: &State) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, vtk_string(space, state)).map_err(|e| FvkError::io(path, e))
}

/// `σ_rr` on a uniform `n × n` grid over `[−1, 1]²`; points outside the
/// mesh are skipped. Rows are `(ξ₁, ξ₂, σ_rr)`.
pub fn stress_grid(space: &Space, v: &Field, n: usize) -> Vec<Vec<f64>> {
    let mut rows = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let p = [
                -1.0 + 2.0 * i as f64 / (n - 1) as f64,
                -1.0 + 2.0 * j as f64 / (n - 1) as f64,
            ];
            if let Ok(s) = radial_stress_at(space, v, p) {
                rows.push(vec![p[0], p[1], s]);
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{self, RadialPoly};
    use crate::element::triangle_rule;
    use crate::forms::{Load, PlateProblem};
    use crate::mesh::{generate_disc_mesh, Mesh};
    use crate::space::CONSTRAINED;

    fn disc(h: f64) -> Space {
        Space::new(generate_disc_mesh(h).unwrap()).unwrap()
    }

    /// Structured triangulation of `[−1, 1]²`.
    fn square(n: usize) -> Space {
        let mut v = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                v.push([-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..n {
                t.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                t.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Space::new(Mesh::new(v, t).unwrap()).unwrap()
    }

    /// `a (1 − x²)² (1 − y²)² (1 + b x)` on the square.
    struct Bubble(f64, f64);
    impl Smooth for Bubble {
        fn value(&self, p: Vec2) -> f64 {
            let (x, y) = (p[0], p[1]);
            self.0 * (1.0 - x * x).powi(2) * (1.0 - y * y).powi(2) * (1.0 + self.1 * x)
        }
        fn grad(&self, p: Vec2) -> Vec2 {
            let h = 1e-4;
            let d = |e: Vec2| (self.value([p[0] + h * e[0], p[1] + h * e[1]]) - self.value([p[0] - h * e[0], p[1] - h * e[1]])) / (2.0 * h);
            [d([1.0, 0.0]), d([0.0, 1.0])]
        }
        fn hessian(&self, p: Vec2) -> Sym2 {
            let (x, y) = (p[0], p[1]);
            let a = self.0;
            let b = self.1;
            let f = (1.0 - x * x).powi(2);
            let fx = -4.0 * x * (1.0 - x * x);
            let fxx = -4.0 + 12.0 * x * x;
            let g = (1.0 - y * y).powi(2);
            let gy = -4.0 * y * (1.0 - y * y);
            let gyy = -4.0 + 12.0 * y * y;
            let l = 1.0 + b * x;
            // (f l)'' = f'' l + 2 f' b ; (f l)' = f' l + f b
            Sym2::new(
                a * (fxx * l + 2.0 * fx * b) * g,
                a * (fx * l + f * b) * gy,
                a * f * l * gyy,
            )
        }
    }

    /// Exact gradient of [`Bubble`] (the test above uses FD only for clarity).
    struct BubbleExact(f64, f64);
    impl Smooth for BubbleExact {
        fn value(&self, p: Vec2) -> f64 {
            Bubble(self.0, self.1).value(p)
        }
        fn grad(&self, p: Vec2) -> Vec2 {
            let (x, y) = (p[0], p[1]);
            let (a, b) = (self.0, self.1);
            let f = (1.0 - x * x).powi(2);
            let fx = -4.0 * x * (1.0 - x * x);
            let g = (1.0 - y * y).powi(2);
            let gy = -4.0 * y * (1.0 - y * y);
            let l = 1.0 + b * x;
            [a * (fx * l + f * b) * g, a * f * l * gy]
        }
        fn hessian(&self, p: Vec2) -> Sym2 {
            Bubble(self.0, self.1).hessian(p)
        }
    }

    #[test]
    fn zero_state_energies() {
        let space = disc(0.4);
        let p = PlateProblem::new(2.0, 1.0).with_load(Load::Uniform(-1.0));
        let e = compute_energies(&space, &p, &State::zeros(&space)).unwrap();
        assert_eq!(e, EnergyBreakdown::default());
    }

    #[test]
    fn errors_of_identical_inputs_vanish() {
        let e = EnergyBreakdown {
            membrane: 1.0,
            bending: 2.0,
            coupling: -3.0,
            ..Default::default()
        };
        let r = energy_errors(&e, &e);
        assert_eq!((r.bending, r.membrane, r.coupling), (Some(0.0), Some(0.0), Some(0.0)));
        let zero = EnergyBreakdown::default();
        assert_eq!(energy_errors(&e, &zero).membrane, None);
        assert_eq!(percent_error(1.01, 1.0).map(|x| (x * 1e6).round() / 1e6), Some(1.0));
    }

    #[test]
    fn exact_interpolants_give_close_energies() {
        let space = disc(0.1);
        let ex = analytic::test1_exact(0.15);
        let state = State {
            v: space.interpolate(|x| (ex.v)(x)),
            w: space.interpolate(|x| (ex.w)(x)),
        };
        let p = PlateProblem::new(1.0, 1.0);
        let e = compute_energies(&space, &p, &state).unwrap();
        let err = energy_errors(&e, &ex.energies.into());
        for x in [err.bending, err.membrane, err.coupling] {
            assert!(x.unwrap().abs() < 2.0, "{err:?}");
        }
        assert!(e.membrane >= 0.0 && e.bending >= 0.0);
    }

    #[test]
    fn test2_interpolant_structure() {
        let space = disc(0.2);
        let ex = analytic::test2_exact(10.0, [0.2, 0.0]);
        let state = State {
            v: space.interpolate(|x| (ex.v)(x)),
            w: space.zero_field(),
        };
        let p = PlateProblem::new(10.0, 0.0).with_disclinations(ex.disclinations.clone());
        let e = compute_energies(&space, &p, &state).unwrap();
        assert_eq!((e.bending, e.coupling), (0.0, 0.0));
        assert!(e.membrane > 0.0);
    }

    #[test]
    fn curvature_of_a_paraboloid() {
        let space = disc(0.3);
        let w = space.interpolate(|x| 0.5 * geom::dot(x, x));
        let k = gaussian_curvature_field(&space, &w);
        // interior cells (all nodes free) reproduce the quadratic exactly
        let t = (0..space.mesh().n_triangles())
            .find(|&t| !space.dofmap().cell_free(t).contains(&CONSTRAINED))
            .unwrap();
        for b in [[1.0, 0.0, 0.0], [0.2, 0.3, 0.5]] {
            assert!((k.eval(t, b) - 2.0).abs() < 1e-10);
        }
        let zero = gaussian_curvature_field(&space, &space.zero_field());
        assert_eq!((zero.integral, zero.abs_integral), (0.0, 0.0));
        assert_eq!(zero.relative_mean(), 0.0);
    }

    #[test]
    fn radial_stress_of_isotropic_potential() {
        let space = disc(0.3);
        let v = space.interpolate(|x| 0.5 * geom::dot(x, x));
        // pick points inside fully interior cells
        for t in 0..space.mesh().n_triangles() {
            if !space.dofmap().cell_free(t).contains(&CONSTRAINED) {
                let c = space.mesh().centroid(t);
                assert!((radial_stress_at(&space, &v, c).unwrap() - 1.0).abs() < 1e-10);
            }
        }
        assert_eq!(radial_stress_from_hessian(Sym2::new(3.0, 0.0, 5.0), [0.0, 0.0]), 5.0);
    }

    #[test]
    fn profiles() {
        let space = disc(0.2);
        let ex = analytic::test2_exact(1.0, [0.2, 0.0]);
        let v = space.interpolate(|x| (ex.v)(x));
        let p = extract_profile(&space, &v, Axis::X, DEFAULT_PROFILE_SAMPLES, true).unwrap();
        assert_eq!(p.abscissae.len(), 401);
        assert!(p.abscissae.windows(2).all(|w| w[1] > w[0]));
        let m = p.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((m - 1.0).abs() < 1e-15);
        for i in 0..401 {
            assert!((p.values[i] + p.values[400 - i]).abs() < 1e-8);
        }
        let z = extract_profile(&space, &space.zero_field(), Axis::Y, 11, true).unwrap();
        assert!(z.normalization.is_none() && z.values.iter().all(|&v| v == 0.0));
        assert!(extract_profile(&space, &v, Axis::X, 1, false).is_err());
    }

    #[test]
    fn interpolation_error_is_fourth_order() {
        let ex = analytic::test1_exact(0.15);
        let errs: Vec<f64> = [0.2, 0.1]
            .iter()
            .map(|&h| {
                let s = disc(h);
                l2_error(&s, &s.interpolate(|x| (ex.w)(x)), |x| (ex.w)(x))
            })
            .collect();
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 3.5, "rate {rate}, errors {errs:?}");
    }

    #[test]
    fn monge_ampere_symmetry_on_polynomials() {
        let space = disc(0.2);
        let phi = RadialFn(RadialPoly::one_minus_s_pow(2, 1.0));
        let chi = QuadraticFn(Sym2::new(2.0, 0.0, 0.0));
        let eta = QuadraticFn(Sym2::new(0.0, 0.0, 2.0));
        let ints = monge_ampere_integrals(&disc_quadrature(&space, 6), &phi, &chi, &eta);
        let expected = -4.0 * std::f64::consts::PI / 3.0;
        for i in ints {
            assert!((i - expected).abs() < 1e-10, "{ints:?}");
        }
        // on the inscribed polygon the boundary terms no longer vanish
        let poly = monge_ampere_integrals(&mesh_quadrature(&space, &triangle_rule(6)), &phi, &chi, &eta);
        assert!((poly[1] - poly[2]).abs() > 1e-6);
    }

    #[test]
    fn coupling_energy_forms_agree_for_clamped_functions() {
        let space = square(6);
        let rule = triangle_rule(12);
        let (a, b) = coupling_energy_forms(&space, &rule, &BubbleExact(0.7, 0.3), &BubbleExact(1.3, -0.4));
        assert!((a - b).abs() <= 1e-8 * a.abs(), "{a} vs {b}");
        // the finite-difference gradient variant is only approximately equal
        let (c, _) = coupling_energy_forms(&space, &rule, &Bubble(0.7, 0.3), &Bubble(1.3, -0.4));
        assert!((c - a).abs() < 1e-6 * a.abs());
    }

    #[test]
    fn vtk_export_layout() {
        let space = disc(0.5);
        let ex = analytic::test1_exact(0.15);
        let state = State {
            v: space.interpolate(|x| (ex.v)(x)),
            w: space.interpolate(|x| (ex.w)(x)),
        };
        let s = vtk_string(&space, &state);
        let n_pts = space.dofmap().n_total();
        assert!(s.contains(&format!("POINTS {n_pts} double")));
        assert!(s.contains(&format!("CELLS {} ", 9 * space.mesh().n_triangles())));
        for name in ["w", "v", "gauss_bracket", "sigma_rr"] {
            assert!(s.contains(&format!("SCALARS {name} double 1")));
        }
        let f = nodal_fields(&space, &state);
        for t in &f.triangles {
            let [a, b, c] = t.map(|i| f.points[i]);
            assert!(geom::signed_area(a, b, c) > 0.0);
        }
    }

    #[test]
    fn csv_has_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let x = 0.1 + 0.2;
        write_csv(&path, &["a", "b"], &[vec![x, 1.0 / 3.0]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("a,b"));
        let vals: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(vals, vec![x, 1.0 / 3.0]);
        assert!(write_csv(&path, &["a"], &[vec![1.0, 2.0]]).is_err());
    }
}
