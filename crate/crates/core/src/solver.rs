//! Sparse direct solves and damped Newton iteration.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::perm::PermRef;
use faer::sparse::linalg::cholesky::{factorize_symbolic_cholesky, SymbolicCholesky, SymmetricOrdering};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, LuSymbolicParams, NumericLu, SymbolicLu};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::linalg::cholesky::IntranodeLbltRef;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Conj, Mat, Par, Side};
use serde::{Deserialize, Serialize};

use crate::error::{FvkError, Result};
use crate::sparse::{self, CsrMatrix};

/// Relative asymmetry below which a matrix is factorised as symmetric.
const SYMMETRY_TOL: f64 = 1e-12;
const GMRES_RESTART: usize = 40;
const GMRES_MAX_ITERS: usize = 400;
const GMRES_TOL: f64 = 1e-10;

/// How the last linear system was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveMethod {
    /// Supernodal `LBLᵀ` with minimum-degree ordering.
    SymmetricIndefinite,
    /// GMRES preconditioned by the `LBLᵀ` factors of the symmetric part.
    PreconditionedGmres,
    /// Supernodal LU with partial pivoting.
    Lu,
}

/// Sparse direct solver for the Newton systems.
///
/// Symmetric matrices are factorised as `LBLᵀ` after a minimum-degree
/// ordering. Nonsymmetric ones are solved by GMRES preconditioned with the
/// factors of their symmetric part, and by sparse LU if that stalls. The
/// symbolic analyses are kept between calls, so repeated solves with the
/// same pattern (Newton steps) skip reordering. Every solution is checked
/// against the residual of the original system.
#[derive(Default)]
pub struct LinearSolver {
    cholesky: Option<(Vec<usize>, Vec<usize>, SymbolicCholesky<usize>)>,
    lu: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
    last_method: Option<SolveMethod>,
}

struct LbltFactor<'a> {
    symbolic: &'a SymbolicCholesky<usize>,
    values: Vec<f64>,
    subdiag: Vec<f64>,
    perm_fwd: Vec<usize>,
    perm_inv: Vec<usize>,
}

impl LbltFactor<'_> {
    fn apply(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let perm = PermRef::new_checked(&self.perm_fwd, &self.perm_inv, n);
        let f = IntranodeLbltRef::new(self.symbolic, &self.values, &self.subdiag, perm);
        let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        f.solve_in_place_with_conj(Conj::No, rhs.as_mut(), Par::Seq, MemStack::new(&mut mem));
        (0..n).map(|i| rhs[(i, 0)]).collect()
    }
}

fn same_pattern(cache: &Option<(Vec<usize>, Vec<usize>, impl Sized)>, a: &CsrMatrix) -> bool {
    matches!(cache, Some((rp, ci, _)) if rp == a.row_ptr() && ci == a.col_idx())
}

fn col_pattern(a: &CsrMatrix) -> SymbolicSparseColMat<usize> {
    let n = a.nrows();
    SymbolicSparseColMat::new_checked(n, n, a.row_ptr().to_vec(), None, a.col_idx().to_vec())
}

fn structurally_symmetric(a: &CsrMatrix) -> bool {
    let t = a.transpose();
    t.row_ptr() == a.row_ptr() && t.col_idx() == a.col_idx()
}

/// `(A + Aᵀ)/2` on the pattern of `A` (which must be structurally symmetric).
fn symmetric_part(a: &CsrMatrix) -> CsrMatrix {
    let t = a.transpose();
    let mut s = a.clone();
    for (v, w) in s.values_mut().iter_mut().zip(t.values()) {
        *v = 0.5 * (*v + w);
    }
    s
}

impl LinearSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Method used by the most recent successful solve.
    pub fn last_method(&self) -> Option<SolveMethod> {
        self.last_method
    }

    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n {
            return Err(FvkError::Parameter(format!(
                "dimension mismatch: {}x{} matrix, rhs of length {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        if structurally_symmetric(a) {
            let symmetric = a.asymmetry() <= SYMMETRY_TOL * a.max_abs();
            let s;
            let sym_part = if symmetric {
                a
            } else {
                s = symmetric_part(a);
                &s
            };
            let attempt = self.factor_symmetric(sym_part).map(|f| {
                if symmetric {
                    (f.apply(b), SolveMethod::SymmetricIndefinite)
                } else {
                    (gmres(a, b, |r| f.apply(r)), SolveMethod::PreconditionedGmres)
                }
            });
            if let Some((x, method)) = attempt {
                if check_solution(a, b, &x).is_ok() {
                    self.last_method = Some(method);
                    return Ok(x);
                }
            }
        }
        let x = self.solve_lu(a, b)?;
        check_solution(a, b, &x)?;
        self.last_method = Some(SolveMethod::Lu);
        Ok(x)
    }

    /// Numeric `LBLᵀ` factorisation; `None` if it breaks down.
    fn factor_symmetric(&mut self, a: &CsrMatrix) -> Option<LbltFactor<'_>> {
        let n = a.nrows();
        if !same_pattern(&self.cholesky, a) {
            let sym =
                factorize_symbolic_cholesky(col_pattern(a).as_ref(), Side::Lower, SymmetricOrdering::Amd, Default::default())
                    .ok()?;
            self.cholesky = Some((a.row_ptr().to_vec(), a.col_idx().to_vec(), sym));
        }
        let (_, _, symbolic) = self.cholesky.as_ref()?;
        let mat = SparseColMat::new(col_pattern(a), a.values().to_vec());
        let mut f = LbltFactor {
            symbolic,
            values: vec![0.0; symbolic.len_val()],
            subdiag: vec![0.0; n],
            perm_fwd: vec![0; n],
            perm_inv: vec![0; n],
        };
        let mut mem =
            MemBuffer::new(symbolic.factorize_numeric_intranode_lblt_scratch::<f64>(Par::Seq, Default::default()));
        symbolic.factorize_numeric_intranode_lblt(
            &mut f.values,
            &mut f.subdiag,
            &mut f.perm_fwd,
            &mut f.perm_inv,
            mat.as_ref(),
            Side::Lower,
            Par::Seq,
            MemStack::new(&mut mem),
            Default::default(),
        );
        f.values.iter().all(|v| v.is_finite()).then_some(f)
    }

    fn solve_lu(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let n = a.nrows();
        // CSR storage of A is CSC storage of Aᵀ: factor Aᵀ, then solve transposed.
        if !same_pattern(&self.lu, a) {
            let params = LuSymbolicParams {
                supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
                ..Default::default()
            };
            let sym = factorize_symbolic_lu(col_pattern(a).as_ref(), params).map_err(|e| {
                FvkError::LinearAlgebra {
                    pivot: 0,
                    msg: format!("symbolic factorisation failed: {e:?}"),
                }
            })?;
            self.lu = Some((a.row_ptr().to_vec(), a.col_idx().to_vec(), sym));
        }
        let (_, _, symbolic) = self.lu.as_ref().expect("symbolic factorisation present");
        let at = SparseColMat::new(col_pattern(a), a.values().to_vec());
        let mut numeric = NumericLu::new();
        let mut mem = MemBuffer::new(
            symbolic
                .factorize_numeric_lu_scratch::<f64>(Par::Seq, Default::default())
                .or(symbolic.solve_transpose_in_place_scratch::<f64>(1, Par::Seq)),
        );
        let lu = symbolic
            .factorize_numeric_lu(&mut numeric, at.as_ref(), Par::Seq, MemStack::new(&mut mem), Default::default())
            .map_err(|e| FvkError::LinearAlgebra {
                pivot: 0,
                msg: format!("numeric factorisation failed: {e:?}"),
            })?;
        let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        lu.solve_transpose_in_place_with_conj(Conj::No, rhs.as_mut(), Par::Seq, MemStack::new(&mut mem));
        Ok((0..n).map(|i| rhs[(i, 0)]).collect())
    }
}

/// Rejects non-finite or inaccurate solutions.
fn check_solution(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Result<()> {
    if let Some(pivot) = x.iter().position(|v| !v.is_finite()) {
        return Err(FvkError::LinearAlgebra {
            pivot,
            msg: "matrix is numerically singular".into(),
        });
    }
    let ax = a.matvec(x);
    let scale = a.max_abs() * sparse::max_abs(x) + sparse::max_abs(b);
    let (i, worst) = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    if worst > 1e-6 * scale.max(f64::MIN_POSITIVE) {
        return Err(FvkError::LinearAlgebra {
            pivot: i,
            msg: format!("solve is inaccurate: residual {worst:.3e} vs scale {scale:.3e}"),
        });
    }
    Ok(())
}

/// Restarted GMRES with right preconditioner `m`. Iterates until the true
/// residual reaches `GMRES_TOL ‖b‖` or stops improving between restarts
/// (the round-off floor); the caller judges the final accuracy.
fn gmres(a: &CsrMatrix, b: &[f64], m: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let n = b.len();
    let tol = GMRES_TOL * sparse::norm2(b);
    let mut x = vec![0.0; n];
    let mut total = 0;
    let mut previous = f64::INFINITY;
    while total < GMRES_MAX_ITERS {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = sparse::norm2(&r);
        if beta <= tol || beta > 0.5 * previous {
            break;
        }
        previous = beta;
        let mut basis = vec![r.iter().map(|v| v / beta).collect::<Vec<f64>>()];
        let mut h: Vec<Vec<f64>> = Vec::new();
        let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
        let mut g = vec![beta];
        let mut k = 0;
        while k < GMRES_RESTART && total < GMRES_MAX_ITERS {
            let z = m(&basis[k]);
            let mut w = a.matvec(&z);
            let mut col = vec![0.0; k + 2];
            for (j, vj) in basis.iter().enumerate() {
                col[j] = sparse::dot(&w, vj);
                w.iter_mut().zip(vj).for_each(|(wi, vi)| *wi -= col[j] * vi);
            }
            col[k + 1] = sparse::norm2(&w);
            for j in 0..k {
                let t = cs[j] * col[j] + sn[j] * col[j + 1];
                col[j + 1] = -sn[j] * col[j] + cs[j] * col[j + 1];
                col[j] = t;
            }
            let d = col[k].hypot(col[k + 1]);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (col[k] / d, col[k + 1] / d) };
            cs.push(c);
            sn.push(s);
            let next_norm = col[k + 1];
            col[k] = d;
            col.truncate(k + 1);
            h.push(col);
            g.push(-s * g[k]);
            g[k] *= c;
            k += 1;
            total += 1;
            if g[k].abs() <= tol || next_norm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / next_norm).collect());
        }
        // Krylov coefficients by back substitution
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[j][i] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            update.iter_mut().zip(&basis[j]).for_each(|(u, v)| *u += yj * v);
        }
        let dz = m(&update);
        x.iter_mut().zip(&dz).for_each(|(xi, d)| *xi += d);
    }
    x
}

/// One-shot sparse solve of `A x = b`.
pub fn sparse_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    LinearSolver::new().solve(a, b)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Converged once a full Newton step is this small relative to the state.
    pub step_tol: f64,
    pub max_iters: usize,
    /// First trial step fraction.
    pub initial_damping: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    /// Optional number of continuation steps used by the experiment drivers.
    pub continuation_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            step_tol: 1e-6,
            max_iters: 50,
            initial_damping: 1.0,
            backtrack_factor: 0.5,
            max_backtracks: 20,
            continuation_steps: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(FvkError::Parameter(m.to_string()));
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.step_tol >= 0.0) {
            return bad("solver tolerances must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.initial_damping > 0.0 && self.initial_damping <= 1.0) {
            return bad("initial_damping must lie in (0, 1]");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if self.continuation_steps == 0 {
            return bad("continuation_steps must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// ‖R‖₂ before the first step and after every accepted step.
    pub residual_history: Vec<f64>,
    /// ‖Δx‖₂ of every accepted step (after damping).
    pub step_norms: Vec<f64>,
    pub converged: bool,
    pub failure: Option<String>,
}

impl SolverReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}

/// A square nonlinear system `R(x) = 0` with an exact Jacobian.
pub trait NonlinearSystem {
    fn size(&self) -> usize;
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&self, x: &[f64]) -> Result<CsrMatrix>;
}

/// Damped Newton iteration `J δ = −R`, with step halving on the residual
/// norm. Failures (singular Jacobian, exhausted backtracking, iteration cap)
/// are recorded in the report; the last accepted iterate is returned.
pub fn newton<S: NonlinearSystem + ?Sized>(
    system: &S,
    x0: Vec<f64>,
    config: &SolverConfig,
) -> Result<(Vec<f64>, SolverReport)> {
    config.validate()?;
    if x0.len() != system.size() {
        return Err(FvkError::Parameter(format!(
            "initial state has length {}, expected {}",
            x0.len(),
            system.size()
        )));
    }
    let mut x = x0;
    let mut r = system.residual(&x)?;
    let mut norm = sparse::norm2(&r);
    let mut report = SolverReport {
        residual_history: vec![norm],
        ..Default::default()
    };
    let target = config.abs_tol.max(config.rel_tol * norm);
    let mut lu = LinearSolver::new();

    while norm > target {
        if report.iterations == config.max_iters {
            report.failure = Some(format!(
                "no convergence after {} iterations (residual {norm:.3e})",
                config.max_iters
            ));
            return Ok((x, report));
        }
        let jac = system.jacobian(&x)?;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = match lu.solve(&jac, &rhs) {
            Ok(d) => d,
            Err(e) => {
                report.failure = Some(e.to_string());
                return Ok((x, report));
            }
        };
        let delta_norm = sparse::norm2(&delta);

        let mut lambda = config.initial_damping;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            let r_trial = system.residual(&trial)?;
            let n_trial = sparse::norm2(&r_trial);
            if n_trial.is_finite() && n_trial < norm {
                accepted = Some((trial, r_trial, n_trial));
                break;
            }
            lambda *= config.backtrack_factor;
        }
        report.iterations += 1;
        let Some((trial, r_trial, n_trial)) = accepted else {
            // Round-off floor: a tiny full step that cannot reduce the
            // residual further means we are already at the root.
            if delta_norm <= config.step_tol * sparse::norm2(&x).max(1.0) {
                report.converged = true;
                return Ok((x, report));
            }
            report.failure = Some(format!(
                "line search exhausted after {} halvings (residual {norm:.3e})",
                config.max_backtracks
            ));
            return Ok((x, report));
        };
        x = trial;
        r = r_trial;
        norm = n_trial;
        report.residual_history.push(norm);
        report.step_norms.push(lambda * delta_norm);
        if lambda == 1.0 && delta_norm <= config.step_tol * sparse::norm2(&x) {
            break;
        }
    }
    report.converged = true;
    Ok((x, report))
}

#[derive(Debug, Clone)]
pub struct ContinuationOutcome {
    /// Last converged state.
    pub state: Vec<f64>,
    /// Parameter value belonging to `state`, if any step converged.
    pub parameter: Option<f64>,
    pub reports: Vec<(f64, SolverReport)>,
    pub completed: bool,
}

/// Solves a sequence of problems along `ramp`, warm-starting each from the
/// previous converged state. Stops at the first failing step.
pub fn continuation<S, F>(
    ramp: &[f64],
    mut make_system: F,
    x0: Vec<f64>,
    config: &SolverConfig,
) -> Result<ContinuationOutcome>
where
    S: NonlinearSystem,
    F: FnMut(f64) -> Result<S>,
{
    if ramp.is_empty() {
        return Err(FvkError::Parameter("continuation ramp is empty".into()));
    }
    let increasing = ramp.windows(2).all(|w| w[1] > w[0]);
    let decreasing = ramp.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(FvkError::Parameter("continuation ramp must be monotone".into()));
    }
    let mut out = ContinuationOutcome {
        state: x0,
        parameter: None,
        reports: Vec::new(),
        completed: false,
    };
    for &p in ramp {
        let system = make_system(p)?;
        let (x, report) = newton(&system, out.state.clone(), config)?;
        let ok = report.converged;
        out.reports.push((p, report));
        if !ok {
            return Ok(out);
        }
        out.state = x;
        out.parameter = Some(p);
    }
    out.completed = true;
    Ok(out)
}

/// `n` values from `start` to `end` inclusive, uniformly spaced in log scale.
pub fn log_ramp(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![end],
        _ => (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                (start.ln() * (1.0 - t) + end.ln() * t).exp()
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    #[test]
    fn identity_solve() {
        let b = vec![1.5, -2.0, 3.25];
        assert_eq!(sparse_solve(&CsrMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = sparse_solve(&a, &[3.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nonsymmetric_uses_the_right_orientation() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        let x = sparse_solve(&a, &[5.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    /// Tridiagonal `n × n` matrix with diagonal `d` and off-diagonals
    /// `lower`, `upper`.
    fn tridiagonal(n: usize, d: impl Fn(usize) -> f64, lower: f64, upper: f64) -> (CsrMatrix, DMatrix<f64>) {
        let dense = DMatrix::from_fn(n, n, |i, j| match j as i64 - i as i64 {
            0 => d(i),
            1 => upper,
            -1 => lower,
            _ => 0.0,
        });
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dense[(i, j)]).collect()).collect();
        (CsrMatrix::from_dense(&rows), dense)
    }

    fn check_against_dense(a: &CsrMatrix, dense: DMatrix<f64>, expected: SolveMethod) {
        let n = a.nrows();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5).sin()).collect();
        let mut solver = LinearSolver::new();
        let x = solver.solve(a, &b).unwrap();
        assert_eq!(solver.last_method(), Some(expected));
        let oracle = dense.lu().solve(&DVector::from_vec(b)).unwrap();
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() <= 1e-10 * (1.0 + oracle[i].abs()), "{i}");
        }
    }

    #[test]
    fn symmetric_indefinite_matrix() {
        let (a, dense) = tridiagonal(30, |i| if i < 15 { -4.0 } else { 3.0 + i as f64 }, 1.0, 1.0);
        check_against_dense(&a, dense, SolveMethod::SymmetricIndefinite);
    }

    #[test]
    fn mildly_nonsymmetric_matrix_uses_preconditioned_krylov() {
        let (a, dense) = tridiagonal(40, |i| 4.0 + (i % 3) as f64, -1.0, -1.3);
        check_against_dense(&a, dense, SolveMethod::PreconditionedGmres);
    }

    #[test]
    fn structurally_nonsymmetric_matrix_uses_lu() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        let dense = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        check_against_dense(&a, dense, SolveMethod::Lu);
    }

    #[test]
    fn repeated_solves_reuse_the_analysis() {
        let (a, dense) = tridiagonal(20, |_| 5.0, 1.0, 1.0);
        let mut solver = LinearSolver::new();
        let b = vec![1.0; 20];
        let x1 = solver.solve(&a, &b).unwrap();
        let mut a2 = a.clone();
        a2.values_mut().iter_mut().for_each(|v| *v *= 2.0);
        let x2 = solver.solve(&a2, &b).unwrap();
        for i in 0..20 {
            assert!((x1[i] - 2.0 * x2[i]).abs() < 1e-13);
        }
        check_against_dense(&a, dense, SolveMethod::SymmetricIndefinite);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 0.0)]);
        assert!(matches!(
            sparse_solve(&a, &[1.0, 1.0]),
            Err(FvkError::LinearAlgebra { .. })
        ));
    }

    fn random_spd(n: usize, seed: &[f64]) -> (CsrMatrix, DMatrix<f64>) {
        let b = DMatrix::from_fn(n, n, |i, j| seed[(i * n + j) % seed.len()] * ((i + 2 * j) % 3) as f64);
        let dense = &b * b.transpose() + DMatrix::identity(n, n) * n as f64;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dense[(i, j)]).collect()).collect();
        (CsrMatrix::from_dense(&rows), dense)
    }

    proptest! {
        #[test]
        fn agrees_with_dense_oracle(seed in proptest::collection::vec(-1.0..1.0f64, 7..20), rhs in proptest::collection::vec(-5.0..5.0f64, 9)) {
            let (a, dense) = random_spd(9, &seed);
            let x = sparse_solve(&a, &rhs).unwrap();
            let oracle = dense.clone().lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
            let chol = dense.cholesky().unwrap().solve(&DVector::from_vec(rhs));
            for i in 0..9 {
                prop_assert!((x[i] - oracle[i]).abs() <= 1e-9 * (1.0 + oracle[i].abs()));
                prop_assert!((chol[i] - oracle[i]).abs() <= 1e-9 * (1.0 + oracle[i].abs()));
            }
        }
    }

    /// R(x) = (x₀² − 4, x₀ x₁ − 2): root (2, 1).
    struct Toy;
    impl NonlinearSystem for Toy {
        fn size(&self) -> usize {
            2
        }
        fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![x[0] * x[0] - 4.0, x[0] * x[1] - 2.0])
        }
        fn jacobian(&self, x: &[f64]) -> Result<CsrMatrix> {
            Ok(CsrMatrix::from_dense(&[vec![2.0 * x[0], 0.0], vec![x[1], x[0]]]))
        }
    }

    #[test]
    fn newton_converges_quadratically() {
        let cfg = SolverConfig {
            abs_tol: 1e-13,
            rel_tol: 1e-14,
            ..Default::default()
        };
        let (x, report) = newton(&Toy, vec![5.0, 0.0], &cfg).unwrap();
        assert!(report.converged, "{report:?}");
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert_eq!(report.residual_history.len(), report.iterations + 1);
        assert!(report.residual_history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn newton_at_root_takes_no_steps() {
        let (_, report) = newton(&Toy, vec![2.0, 1.0], &SolverConfig::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn singular_jacobian_is_reported_not_fatal() {
        let (x, report) = newton(&Toy, vec![0.0, 0.0], &SolverConfig::default()).unwrap();
        assert!(!report.converged);
        assert!(report.failure.is_some());
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = SolverConfig {
            max_iters: 0,
            ..Default::default()
        };
        assert!(newton(&Toy, vec![1.0, 1.0], &cfg).is_err());
    }

    #[test]
    fn log_ramp_endpoints() {
        let r = log_ramp(1e-6, 1e-2, 5);
        assert_eq!(r.len(), 5);
        assert!((r[0] - 1e-6).abs() < 1e-18 && (r[4] - 1e-2).abs() < 1e-14);
        assert!((r[2] - 1e-4).abs() < 1e-16);
    }
}
