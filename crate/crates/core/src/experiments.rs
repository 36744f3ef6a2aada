//! Declarative experiment drivers: the verification tests, the β and γ
//! sweeps, the multi-disclination arrangements and free-form runs.
//!
//! Every driver writes its tables (CSV), fields (VTK) and a
//! `manifest.toml` into the configured output directory and returns an
//! [`Outcome`] with the solver reports and the checks it evaluated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, ExactSolution};
use crate::error::{FvkError, Result};
use crate::forms::{Disclination, DisclinationSet, Load, PlateProblem, PlateSystem, State, Variant};
use crate::geom::{self, Vec2};
use crate::mesh::{generate_disc_mesh, import_msh};
use crate::post::{self, Axis, EnergyBreakdown, Profile};
use crate::solver::{continuation, log_ramp, newton, SolverConfig, SolverReport};
use crate::space::Space;

/// Energy-error gate of the verification tests, in percent.
pub const VERIFY_ERROR_GATE: f64 = 1.0;
/// Allowed pointwise deviation between variants, relative to the slice max.
pub const VARIANT_DEVIATION_GATE: f64 = 0.01;
/// Mean Gaussian curvature tolerance `|∫[w,w]| / ∫|[w,w]|`.
pub const MEAN_CURVATURE_GATE: f64 = 1e-3;
/// Relative tolerance for sign summaries of sampled fields.
pub const SIGN_TOLERANCE: f64 = 1e-3;
/// Largest γ used by the quadratic fit of the γ sweep.
pub const GAMMA_FIT_MAX: f64 = 2e-3;
/// Deviation from the linear (quadratic-energy) scaling that marks the
/// nonlinear regime of the γ sweep.
pub const NONLINEAR_THRESHOLD: f64 = 0.05;
/// Intermediate load counts tried when a γ-sweep point fails to converge
/// from its predecessor.
const GAMMA_SUBSTEPS: [usize; 3] = [4, 8, 16];
/// Points per side of the σ_rr heat-map grid.
pub const DEFAULT_GRID_SAMPLES: usize = 201;
/// Dipole position of the second verification test.
pub const TEST2_POSITION: Vec2 = [0.2, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    VerifyTest1,
    VerifyTest2,
    SweepBeta,
    SweepGamma,
    Disclinations,
    Custom,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::VerifyTest1,
        ExperimentKind::VerifyTest2,
        ExperimentKind::SweepBeta,
        ExperimentKind::SweepGamma,
        ExperimentKind::Disclinations,
        ExperimentKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::VerifyTest1 => "verify-test1",
            ExperimentKind::VerifyTest2 => "verify-test2",
            ExperimentKind::SweepBeta => "sweep-beta",
            ExperimentKind::SweepGamma => "sweep-gamma",
            ExperimentKind::Disclinations => "disclinations",
            ExperimentKind::Custom => "custom",
        }
    }

    /// Verification runs turn failed checks into a nonzero exit status.
    pub fn is_verification(self) -> bool {
        matches!(self, ExperimentKind::VerifyTest1 | ExperimentKind::VerifyTest2)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = FvkError;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| FvkError::Config(format!("unknown experiment {s:?}")))
    }
}

/// A complete run description. Unset optional fields take the defaults of
/// the chosen experiment (see the driver functions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<ExperimentKind>,
    /// Target element size of the generated disc mesh.
    pub mesh_h: f64,
    /// Gmsh MSH 2.2 file used instead of the generated mesh.
    pub mesh_file: Option<PathBuf>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub nu: f64,
    pub alpha: f64,
    /// Formulations to run; empty means the experiment default.
    pub variants: Vec<Variant>,
    /// Uniform transverse load `p`.
    pub pressure: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub gammas: Option<Vec<f64>>,
    /// Named multi-disclination arrangements.
    pub presets: Option<Vec<String>>,
    /// Explicit disclinations for custom runs.
    pub disclinations: Vec<Disclination>,
    pub profile_samples: usize,
    pub grid_samples: usize,
    pub write_vtk: bool,
    pub out: PathBuf,
    pub solver: SolverConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: None,
            mesh_h: 0.05,
            mesh_file: None,
            beta: None,
            gamma: None,
            nu: 0.15,
            alpha: 300.0,
            variants: Vec::new(),
            pressure: None,
            betas: None,
            gammas: None,
            presets: None,
            disclinations: Vec::new(),
            profile_samples: post::DEFAULT_PROFILE_SAMPLES,
            grid_samples: DEFAULT_GRID_SAMPLES,
            write_vtk: true,
            out: PathBuf::from("out"),
            solver: SolverConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        RunConfig {
            experiment: Some(kind),
            ..Default::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| FvkError::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| FvkError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| FvkError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| FvkError::Config(e.to_string()))
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.experiment
            .ok_or_else(|| FvkError::Config("no experiment selected".into()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FvkError::Config(m));
        self.kind()?;
        if self.mesh_file.is_none() && !(self.mesh_h > 0.0 && self.mesh_h <= 1.0) {
            return bad(format!("mesh_h must lie in (0, 1], got {}", self.mesh_h));
        }
        for (name, v) in [("beta", self.beta), ("gamma", self.gamma), ("pressure", self.pressure)] {
            if v.is_some_and(|x| !x.is_finite()) {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.beta.is_some_and(|b| b <= 0.0) {
            return bad("beta must be positive".into());
        }
        if self.gamma.is_some_and(|g| g < 0.0) {
            return bad("gamma must be non-negative".into());
        }
        if !(self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return bad(format!("nu must lie in (-1, 1/2), got {}", self.nu));
        }
        for (name, list) in [("betas", &self.betas), ("gammas", &self.gammas)] {
            if let Some(l) = list {
                check_sweep_list(name, l)?;
            }
        }
        if let Some(p) = &self.presets {
            if p.is_empty() {
                return bad("presets must not be empty".into());
            }
            for name in p {
                if analytic::preset(name).is_none() {
                    return bad(format!("unknown preset {name:?}"));
                }
            }
        }
        if !self.disclinations.is_empty() {
            DisclinationSet::new(self.disclinations.clone())
                .map_err(|e| FvkError::Config(e.to_string()))?;
        }
        if self.profile_samples < 2 {
            return bad("profile_samples must be at least 2".into());
        }
        if self.grid_samples < 2 {
            return bad("grid_samples must be at least 2".into());
        }
        self.solver
            .validate()
            .map_err(|e| FvkError::Config(e.to_string()))
    }

    fn variants_or(&self, default: &[Variant]) -> Vec<Variant> {
        if self.variants.is_empty() {
            default.to_vec()
        } else {
            let mut v = self.variants.clone();
            v.dedup();
            v
        }
    }

    fn problem(&self, beta: f64, gamma: f64, variant: Variant) -> PlateProblem {
        PlateProblem::new(beta, gamma)
            .with_nu(self.nu)
            .with_alpha(self.alpha)
            .with_variant(variant)
    }

    /// The finite-element space of the configured mesh.
    pub fn build_space(&self) -> Result<Space> {
        let mesh = match &self.mesh_file {
            Some(path) => import_msh(path)?,
            None => generate_disc_mesh(self.mesh_h)?,
        };
        Space::new(mesh)
    }
}

fn check_sweep_list(name: &str, l: &[f64]) -> Result<()> {
    if l.is_empty() {
        return Err(FvkError::Config(format!("{name} must not be empty")));
    }
    if l.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(FvkError::Config(format!("{name} must contain positive values")));
    }
    let inc = l.windows(2).all(|w| w[1] > w[0]);
    let dec = l.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(FvkError::Config(format!("{name} must be strictly monotone")));
    }
    Ok(())
}

/// Default γ values of the γ sweep: `6.25e−7 · 10^{k/2}`, k = 0..9, which
/// spans `[6.25e−7, 2e−2]` and contains `6.25e−4`.
pub fn default_gammas() -> Vec<f64> {
    (0..10).map(|k| 6.25e-7 * 10f64.powf(k as f64 / 2.0)).collect()
}

pub const DEFAULT_BETAS: [f64; 5] = [10.0, 17.0, 31.0, 56.0, 100.0];

// ---------------------------------------------------------------------------
// results

/// One evaluated acceptance check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, bound: impl Into<String>, passed: bool) -> Self {
        Check {
            name: name.into(),
            value,
            bound: bound.into(),
            passed,
        }
    }

    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(name, value, format!("<= {limit:e}"), value.abs() <= limit)
    }

    fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check::new(name, value, format!("in [{lo}, {hi}]"), (lo..=hi).contains(&value))
    }
}

/// A single nonlinear solve with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub label: String,
    pub variant: Variant,
    pub beta: f64,
    pub gamma: f64,
    pub unknowns: usize,
    pub energies: EnergyBreakdown,
    pub seconds: f64,
    pub report: SolverReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshStats {
    pub source: String,
    pub vertices: usize,
    pub triangles: usize,
    pub edges: usize,
    pub max_diameter: f64,
    pub free_dofs: usize,
}

impl MeshStats {
    fn of(space: &Space, config: &RunConfig) -> Self {
        let m = space.mesh();
        MeshStats {
            source: match &config.mesh_file {
                Some(p) => p.display().to_string(),
                None => format!("generated disc, h = {}", config.mesh_h),
            },
            vertices: m.n_vertices(),
            triangles: m.n_triangles(),
            edges: m.n_edges(),
            max_diameter: m.max_diameter(),
            free_dofs: space.n_free(),
        }
    }
}

/// What a driver did: every solve, every check and every file written.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub experiment: ExperimentKind,
    pub out_dir: PathBuf,
    pub mesh: MeshStats,
    pub runs: Vec<RunRecord>,
    pub checks: Vec<Check>,
    /// Scalar results worth reporting (fitted slopes and the like).
    pub summary: BTreeMap<String, f64>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn new(kind: ExperimentKind, config: &RunConfig, space: &Space) -> Self {
        Outcome {
            experiment: kind,
            out_dir: config.out.clone(),
            mesh: MeshStats::of(space, config),
            runs: Vec::new(),
            checks: Vec::new(),
            summary: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    pub fn solver_failed(&self) -> bool {
        self.runs.iter().any(|r| !r.report.converged)
    }

    pub fn checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Process exit status: 3 for a solver failure, 4 for a failed check
    /// of a verification run, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.solver_failed() {
            3
        } else if self.experiment.is_verification() && !self.checks_passed() {
            4
        } else {
            0
        }
    }

    fn file(&mut self, name: &str) -> PathBuf {
        let p = self.out_dir.join(name);
        self.files.push(p.clone());
        p
    }
}

#[derive(Serialize)]
struct Versions {
    fvk: &'static str,
    target_os: &'static str,
    target_arch: &'static str,
    workers: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: ExperimentKind,
    versions: Versions,
    config: &'a RunConfig,
    mesh: &'a MeshStats,
    summary: &'a BTreeMap<String, f64>,
    checks: &'a [Check],
    runs: &'a [RunRecord],
    files: Vec<String>,
}

fn write_manifest(outcome: &mut Outcome, config: &RunConfig) -> Result<()> {
    let path = outcome.out_dir.join("manifest.toml");
    let files = outcome
        .files
        .iter()
        .map(|p| p.strip_prefix(&outcome.out_dir).unwrap_or(p).display().to_string())
        .collect();
    let manifest = Manifest {
        experiment: outcome.experiment,
        versions: Versions {
            fvk: env!("CARGO_PKG_VERSION"),
            target_os: std::env::consts::OS,
            target_arch: std::env::consts::ARCH,
            workers: rayon::current_num_threads(),
        },
        config,
        mesh: &outcome.mesh,
        summary: &outcome.summary,
        checks: &outcome.checks,
        runs: &outcome.runs,
        files,
    };
    let text = toml::to_string_pretty(&manifest).map_err(|e| FvkError::Config(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| FvkError::io(&path, e))?;
    outcome.files.push(path);
    Ok(())
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| FvkError::io(path, e))
}

// ---------------------------------------------------------------------------
// solving

/// A converged (or last attempted) state with its report.
#[derive(Debug, Clone)]
pub struct Solved {
    pub state: State,
    pub report: SolverReport,
    pub energies: EnergyBreakdown,
    pub seconds: f64,
}

impl Solved {
    fn record(&self, label: impl Into<String>, problem: &PlateProblem, space: &Space) -> RunRecord {
        RunRecord {
            label: label.into(),
            variant: problem.variant,
            beta: problem.beta,
            gamma: problem.gamma,
            unknowns: 2 * space.n_free(),
            energies: self.energies,
            seconds: self.seconds,
            report: self.report.clone(),
        }
    }
}

/// The problem with its disclination angles and its γ scaled by `lambda`.
pub fn scaled_problem(problem: &PlateProblem, lambda: f64) -> Result<PlateProblem> {
    let items = problem
        .disclinations
        .iter()
        .map(|d| Disclination::new(d.position, d.angle * lambda))
        .collect();
    let mut p = problem.clone();
    p.gamma *= lambda;
    p.disclinations = DisclinationSet::new(items)?;
    Ok(p)
}

/// Newton's method from `initial` (zero if absent). With
/// `config.continuation_steps > 1` the data are ramped in as many equal
/// steps, warm-starting each from the previous one. Linear algebra
/// breakdowns are reported as non-convergence so that partial results can
/// still be written.
pub fn solve(space: &Space, problem: &PlateProblem, initial: Option<&State>, config: &SolverConfig) -> Result<Solved> {
    let start = Instant::now();
    let x0 = initial.map_or_else(|| vec![0.0; 2 * space.n_free()], State::to_vec);
    let steps = config.continuation_steps.max(1);
    let attempt = if steps == 1 {
        let system = PlateSystem::new(space, problem)?;
        newton(&system, x0.clone(), config)
    } else {
        let ramp: Vec<f64> = (1..=steps).map(|k| k as f64 / steps as f64).collect();
        continuation(
            &ramp,
            |lambda| PlateSystem::new(space, &scaled_problem(problem, lambda)?),
            x0.clone(),
            config,
        )
        .map(|out| {
            let mut merged = SolverReport::default();
            for (lambda, r) in &out.reports {
                merged.iterations += r.iterations;
                merged.residual_history.extend(&r.residual_history);
                merged.step_norms.extend(&r.step_norms);
                if let Some(f) = &r.failure {
                    merged.failure = Some(format!("continuation step {lambda}: {f}"));
                }
            }
            merged.converged = out.completed;
            (out.state, merged)
        })
    };
    let (x, report) = match attempt {
        Ok(r) => r,
        Err(e @ FvkError::LinearAlgebra { .. }) => (
            x0,
            SolverReport {
                failure: Some(e.to_string()),
                ..Default::default()
            },
        ),
        Err(e) => return Err(e),
    };
    let state = State::from_vec(x);
    let energies = post::compute_energies(space, problem, &state)?;
    Ok(Solved {
        state,
        report,
        energies,
        seconds: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// helpers

/// Largest pointwise difference of two sampled profiles relative to the
/// largest magnitude of the first.
pub fn profile_deviation(reference: &Profile, other: &Profile) -> f64 {
    let scale = reference.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = reference
        .values
        .iter()
        .zip(&other.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn exact_profile(f: &analytic::ScalarFn, n: usize) -> Profile {
    let abscissae: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let values = abscissae.iter().map(|&s| f([s, 0.0])).collect();
    Profile {
        abscissae,
        values,
        normalization: None,
    }
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), post::fmt_f64)
}

/// Adds the pairwise variant cross-checks of the `ξ₂ = 0` slices.
fn variant_checks(outcome: &mut Outcome, field: &str, profiles: &[(Variant, Profile)]) {
    let Some((v0, reference)) = profiles.first() else {
        return;
    };
    for (v, p) in &profiles[1..] {
        let dev = profile_deviation(reference, p);
        outcome.checks.push(Check::at_most(
            format!("{field} slice {v} vs {v0}"),
            dev,
            VARIANT_DEVIATION_GATE,
        ));
    }
}

// ---------------------------------------------------------------------------
// drivers

/// Runs the experiment selected by `config` and writes its manifest.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    match config.kind()? {
        ExperimentKind::VerifyTest1 => run_verify_test1(config),
        ExperimentKind::VerifyTest2 => run_verify_test2(config),
        ExperimentKind::SweepBeta => run_sweep_beta(config),
        ExperimentKind::SweepGamma => run_sweep_gamma(config),
        ExperimentKind::Disclinations => run_disclinations(config),
        ExperimentKind::Custom => run_custom(config),
    }
}

/// Writes the shared outputs of a verification run: the energy table and
/// the error checks.
fn verify_table(
    outcome: &mut Outcome,
    exact: &EnergyBreakdown,
    results: &[(Variant, EnergyBreakdown, bool)],
    gate_bending: bool,
) -> Result<()> {
    let header = [
        "variant", "bending", "membrane", "coupling", "e_b_percent", "e_m_percent", "e_c_percent", "converged",
    ];
    let mut rows = vec![vec![
        "exact".to_string(),
        post::fmt_f64(exact.bending),
        post::fmt_f64(exact.membrane),
        post::fmt_f64(exact.coupling),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ]];
    for (v, e, converged) in results {
        let err = post::energy_errors(e, exact);
        rows.push(vec![
            v.to_string(),
            post::fmt_f64(e.bending),
            post::fmt_f64(e.membrane),
            post::fmt_f64(e.coupling),
            pct(err.bending),
            pct(err.membrane),
            pct(err.coupling),
            converged.to_string(),
        ]);
        let mut gated = vec![("e_m", err.membrane)];
        if gate_bending {
            gated.extend([("e_b", err.bending), ("e_c", err.coupling)]);
        }
        for (name, value) in gated {
            outcome.checks.push(Check::at_most(
                format!("{v} {name} percent"),
                value.unwrap_or(f64::INFINITY),
                VERIFY_ERROR_GATE,
            ));
            if let Some(x) = value {
                outcome.summary.insert(format!("{v}_{name}_percent"), x);
            }
        }
    }
    let path = outcome.file("energies.csv");
    post::write_csv_text(path, &header, &rows)
}

/// Manufactured pressure test: `β = 100` and `γβ⁴ = 1` unless configured,
/// all three variants by default.
pub fn run_verify_test1(config: &RunConfig) -> Result<Outcome> {
    let space = config.build_space()?;
    let mut outcome = Outcome::new(ExperimentKind::VerifyTest1, config, &space);
    create_dir(&config.out)?;
    let exact: ExactSolution = analytic::test1_exact(config.nu);
    let beta = config.beta.unwrap_or(100.0);
    let gamma = config.gamma.unwrap_or(exact.load_factor / beta.powi(4));
    let n = config.profile_samples;

    let mut results = Vec::new();
    let (mut v_profiles, mut w_profiles) = (Vec::new(), Vec::new());
    for variant in config.variants_or(&Variant::ALL) {
        let problem = config.problem(beta, gamma, variant).with_load(exact.load.clone());
        let solved = solve(&space, &problem, None, &config.solver)?;
        outcome.runs.push(solved.record(variant.name(), &problem, &space));
        results.push((variant, solved.energies, solved.report.converged));
        v_profiles.push((variant, post::extract_profile(&space, &solved.state.v, Axis::X, n, false)?));
        w_profiles.push((variant, post::extract_profile(&space, &solved.state.w, Axis::X, n, false)?));
        if config.write_vtk {
            let path = outcome.file(&format!("test1_{variant}.vtk"));
            post::write_vtk(path, &space, &solved.state)?;
        }
    }
    verify_table(&mut outcome, &exact.energies.into(), &results, true)?;
    variant_checks(&mut outcome, "v", &v_profiles);
    variant_checks(&mut outcome, "w", &w_profiles);

    let v_exact = exact_profile(&exact.v, n);
    let w_exact = exact_profile(&exact.w, n);
    let mut names = Vec::new();
    let mut cols: Vec<&Profile> = Vec::new();
    for ((v, pv), (_, pw)) in v_profiles.iter().zip(&w_profiles) {
        names.push(format!("v_{v}"));
        names.push(format!("w_{v}"));
        cols.extend([pv, pw]);
    }
    names.extend(["v_exact".to_string(), "w_exact".to_string()]);
    cols.extend([&v_exact, &w_exact]);
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let path = outcome.file("profiles.csv");
    post::write_profiles_csv(path, &names, &cols)?;

    write_manifest(&mut outcome, config)?;
    Ok(outcome)
}

/// Disclination dipole `±1` at `±(0.2, 0)`, `β = 100`, no load.
pub fn run_verify_test2(config: &RunConfig) -> Result<Outcome> {
    let space = config.build_space()?;
    let mut outcome = Outcome::new(ExperimentKind::VerifyTest2, config, &space);
    create_dir(&config.out)?;
    let beta = config.beta.unwrap_or(100.0);
    let exact = analytic::test2_exact(beta, TEST2_POSITION);
    let n = config.profile_samples;

    let mut results = Vec::new();
    let mut v_profiles = Vec::new();
    for variant in config.variants_or(&Variant::ALL) {
        let problem = config
            .problem(beta, 0.0, variant)
            .with_disclinations(exact.disclinations.clone());
        let solved = solve(&space, &problem, None, &config.solver)?;
        outcome.runs.push(solved.record(variant.name(), &problem, &space));
        results.push((variant, solved.energies, solved.report.converged));

        let w_inf = solved.state.w.max_abs();
        let v_scale = solved.state.v.max_abs().max(1.0);
        outcome
            .checks
            .push(Check::at_most(format!("{variant} w_max relative"), w_inf / v_scale, 1e-8));
        outcome.summary.insert(format!("{variant}_w_max"), w_inf);

        let profile = post::extract_profile(&space, &solved.state.v, Axis::X, n, false)?;
        let scale = profile.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let asym = profile
            .values
            .iter()
            .zip(profile.values.iter().rev())
            .fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
        outcome.summary.insert(format!("{variant}_v_antisymmetry"), asym / scale);
        v_profiles.push((variant, profile));
        if config.write_vtk {
            let path = outcome.file(&format!("test2_{variant}.vtk"));
            post::write_vtk(path, &space, &solved.state)?;
        }
    }
    verify_table(&mut outcome, &exact.energies.into(), &results, false)?;
    variant_checks(&mut outcome, "v", &v_profiles);

    let v_exact = exact_profile(&exact.v, n);
    let names: Vec<String> = v_profiles
        .iter()
        .map(|(v, _)| format!("v_{v}"))
        .chain(["v_exact".to_string()])
        .collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let cols: Vec<&Profile> = v_profiles.iter().map(|(_, p)| p).chain([&v_exact]).collect();
    let path = outcome.file("profiles.csv");
    post::write_profiles_csv(path, &names, &cols)?;

    write_manifest(&mut outcome, config)?;
    Ok(outcome)
}

fn single_disclination() -> DisclinationSet {
    DisclinationSet::new(vec![Disclination::new([0.0, 0.0], -1.0)]).expect("origin lies inside the disc")
}

/// Aspect-ratio sweep: one `s = −1` disclination at the origin, `p = −1`,
/// `γβ⁴ = 1`. Points are solved in parallel, each into its own directory,
/// and merged in sweep order.
pub fn run_sweep_beta(config: &RunConfig) -> Result<Outcome> {
    let space = config.build_space()?;
    let mut outcome = Outcome::new(ExperimentKind::SweepBeta, config, &space);
    create_dir(&config.out)?;
    let betas = config.betas.clone().unwrap_or_else(|| DEFAULT_BETAS.to_vec());
    let variant = config.variants_or(&[Variant::Var])[0];
    let pressure = config.pressure.unwrap_or(-1.0);
    let n = config.profile_samples;
    let c = analytic::c_nu(config.nu);

    let points: Vec<(f64, Solved, Profile, Vec<PathBuf>)> = betas
        .par_iter()
        .enumerate()
        .map(|(i, &beta)| {
            let gamma = config.gamma.unwrap_or(1.0 / beta.powi(4));
            let problem = config
                .problem(beta, gamma, variant)
                .with_load(Load::Uniform(pressure))
                .with_disclinations(single_disclination());
            let solved = solve(&space, &problem, None, &config.solver)?;
            let dir = config.out.join(format!("point_{i:02}"));
            create_dir(&dir)?;
            let v = post::extract_profile(&space, &solved.state.v, Axis::X, n, false)?;
            let w = post::extract_profile(&space, &solved.state.w, Axis::X, n, false)?;
            let scaled = Profile {
                abscissae: v.abscissae.clone(),
                values: v.values.iter().map(|x| x / (beta * beta)).collect(),
                normalization: Some(beta * beta),
            };
            let mut files = vec![dir.join("profiles.csv")];
            post::write_profiles_csv(&files[0], &["v", "w", "v_over_beta2"], &[&v, &w, &scaled])?;
            if config.write_vtk {
                files.push(dir.join("fields.vtk"));
                post::write_vtk(&files[1], &space, &solved.state)?;
            }
            Ok((beta, solved, scaled, files))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (beta, solved, _, files) in &points {
        let gamma = config.gamma.unwrap_or(1.0 / beta.powi(4));
        let problem = config.problem(*beta, gamma, variant);
        outcome.runs.push(solved.record(format!("beta={beta}"), &problem, &space));
        outcome.files.extend(files.iter().cloned());
        let e = &solved.energies;
        let em_kl = analytic::kl_membrane_energy(*beta);
        let eb_kl = analytic::kl_bending_energy(gamma, *beta, c);
        rows.push(vec![*beta, gamma, e.membrane, e.bending, e.coupling, em_kl, eb_kl, e.membrane / em_kl]);
        outcome.checks.push(Check::within(format!("E_m/E_m^KL at beta={beta}"), e.membrane / em_kl, 0.95, 1.05));
    }
    let path = outcome.file("sweep_beta.csv");
    post::write_csv(
        path,
        &["beta", "gamma", "membrane", "bending", "coupling", "membrane_kl", "bending_kl", "membrane_ratio"],
        &rows,
    )?;

    let em: Vec<f64> = points.iter().map(|p| p.1.energies.membrane).collect();
    if betas.len() >= 2 {
        let slope = loglog_slope(&betas, &em);
        outcome.summary.insert("membrane_slope".into(), slope);
        outcome.checks.push(Check::within("E_m slope vs beta", slope, 3.95, 4.05));
        let (first, last) = (&points[0], &points[points.len() - 1]);
        let dev = profile_deviation(&first.2, &last.2);
        outcome.summary.insert("scaled_v_profile_deviation".into(), dev);
        let eb_first = first.1.energies.bending;
        let eb_last = last.1.energies.bending;
        outcome.summary.insert("bending_first".into(), eb_first);
        outcome.summary.insert("bending_last".into(), eb_last);
        outcome.checks.push(Check::new(
            "E_b decreases from first to last beta",
            eb_last / eb_first,
            "< 1 for increasing beta",
            (eb_last < eb_first) == (last.0 > first.0),
        ));
    }
    write_manifest(&mut outcome, config)?;
    Ok(outcome)
}

/// Load sweep at `β = 20` with one `s = −1` disclination at the origin and
/// `p = −1`. Points are solved in increasing γ, each warm-started from the
/// previous solution, since large γ needs the continuation.
pub fn run_sweep_gamma(config: &RunConfig) -> Result<Outcome> {
    let space = config.build_space()?;
    let mut outcome = Outcome::new(ExperimentKind::SweepGamma, config, &space);
    create_dir(&config.out)?;
    let mut gammas = config.gammas.clone().unwrap_or_else(default_gammas);
    gammas.sort_by(f64::total_cmp);
    let beta = config.beta.unwrap_or(20.0);
    let variant = config.variants_or(&[Variant::Var])[0];
    let pressure = config.pressure.unwrap_or(-1.0);
    let n = config.profile_samples;
    let c = analytic::c_nu(config.nu);

    let make = |gamma: f64| {
        config
            .problem(beta, gamma, variant)
            .with_load(Load::Uniform(pressure))
            .with_disclinations(single_disclination())
    };
    let mut previous: Option<(f64, State)> = None;
    let mut solved_points = Vec::new();
    for (i, &gamma) in gammas.iter().enumerate() {
        let problem = make(gamma);
        let start = Instant::now();
        let mut solved = solve(&space, &problem, previous.as_ref().map(|p| &p.1), &config.solver)?;
        if let (false, Some((g_prev, x_prev))) = (solved.report.converged, &previous) {
            // retry through log-spaced intermediate loads
            for substeps in GAMMA_SUBSTEPS {
                let ramp = log_ramp(*g_prev, gamma, substeps + 1);
                let retry = continuation(
                    &ramp[1..],
                    |g| PlateSystem::new(&space, &make(g)),
                    x_prev.to_vec(),
                    &config.solver,
                )?;
                if retry.completed {
                    let state = State::from_vec(retry.state);
                    let mut report = retry.reports.last().expect("ramp is non-empty").1.clone();
                    report.iterations = retry.reports.iter().map(|r| r.1.iterations).sum();
                    solved = Solved {
                        energies: post::compute_energies(&space, &problem, &state)?,
                        state,
                        report,
                        seconds: start.elapsed().as_secs_f64(),
                    };
                    break;
                }
            }
        }
        outcome.runs.push(solved.record(format!("gamma={gamma:e}"), &problem, &space));
        let v = post::extract_profile(&space, &solved.state.v, Axis::X, n, false)?;
        let w = post::extract_profile(&space, &solved.state.w, Axis::X, n, false)?;
        let dir = config.out.join(format!("point_{i:02}"));
        create_dir(&dir)?;
        let path = dir.join("profiles.csv");
        post::write_profiles_csv(&path, &["v", "w"], &[&v, &w])?;
        outcome.files.push(path);
        let converged = solved.report.converged;
        if converged {
            previous = Some((gamma, solved.state.clone()));
        }
        solved_points.push((gamma, solved.energies, v, converged));
    }

    let (g0, e0) = (solved_points[0].0, solved_points[0].1);
    let mut rows = Vec::new();
    for (gamma, e, _, _) in &solved_points {
        let linear_bending = e0.bending * (gamma / g0).powi(2);
        let nonlinear = ((e.bending / linear_bending) - 1.0).abs() > NONLINEAR_THRESHOLD
            || ((e.membrane / e0.membrane) - 1.0).abs() > NONLINEAR_THRESHOLD;
        rows.push(vec![
            *gamma,
            e.membrane,
            e.bending,
            e.coupling,
            analytic::kl_membrane_energy(beta),
            analytic::kl_bending_energy(*gamma, beta, c),
            if nonlinear { 1.0 } else { 0.0 },
        ]);
    }
    let path = outcome.file("sweep_gamma.csv");
    post::write_csv(
        path,
        &["gamma", "membrane", "bending", "coupling", "membrane_kl", "bending_kl", "nonlinear"],
        &rows,
    )?;
    if let Some(boundary) = rows.iter().find(|r| r[6] == 1.0) {
        outcome.summary.insert("nonlinear_onset_gamma".into(), boundary[0]);
    }

    let fit: Vec<_> = solved_points.iter().filter(|p| p.0 <= GAMMA_FIT_MAX * (1.0 + 1e-9)).collect();
    if fit.len() >= 2 {
        let g: Vec<f64> = fit.iter().map(|p| p.0).collect();
        let eb: Vec<f64> = fit.iter().map(|p| p.1.bending).collect();
        let slope = loglog_slope(&g, &eb);
        outcome.summary.insert("bending_slope".into(), slope);
        outcome.checks.push(Check::within("E_b slope vs gamma", slope, 1.95, 2.05));
        let em: Vec<f64> = fit.iter().map(|p| p.1.membrane).collect();
        let (lo, hi) = em.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let flat = (hi - lo) / lo.abs();
        outcome.summary.insert("membrane_variation".into(), flat);
        outcome.checks.push(Check::at_most("E_m variation", flat, 0.02));
    }
    let find = |g: f64| solved_points.iter().find(|p| ((p.0 - g) / g).abs() < 1e-6);
    if let (Some(a), Some(b)) = (find(6.25e-7), find(6.25e-4)) {
        let ma = a.2.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mb = b.2.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        outcome.summary.insert("v_max_increase_percent".into(), 100.0 * (mb - ma) / ma);
    }
    write_manifest(&mut outcome, config)?;
    Ok(outcome)
}

/// Diagnostics of one multi-disclination solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSummary {
    pub curvature_integral: f64,
    pub curvature_abs_integral: f64,
    pub curvature_positive: bool,
    pub curvature_negative: bool,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub w_min: f64,
    pub w_min_radius: f64,
    pub w_max: f64,
}

impl FieldSummary {
    pub fn of(space: &Space, state: &State) -> Self {
        let k = post::gaussian_curvature_field(space, &state.w);
        let (pos, neg) = k.sign_summary(SIGN_TOLERANCE);
        let (smin, smax, _) = post::extremes(&post::radial_stress_samples(space, &state.v));
        let dm = space.dofmap();
        let (mut w_min, mut w_min_radius, mut w_max) = (f64::INFINITY, 0.0, f64::NEG_INFINITY);
        for g in 0..dm.n_total() {
            let w = dm.free_index(g).map_or(0.0, |i| state.w.coeffs()[i]);
            if w < w_min {
                w_min = w;
                w_min_radius = geom::norm(dm.coord(g));
            }
            w_max = w_max.max(w);
        }
        FieldSummary {
            curvature_integral: k.integral,
            curvature_abs_integral: k.abs_integral,
            curvature_positive: pos,
            curvature_negative: neg,
            sigma_min: smin,
            sigma_max: smax,
            w_min,
            w_min_radius,
            w_max,
        }
    }

    pub fn relative_mean_curvature(&self) -> f64 {
        if self.curvature_abs_integral == 0.0 {
            0.0
        } else {
            self.curvature_integral.abs() / self.curvature_abs_integral
        }
    }

    fn sigma_scale(&self) -> f64 {
        self.sigma_min.abs().max(self.sigma_max.abs())
    }
}

/// Writes the field exports of one solution under `stem`.
fn export_fields(outcome: &mut Outcome, config: &RunConfig, space: &Space, stem: &str, state: &State) -> Result<()> {
    let n = config.profile_samples;
    let v = post::extract_profile(space, &state.v, Axis::X, n, false)?;
    let w = post::extract_profile(space, &state.w, Axis::X, n, false)?;
    let path = outcome.file(&format!("{stem}_profiles.csv"));
    post::write_profiles_csv(path, &["v", "w"], &[&v, &w])?;
    let grid = post::stress_grid(space, &state.v, config.grid_samples);
    let path = outcome.file(&format!("{stem}_sigma_rr.csv"));
    post::write_csv(path, &["xi1", "xi2", "sigma_rr"], &grid)?;
    if config.write_vtk {
        let path = outcome.file(&format!("{stem}.vtk"));
        post::write_vtk(path, space, state)?;
    }
    Ok(())
}

fn summary_row(label: &str, e: &EnergyBreakdown, s: &FieldSummary, converged: bool) -> Vec<String> {
    let f = post::fmt_f64;
    vec![
        label.to_string(),
        f(e.membrane),
        f(e.bending),
        f(e.coupling),
        f(s.curvature_integral),
        f(s.curvature_abs_integral),
        f(s.relative_mean_curvature()),
        s.curvature_positive.to_string(),
        s.curvature_negative.to_string(),
        f(s.sigma_min),
        f(s.sigma_max),
        f(s.w_min),
        f(s.w_min_radius),
        f(s.w_max),
        converged.to_string(),
    ]
}

const SUMMARY_HEADER: [&str; 15] = [
    "run",
    "membrane",
    "bending",
    "coupling",
    "curvature_integral",
    "curvature_abs_integral",
    "relative_mean_curvature",
    "curvature_positive",
    "curvature_negative",
    "sigma_rr_min",
    "sigma_rr_max",
    "w_min",
    "w_min_radius",
    "w_max",
    "converged",
];

/// Multi-disclination arrangements at `β = 20`, `γ = 5e−8`, `p = −1`.
pub fn run_disclinations(config: &RunConfig) -> Result<Outcome> {
    let space = config.build_space()?;
    let mut outcome = Outcome::new(ExperimentKind::Disclinations, config, &space);
    create_dir(&config.out)?;
    let beta = config.beta.unwrap_or(20.0);
    let gamma = config.gamma.unwrap_or(5e-8);
    let pressure = config.pressure.unwrap_or(-1.0);
    let variant = config.variants_or(&[Variant::Var])[0];
    let sets: Vec<(String, DisclinationSet)> = match (&config.presets, config.disclinations.is_empty()) {
        (Some(names), _) => names
            .iter()
            .map(|n| (n.clone(), analytic::preset(n).expect("validated preset")))
            .collect(),
        (None, false) => vec![("custom".into(), DisclinationSet::new(config.disclinations.clone())?)],
        (None, true) => analytic::multi_disclination_presets()
            .into_iter()
            .map(|(n, s)| (n.to_string(), s))
            .collect(),
    };

    let mut rows = Vec::new();
    for (name, set) in sets {
        let problem = config
            .problem(beta, gamma, variant)
            .with_load(Load::Uniform(pressure))
            .with_disclinations(set);
        let solved = solve(&space, &problem, None, &config.solver)?;
        outcome.runs.push(solved.record(&name, &problem, &space));
        let s = FieldSummary::of(&space, &solved.state);
        rows.push(summary_row(&name, &solved.energies, &s, solved.report.converged));
        export_fields(&mut outcome, config, &space, &name, &solved.state)?;
        if solved.report.converged {
            outcome.checks.push(Check::at_most(
                format!("{name} mean curvature"),
                s.relative_mean_curvature(),
                MEAN_CURVATURE_GATE,
            ));
        }
        let scale = s.sigma_scale();
        match name.as_str() {
            "four-negative" => {
                outcome.checks.push(Check::new(
                    "four-negative sigma_rr non-negative",
                    s.sigma_min / scale,
                    format!(">= -{SIGN_TOLERANCE}"),
                    s.sigma_min >= -SIGN_TOLERANCE * scale,
                ));
                outcome.checks.push(Check::new(
                    "four-negative deflects downward",
                    s.w_min,
                    "< 0 at an interior point",
                    s.w_min < 0.0 && s.w_min_radius < 1.0 - 1e-9,
                ));
            }
            "four-positive" => outcome.checks.push(Check::new(
                "four-positive sigma_rr non-positive",
                s.sigma_max / scale,
                format!("<= {SIGN_TOLERANCE}"),
                s.sigma_max <= SIGN_TOLERANCE * scale,
            )),
            "flower" => outcome.checks.push(Check::new(
                "flower curvature of both signs",
                s.relative_mean_curvature(),
                "positive and negative regions",
                s.curvature_positive && s.curvature_negative,
            )),
            _ => {}
        }
    }
    let path = outcome.file("summary.csv");
    post::write_csv_text(path, &SUMMARY_HEADER, &rows)?;
    write_manifest(&mut outcome, config)?;
    Ok(outcome)
}

/// A single solve with explicit parameters: `beta` is required; `gamma`
/// and `pressure` default to zero; disclinations come from the explicit
/// list or from the first preset.
pub fn run_custom(config: &RunConfig) -> Result<Outcome> {
    let beta = config
        .beta
        .ok_or_else(|| FvkError::Config("custom runs need beta".into()))?;
    let space = config.build_space()?;
    let mut outcome = Outcome::new(ExperimentKind::Custom, config, &space);
    create_dir(&config.out)?;
    let set = match (&config.presets, config.disclinations.is_empty()) {
        (_, false) => DisclinationSet::new(config.disclinations.clone())?,
        (Some(names), true) => analytic::preset(&names[0]).expect("validated preset"),
        (None, true) => DisclinationSet::empty(),
    };
    let pressure = config.pressure.unwrap_or(0.0);
    let load = if pressure == 0.0 { Load::Zero } else { Load::Uniform(pressure) };
    let mut rows = Vec::new();
    for variant in config.variants_or(&[Variant::Var]) {
        let problem = config
            .problem(beta, config.gamma.unwrap_or(0.0), variant)
            .with_load(load.clone())
            .with_disclinations(set.clone());
        let solved = solve(&space, &problem, None, &config.solver)?;
        outcome.runs.push(solved.record(variant.name(), &problem, &space));
        let s = FieldSummary::of(&space, &solved.state);
        rows.push(summary_row(variant.name(), &solved.energies, &s, solved.report.converged));
        outcome
            .summary
            .insert(format!("{variant}_relative_mean_curvature"), s.relative_mean_curvature());
        export_fields(&mut outcome, config, &space, variant.name(), &solved.state)?;
    }
    let path = outcome.file("summary.csv");
    post::write_csv_text(path, &SUMMARY_HEADER, &rows)?;
    write_manifest(&mut outcome, config)?;
    Ok(outcome)
}
