//! Strict TOML run configuration: every pipeline is driven by one file, all
//! unknown keys are rejected, and numeric ranges are validated at parse
//! time so pipelines can assume a well-formed setup.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use parasol_core::evolution::Scheme;
use parasol_core::grid::{Field, LaplacianKind, SpatialGrid};
use parasol_core::nonlinearity::{Coefficient, Nonlinearity, SpatialProfile, TemporalProfile, Term};
use parasol_core::periodic::{SolveMethod, SolverOptions, SweepDirection};

use crate::CliError;

fn default_seed() -> u64 {
    7
}

/// Parsed and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplacianChoice {
    Stencil,
    Continuum,
}

impl Default for LaplacianChoice {
    fn default() -> Self {
        LaplacianChoice::Stencil
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "GridConfig::default_dim")]
    pub dim: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
    #[serde(default)]
    pub laplacian: LaplacianChoice,
}

impl GridConfig {
    fn default_dim() -> usize {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Saturating coupled oscillation: -2a·u + sin(a·u + b·(1+|x|)^{-s}|cos t|·u).
    Demo,
    /// Pure linear reaction c·u.
    Linear,
    /// Dissipative linear part with a Gaussian periodic source:
    /// -a·u + amplitude·e^{-x²/(2 width²)}·(mean + cos t).
    Forced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_coeff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Picard,
    Anderson,
    NewtonKrylov,
}

impl From<MethodChoice> for SolveMethod {
    fn from(m: MethodChoice) -> Self {
        match m {
            MethodChoice::Picard => SolveMethod::Picard,
            MethodChoice::Anderson => SolveMethod::Anderson,
            MethodChoice::NewtonKrylov => SolveMethod::NewtonKrylov,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    Strang,
    ImexEuler,
}

impl From<SchemeChoice> for Scheme {
    fn from(s: SchemeChoice) -> Self {
        match s {
            SchemeChoice::Strang => Scheme::Strang,
            SchemeChoice::ImexEuler => Scheme::ImexEuler,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: MethodChoice,
    pub tol: f64,
    pub max_iterations: usize,
    pub anderson_window: usize,
    pub steps_per_period: usize,
    pub scheme: SchemeChoice,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: MethodChoice::Anderson,
            tol: 1e-9,
            max_iterations: 400,
            anderson_window: 4,
            steps_per_period: 256,
            scheme: SchemeChoice::Strang,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            method: self.method.into(),
            tol: self.tol,
            max_iterations: self.max_iterations,
            anderson_window: self.anderson_window,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionChoice {
    LargeNorm,
    SmallNorm,
}

impl From<DirectionChoice> for SweepDirection {
    fn from(d: DirectionChoice) -> Self {
        match d {
            DirectionChoice::LargeNorm => SweepDirection::LargeNorm,
            DirectionChoice::SmallNorm => SweepDirection::SmallNorm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeChoice {
    H1Converging,
    L2OnlyConverging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialChoice {
    AtZero,
    AtInfinity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// λ grid, strictly decreasing within (0, 1].
    pub lambdas: Vec<f64>,
    /// Sphere radii for the sampling sweep.
    pub radii: Vec<f64>,
    pub direction: DirectionChoice,
    pub directions_per_radius: usize,
    /// Compact-subset offset for averaging; defaults to t_obs/10.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Observation horizon for averaging; defaults to one period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_obs: Option<f64>,
    pub mode: ModeChoice,
    pub noise_h1: f64,
    /// Time-quadrature resolution for averaged potentials.
    pub quadrature_points: usize,
    /// Radii at which trajectory tail masses are recorded; empty = derived
    /// from the grid (8 radii up to 0.9·half_width).
    pub tail_radii: Vec<f64>,
    /// Trajectory length for the tail experiment, in periods.
    pub periods: usize,
    /// Observation times for the contraction experiment; empty = {T/4, T/2, T}.
    pub contraction_times: Vec<f64>,
    /// Number of low eigenvalues computed per potential.
    pub eigen_count: usize,
    pub eigen_tol: f64,
    /// Which averaged potential the `spectrum` subcommand analyzes.
    pub potential: PotentialChoice,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![1.0],
            radii: vec![0.5, 1.0, 2.0],
            direction: DirectionChoice::LargeNorm,
            directions_per_radius: 16,
            delta: None,
            t_obs: None,
            mode: ModeChoice::H1Converging,
            noise_h1: 0.5,
            quadrature_points: 64,
            tail_radii: Vec::new(),
            periods: 4,
            contraction_times: Vec::new(),
            eigen_count: 6,
            eigen_tol: 1e-9,
            potential: PotentialChoice::AtZero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Zero,
    Bump,
}

/// Initial state: zero, or a Gaussian bump amplitude·e^{-|x|²/(2 width²)}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub width: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            kind: InitialKind::Bump,
            amplitude: 1.0,
            width: 1.0,
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("parse: {e}")))?;
    validate(&config)?;
    Ok(config)
}

/// Emits a configuration as TOML; `parse_config(emit_config(c))` returns a
/// config equal to `c`.
pub fn emit_config(config: &RunConfig) -> Result<String, CliError> {
    toml::to_string_pretty(config).map_err(|e| CliError::Config(format!("emit: {e}")))
}

fn fail(key: &str, message: String) -> CliError {
    CliError::Config(format!("key '{key}': {message}"))
}

fn validate(config: &RunConfig) -> Result<(), CliError> {
    let g = &config.grid;
    if !(1..=3).contains(&g.dim) {
        return Err(fail("grid.dim", format!("must be 1..=3, got {}", g.dim)));
    }
    if !(g.half_width.is_finite() && g.half_width > 0.0) {
        return Err(fail(
            "grid.half_width",
            format!("must be positive, got {}", g.half_width),
        ));
    }
    if g.points_per_axis < 8 {
        return Err(fail(
            "grid.points_per_axis",
            format!("must be at least 8, got {}", g.points_per_axis),
        ));
    }

    let pr = &config.problem;
    let require = |key: &str, v: &Option<f64>| -> Result<f64, CliError> {
        v.ok_or_else(|| fail(key, format!("required for kind '{:?}'", pr.kind)))
    };
    let forbid = |key: &str, v: &Option<f64>| -> Result<(), CliError> {
        if v.is_some() {
            Err(fail(key, format!("not applicable to kind '{:?}'", pr.kind)))
        } else {
            Ok(())
        }
    };
    match pr.kind {
        ProblemKind::Demo => {
            require("problem.a", &pr.a)?;
            require("problem.b_coeff", &pr.b_coeff)?;
            forbid("problem.c", &pr.c)?;
            forbid("problem.amplitude", &pr.amplitude)?;
            forbid("problem.width", &pr.width)?;
            forbid("problem.mean", &pr.mean)?;
        }
        ProblemKind::Linear => {
            require("problem.c", &pr.c)?;
            forbid("problem.a", &pr.a)?;
            forbid("problem.b_coeff", &pr.b_coeff)?;
            forbid("problem.s", &pr.s)?;
            forbid("problem.p", &pr.p)?;
            forbid("problem.amplitude", &pr.amplitude)?;
            forbid("problem.width", &pr.width)?;
            forbid("problem.mean", &pr.mean)?;
        }
        ProblemKind::Forced => {
            require("problem.a", &pr.a)?;
            require("problem.amplitude", &pr.amplitude)?;
            require("problem.width", &pr.width)?;
            forbid("problem.b_coeff", &pr.b_coeff)?;
            forbid("problem.s", &pr.s)?;
            forbid("problem.c", &pr.c)?;
        }
    }

    let s = &config.solver;
    if !(s.tol.is_finite() && s.tol > 0.0) {
        return Err(fail(
            "solver.tol",
            format!("must be positive, got {}", s.tol),
        ));
    }
    if s.max_iterations == 0 {
        return Err(fail("solver.max_iterations", "must be positive".into()));
    }
    if !(2..=5).contains(&s.anderson_window) {
        return Err(fail(
            "solver.anderson_window",
            format!("must lie in 2..=5, got {}", s.anderson_window),
        ));
    }
    if s.steps_per_period == 0 {
        return Err(fail("solver.steps_per_period", "must be positive".into()));
    }

    let e = &config.experiment;
    if e.lambdas.is_empty() {
        return Err(fail("experiment.lambdas", "must be nonempty".into()));
    }
    for l in &e.lambdas {
        if !(l.is_finite() && *l > 0.0 && *l <= 1.0) {
            return Err(fail(
                "experiment.lambdas",
                format!("every value must lie in (0, 1], got {l}"),
            ));
        }
    }
    for pair in e.lambdas.windows(2) {
        if pair[1] >= pair[0] {
            return Err(fail(
                "experiment.lambdas",
                "must be strictly decreasing".into(),
            ));
        }
    }
    for r in e.radii.iter().chain(&e.tail_radii) {
        if !(r.is_finite() && *r > 0.0) {
            return Err(fail(
                "experiment.radii",
                format!("radii must be positive, got {r}"),
            ));
        }
    }
    if let Some(d) = e.delta {
        if !(d.is_finite() && d > 0.0) {
            return Err(fail(
                "experiment.delta",
                format!("must be positive, got {d}"),
            ));
        }
    }
    if let Some(t) = e.t_obs {
        if !(t.is_finite() && t > 0.0) {
            return Err(fail(
                "experiment.t_obs",
                format!("must be positive, got {t}"),
            ));
        }
    }
    if e.directions_per_radius == 0 {
        return Err(fail(
            "experiment.directions_per_radius",
            "must be positive".into(),
        ));
    }
    if e.periods == 0 {
        return Err(fail("experiment.periods", "must be positive".into()));
    }
    if e.eigen_count == 0 {
        return Err(fail("experiment.eigen_count", "must be positive".into()));
    }
    if !(e.eigen_tol.is_finite() && e.eigen_tol > 0.0) {
        return Err(fail(
            "experiment.eigen_tol",
            format!("must be positive, got {}", e.eigen_tol),
        ));
    }
    if !(e.noise_h1.is_finite() && e.noise_h1 >= 0.0) {
        return Err(fail(
            "experiment.noise_h1",
            format!("must be nonnegative, got {}", e.noise_h1),
        ));
    }
    for pair in e.contraction_times.windows(2) {
        if pair[1] <= pair[0] {
            return Err(fail(
                "experiment.contraction_times",
                "must be strictly increasing".into(),
            ));
        }
    }
    if e.contraction_times.first().is_some_and(|t| *t <= 0.0) {
        return Err(fail(
            "experiment.contraction_times",
            "times must be positive".into(),
        ));
    }

    let i = &config.initial;
    if !(i.amplitude.is_finite()) {
        return Err(fail("initial.amplitude", "must be finite".into()));
    }
    if !(i.width.is_finite() && i.width > 0.0) {
        return Err(fail(
            "initial.width",
            format!("must be positive, got {}", i.width),
        ));
    }
    Ok(())
}

impl RunConfig {
    pub fn build_grid(&self) -> Result<Arc<SpatialGrid>, CliError> {
        let kind = match self.grid.laplacian {
            LaplacianChoice::Stencil => LaplacianKind::Stencil,
            LaplacianChoice::Continuum => LaplacianKind::Continuum,
        };
        SpatialGrid::with_laplacian(
            self.grid.dim,
            self.grid.half_width,
            self.grid.points_per_axis,
            kind,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn build_nonlinearity(
        &self,
        grid: &Arc<SpatialGrid>,
    ) -> Result<Arc<Nonlinearity>, CliError> {
        let pr = &self.problem;
        let nl = match pr.kind {
            ProblemKind::Demo => Nonlinearity::demo(
                grid,
                pr.a.unwrap(),
                pr.b_coeff.unwrap(),
                pr.s.unwrap_or(2.0),
                pr.p.unwrap_or(grid.dim() as f64),
            ),
            ProblemKind::Linear => Nonlinearity::linear(grid, pr.c.unwrap()),
            ProblemKind::Forced => {
                let a = pr.a.unwrap();
                let amplitude = pr.amplitude.unwrap();
                let width = pr.width.unwrap();
                let mean = pr.mean.unwrap_or(0.0);
                let mut terms = vec![
                    Term::Linear(Coefficient::constant(-a)),
                    Term::Forcing(Coefficient {
                        amplitude,
                        spatial: SpatialProfile::Gaussian { width },
                        temporal: TemporalProfile::Cos { omega: 1.0 },
                    }),
                ];
                if mean != 0.0 {
                    terms.push(Term::Forcing(Coefficient {
                        amplitude: amplitude * mean,
                        spatial: SpatialProfile::Gaussian { width },
                        temporal: TemporalProfile::Constant,
                    }));
                }
                Nonlinearity::new(
                    grid,
                    2.0 * PI,
                    terms,
                    pr.p.unwrap_or(grid.dim() as f64),
                    1.0,
                )
            }
        };
        nl.map(Arc::new).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn build_initial(&self, grid: &Arc<SpatialGrid>) -> Field {
        match self.initial.kind {
            InitialKind::Zero => grid.zero_field(),
            InitialKind::Bump => {
                let amp = self.initial.amplitude;
                let w = self.initial.width;
                grid.field_from_fn(|x| {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    amp * (-r2 / (2.0 * w * w)).exp()
                })
            }
        }
    }

    /// Tail radii: configured list, or 8 radii spread up to 0.9·half_width.
    pub fn tail_radii(&self) -> Vec<f64> {
        if !self.experiment.tail_radii.is_empty() {
            return self.experiment.tail_radii.clone();
        }
        let top = 0.9 * self.grid.half_width;
        (1..=8).map(|i| top * i as f64 / 8.0).collect()
    }

    /// Contraction observation times: configured list, or {T/4, T/2, T}.
    pub fn contraction_times(&self, period: f64) -> Vec<f64> {
        if !self.experiment.contraction_times.is_empty() {
            return self.experiment.contraction_times.clone();
        }
        vec![period / 4.0, period / 2.0, period]
    }
}
