//! Fixed points of the period map and the averaged stationary problem.
//!
//! A T-periodic solution of u_t = Δu + f(t,x,u) is exactly a fixed point of
//! the time-T solution map Φ_T (and a λT-periodic solution of the rescaled
//! problem is a fixed point of its time-λT map). This module provides three
//! fixed-point solvers of increasing sophistication:
//!
//! * Picard iteration u ← Φ(u), globally convergent in the strongly
//!   dissipative regime where Φ contracts at rate e^{-aT};
//! * Anderson acceleration (window 2–5), for the weakly contracting regime
//!   where a spatially localized perturbation slows Picard;
//! * Newton–Krylov on F(u) = Φ(u) - u with forward-difference
//!   Jacobian-vector products and restarted GMRES inner solves.
//!
//! It also solves the averaged stationary equation Δu + f̂(x,u) = 0 (long
//!-time integration of the averaged flow followed by a Newton polish) and
//! runs the λ-continuation sweep connecting fixed points of the rescaled
//! maps to the averaged stationary solution as λ → 0.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::evolution::{EvolveSpec, Integrator, Scheme, Trajectory};
use crate::grid::Field;
use crate::nonlinearity::{AveragedProblem, Nonlinearity};

/// Fixed-point solver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Picard,
    Anderson,
    NewtonKrylov,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveMethod::Picard => write!(f, "picard"),
            SolveMethod::Anderson => write!(f, "anderson"),
            SolveMethod::NewtonKrylov => write!(f, "newton-krylov"),
        }
    }
}

/// Options shared by the fixed-point solvers. The tolerance is an absolute
/// H¹ bound on the fixed-point residual ‖Φ(u) - u‖.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub method: SolveMethod,
    pub tol: f64,
    pub max_iterations: usize,
    /// Anderson mixing window; must lie in [2, 5].
    pub anderson_window: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: SolveMethod::Anderson,
            tol: 1e-9,
            max_iterations: 400,
            anderson_window: 4,
        }
    }
}

/// The discretized period map u ↦ u(λT; u) of the rescaled problem
/// u̇ = Δu + f(t/λ, x, u), with a fixed uniform step count per period.
pub struct PeriodMap {
    integrator: Integrator,
    horizon: f64,
    steps: usize,
    lambda: f64,
}

impl PeriodMap {
    /// Period map with `steps_per_period` uniform steps over [0, λT].
    pub fn new(
        nl: &Arc<Nonlinearity>,
        lambda: f64,
        scheme: Scheme,
        steps_per_period: usize,
    ) -> Result<Self> {
        if steps_per_period == 0 {
            return Err(Error::InvalidArgument(
                "steps_per_period must be positive".to_string(),
            ));
        }
        if !(lambda.is_finite() && lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda must lie in (0, 1], got {lambda}"
            )));
        }
        let integrator = Integrator::physical(nl, lambda, scheme)?;
        Ok(Self {
            integrator,
            horizon: lambda * nl.period(),
            steps: steps_per_period,
            lambda,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// One application Φ(u).
    pub fn apply(&self, u: &Field) -> Result<Field> {
        Ok(self
            .integrator
            .translate(u, 0.0, self.horizon, self.dt())?
            .state)
    }

    /// Like `apply`, with the step count scaled by `refine` (for
    /// re-integration checks at dt/2).
    pub fn apply_refined(&self, u: &Field, refine: usize) -> Result<Field> {
        let steps = self.steps * refine.max(1);
        Ok(self
            .integrator
            .translate(u, 0.0, self.horizon, self.horizon / steps as f64)?
            .state)
    }

    /// The orbit of `u` over one period, sampled at `samples` boundaries.
    pub fn orbit(&self, u: &Field, samples: usize, tail_radii: &[f64]) -> Result<Trajectory> {
        let samples = samples.clamp(1, self.steps);
        // Divisor of steps nearest the request, so boundaries align.
        let mut every = self.steps / samples;
        while self.steps % every != 0 {
            every -= 1;
        }
        let spec = EvolveSpec {
            horizon: self.horizon,
            steps: self.steps,
            sample_every: every,
            keep_states: false,
            tail_radii: tail_radii.to_vec(),
        };
        self.integrator.evolve(u, 0.0, &spec)
    }
}

/// Result of one fixed-point solve.
#[derive(Debug, Clone)]
pub struct PeriodicSolveReport {
    pub method: SolveMethod,
    pub solution: Field,
    /// H¹ fixed-point residuals, one per outer iteration (including the
    /// final accepted iterate).
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Picard only: residual grew over 10 consecutive iterations.
    pub divergence_detected: bool,
    /// Geometric decay ratio estimate from the residual history.
    pub contraction_ratio: Option<f64>,
    /// Non-fatal solver failure description (Krylov breakdown, stalled line
    /// search); the caller may fall back to another method.
    pub failure: Option<String>,
    /// The solution's orbit over one period (norm series).
    pub orbit: Trajectory,
}

impl PeriodicSolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}

fn residual_field(map: &PeriodMap, u: &Field) -> Result<(Field, f64)> {
    let phi = map.apply(u)?;
    let r = &phi - u;
    let norm = r.norm_h1();
    Ok((r, norm))
}

fn geometric_ratio(history: &[f64]) -> Option<f64> {
    let mut ratios: Vec<f64> = history
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return None;
    }
    ratios.sort_by(f64::total_cmp);
    Some(ratios[ratios.len() / 2])
}

fn finish(
    map: &PeriodMap,
    method: SolveMethod,
    solution: Field,
    residual_history: Vec<f64>,
    converged: bool,
    divergence_detected: bool,
    failure: Option<String>,
) -> Result<PeriodicSolveReport> {
    let orbit = map.orbit(&solution, 32, &[])?;
    Ok(PeriodicSolveReport {
        method,
        contraction_ratio: geometric_ratio(&residual_history),
        iterations: residual_history.len().saturating_sub(1),
        solution,
        residual_history,
        converged,
        divergence_detected,
        failure,
        orbit,
    })
}

/// Plain Picard iteration u ← Φ(u).
///
/// Divergence (residual growth over 10 consecutive iterations) is reported
/// in the result, not raised as an error.
pub fn picard_solve(
    map: &PeriodMap,
    u0: &Field,
    tol: f64,
    max_iterations: usize,
) -> Result<PeriodicSolveReport> {
    check_tol(tol)?;
    let mut u = u0.clone();
    let mut history = Vec::new();
    let mut growth_streak = 0usize;
    let mut diverged = false;
    for _ in 0..=max_iterations {
        let (r, res) = residual_field(map, &u)?;
        if let Some(prev) = history.last() {
            if res > *prev {
                growth_streak += 1;
            } else {
                growth_streak = 0;
            }
        }
        history.push(res);
        if res <= tol {
            return finish(map, SolveMethod::Picard, u, history, true, false, None);
        }
        if growth_streak >= 10 {
            diverged = true;
            break;
        }
        u = (&u + &r).clone();
    }
    finish(map, SolveMethod::Picard, u, history, false, diverged, None)
}

/// Anderson-accelerated fixed-point iteration with window `window` ∈ [2,5].
pub fn anderson_solve(
    map: &PeriodMap,
    u0: &Field,
    tol: f64,
    max_iterations: usize,
    window: usize,
) -> Result<PeriodicSolveReport> {
    check_tol(tol)?;
    if !(2..=5).contains(&window) {
        return Err(Error::InvalidArgument(format!(
            "Anderson window must lie in [2, 5], got {window}"
        )));
    }
    let grid = u0.grid().clone();
    let n = grid.len();
    let mut u = u0.values().to_vec();
    let mut history = Vec::new();
    let mut prev_f: Option<Vec<f64>> = None;
    let mut prev_g: Option<Vec<f64>> = None;
    let mut df_cols: Vec<Vec<f64>> = Vec::new();
    let mut dg_cols: Vec<Vec<f64>> = Vec::new();

    for _ in 0..=max_iterations {
        let u_field = grid.field_from_values(u.clone())?;
        let g_field = map.apply(&u_field)?;
        let g: Vec<f64> = g_field.values().to_vec();
        let f: Vec<f64> = g.iter().zip(&u).map(|(gi, ui)| gi - ui).collect();
        let res = grid.field_from_values(f.clone())?.norm_h1();
        history.push(res);
        if res <= tol {
            return finish(
                map,
                SolveMethod::Anderson,
                u_field,
                history,
                true,
                false,
                None,
            );
        }
        if !res.is_finite() || res > 1e8 * (history[0] + 1.0) {
            return finish(
                map,
                SolveMethod::Anderson,
                u_field,
                history,
                false,
                true,
                Some("residual blow-up".to_string()),
            );
        }

        if let (Some(pf), Some(pg)) = (&prev_f, &prev_g) {
            df_cols.push(f.iter().zip(pf).map(|(a, b)| a - b).collect());
            dg_cols.push(g.iter().zip(pg).map(|(a, b)| a - b).collect());
            if df_cols.len() > window {
                df_cols.remove(0);
                dg_cols.remove(0);
            }
        }
        prev_f = Some(f.clone());
        prev_g = Some(g.clone());

        // Least-squares mixing: γ = argmin ‖f - ΔF γ‖₂, then
        // u ← g - ΔG γ (undamped type-II update).
        let mut next = g.clone();
        if !df_cols.is_empty() {
            let m = df_cols.len();
            let mut a = DMatrix::<f64>::zeros(n, m);
            for (j, col) in df_cols.iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    a[(i, j)] = *v;
                }
            }
            let b = DVector::<f64>::from_column_slice(&f);
            let svd = a.svd(true, true);
            if let Ok(gamma) = svd.solve(&b, 1e-12) {
                for (j, col) in dg_cols.iter().enumerate() {
                    let gj = gamma[j];
                    for (nv, cv) in next.iter_mut().zip(col) {
                        *nv -= gj * cv;
                    }
                }
            }
        }
        u = next;
    }
    let u_field = grid.field_from_values(u)?;
    finish(
        map,
        SolveMethod::Anderson,
        u_field,
        history,
        false,
        false,
        None,
    )
}

/// Newton–Krylov on F(u) = Φ(u) - u: forward-difference Jacobian-vector
/// products with the step scaled to the iterate norm, restarted GMRES inner
/// solves to relative residual 1e-3, and a halving line search.
pub fn newton_krylov_solve(
    map: &PeriodMap,
    u0: &Field,
    tol: f64,
    max_iterations: usize,
) -> Result<PeriodicSolveReport> {
    check_tol(tol)?;
    let grid = u0.grid().clone();
    let mut u = u0.clone();
    let mut history = Vec::new();
    let mut failure = None;

    for _ in 0..max_iterations {
        let (f_field, res) = residual_field(map, &u)?;
        history.push(res);
        if res <= tol {
            return finish(
                map,
                SolveMethod::NewtonKrylov,
                u,
                history,
                true,
                false,
                None,
            );
        }

        let u_norm = u.norm_l2();
        let f_vals = f_field.values().to_vec();
        let apply_j = |v: &[f64]| -> Result<Vec<f64>> {
            let v_norm = dot(v, v).sqrt();
            if v_norm == 0.0 {
                return Ok(vec![0.0; v.len()]);
            }
            let eps = f64::EPSILON.sqrt() * u_norm.max(1.0) / v_norm;
            let v_field = grid.field_from_values(v.to_vec())?;
            let shifted = u.add_scaled(eps, &v_field)?;
            let phi = map.apply(&shifted)?;
            // F(u + εv) = Φ(u+εv) - (u+εv);   (F(u+εv) - F(u))/ε.
            let out: Vec<f64> = phi
                .values()
                .iter()
                .zip(shifted.values())
                .zip(&f_vals)
                .map(|((p, s), f0)| ((p - s) - f0) / eps)
                .collect();
            Ok(out)
        };
        let rhs: Vec<f64> = f_vals.iter().map(|v| -v).collect();
        let delta = match gmres(apply_j, &rhs, 1e-3, 20, 60) {
            Ok((delta, _achieved)) => delta,
            Err(e) => {
                failure = Some(format!("inner linear solve failed: {e}"));
                break;
            }
        };
        let delta_field = grid.field_from_values(delta)?;

        // Halving line search on the H¹ residual.
        let mut accepted = false;
        let mut step = 1.0;
        for _ in 0..7 {
            let trial = u.add_scaled(step, &delta_field)?;
            let (_, trial_res) = residual_field(map, &trial)?;
            if trial_res < res * (1.0 - 1e-4 * step) {
                u = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            failure = Some("line search stalled".to_string());
            break;
        }
    }
    if history.is_empty() {
        let (_, res) = residual_field(map, &u)?;
        history.push(res);
    }
    let converged = history.last().is_some_and(|r| *r <= tol);
    finish(
        map,
        SolveMethod::NewtonKrylov,
        u,
        history,
        converged,
        false,
        failure,
    )
}

/// Dispatches on `opts.method`.
pub fn solve_periodic(
    map: &PeriodMap,
    u0: &Field,
    opts: &SolverOptions,
) -> Result<PeriodicSolveReport> {
    match opts.method {
        SolveMethod::Picard => picard_solve(map, u0, opts.tol, opts.max_iterations),
        SolveMethod::Anderson => {
            anderson_solve(map, u0, opts.tol, opts.max_iterations, opts.anderson_window)
        }
        SolveMethod::NewtonKrylov => newton_krylov_solve(map, u0, opts.tol, opts.max_iterations),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Restarted GMRES for a matrix-free linear operator, starting from x = 0.
/// Returns the solution and the achieved relative residual.
fn gmres<F>(
    mut apply: F,
    rhs: &[f64],
    rel_tol: f64,
    restart: usize,
    max_applications: usize,
) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = rhs.len();
    let rhs_norm = dot(rhs, rhs).sqrt();
    if rhs_norm == 0.0 {
        return Ok((vec![0.0; n], 0.0));
    }
    let mut x = vec![0.0; n];
    let mut applications = 0usize;
    let mut rel = 1.0;

    'outer: while applications < max_applications {
        // Residual of the current x.
        let r: Vec<f64> = if applications == 0 {
            rhs.to_vec()
        } else {
            let ax = apply(&x)?;
            applications += 1;
            rhs.iter().zip(&ax).map(|(b, a)| b - a).collect()
        };
        let beta = dot(&r, &r).sqrt();
        rel = beta / rhs_norm;
        if rel <= rel_tol {
            return Ok((x, rel));
        }

        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|vi| vi / beta).collect()];
        let m = restart;
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;

        for j in 0..m {
            if applications >= max_applications {
                // Fold what we have into x and stop.
                update_solution(&mut x, &h, &g, &v, j);
                break 'outer;
            }
            let mut w = apply(&v[j])?;
            applications += 1;
            for (i, vi) in v.iter().enumerate().take(j + 1) {
                let hij = dot(&w, vi);
                h[i][j] = hij;
                for (wv, vv) in w.iter_mut().zip(vi) {
                    *wv -= hij * vv;
                }
            }
            let hnorm = dot(&w, &w).sqrt();
            h[j + 1][j] = hnorm;

            // Apply accumulated Givens rotations to the new column.
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = (h[j][j] * h[j][j] + h[j + 1][j] * h[j + 1][j]).sqrt();
            if denom == 0.0 {
                return Err(Error::KrylovBreakdown(
                    "zero Hessenberg column in GMRES".to_string(),
                ));
            }
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];

            rel = g[j + 1].abs() / rhs_norm;
            let happy = hnorm <= 1e-14 * denom.max(1.0);
            if rel <= rel_tol || happy || j + 1 == m {
                update_solution(&mut x, &h, &g, &v, j + 1);
                if rel <= rel_tol || happy {
                    return Ok((x, rel));
                }
                continue 'outer;
            }
            let inv = 1.0 / hnorm;
            v.push(w.iter().map(|wv| wv * inv).collect());
        }
    }
    Ok((x, rel))
}

/// Back-substitutes the triangular Arnoldi system of size `k` and adds the
/// correction V·y into x.
fn update_solution(x: &mut [f64], h: &[Vec<f64>], g: &[f64], v: &[Vec<f64>], k: usize) {
    if k == 0 {
        return;
    }
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for (j, yj) in y.iter().enumerate().skip(i + 1) {
            s -= h[i][j] * yj;
        }
        y[i] = s / h[i][i];
    }
    for (j, yj) in y.iter().enumerate() {
        for (xv, vv) in x.iter_mut().zip(&v[j]) {
            *xv += yj * vv;
        }
    }
}

/// Result of the averaged stationary solve.
#[derive(Debug, Clone)]
pub struct StationaryReport {
    pub solution: Field,
    /// L² norm of Δu + f̂(·,u) at the solution.
    pub residual: f64,
    pub newton_iterations: usize,
    pub converged: bool,
}

/// Elliptic residual G(u) = Δu + f̂(·,u) of the averaged problem.
pub fn averaged_residual(avg: &AveragedProblem, u: &Field) -> Result<Field> {
    let lap = u.laplacian();
    let mut vals = lap.into_values();
    for (idx, v) in vals.iter_mut().enumerate() {
        *v += avg.f_hat(idx, u.values()[idx]);
    }
    avg.grid().field_from_values(vals)
}

/// Solves Δu + f̂(x,u) = 0: integrates the averaged flow from `u0` over
/// `warm_time` to approach the attractor, then polishes with Newton on the
/// elliptic residual (GMRES inner solves preconditioned by (-Δ + σ)^{-1}).
///
/// Convergence means ‖Δu + f̂(·,u)‖_{L²} ≤ tol.
pub fn averaged_stationary_solve(
    avg: &Arc<AveragedProblem>,
    u0: &Field,
    warm_time: f64,
    warm_dt: f64,
    tol: f64,
    max_newton: usize,
) -> Result<StationaryReport> {
    check_tol(tol)?;
    let grid = avg.grid().clone();
    let mut u = if warm_time > 0.0 {
        let integrator = Integrator::averaged(avg, Scheme::Strang)?;
        integrator.translate(u0, 0.0, warm_time, warm_dt)?.state
    } else {
        u0.clone()
    };

    let mut residual = averaged_residual(avg, &u)?.norm_l2();
    let mut iterations = 0usize;
    while residual > tol && iterations < max_newton {
        // Pointwise slope c(x) = ∂_u f̂(x, u(x)) by central differences.
        let c: Vec<f64> = u
            .values()
            .iter()
            .enumerate()
            .map(|(idx, ui)| {
                let h = 1e-6 * (1.0 + ui.abs());
                (avg.f_hat(idx, ui + h) - avg.f_hat(idx, ui - h)) / (2.0 * h)
            })
            .collect();
        let sigma = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let precond: Vec<f64> = grid
            .mode_eigenvalues()
            .iter()
            .map(|mu| 1.0 / (mu + sigma))
            .collect();

        let g_field = averaged_residual(avg, &u)?;
        // Left-preconditioned Newton system: P(Δ + c)δ = -P G.
        let apply = |vals: &[f64]| -> Result<Vec<f64>> {
            let v_field = grid.field_from_values(vals.to_vec())?;
            let mut out = v_field.laplacian().into_values();
            for ((o, v), ci) in out.iter_mut().zip(vals).zip(&c) {
                *o += ci * v;
            }
            grid.apply_spectral_multiplier(&mut out, &precond);
            Ok(out)
        };
        let mut rhs: Vec<f64> = g_field.values().iter().map(|v| -v).collect();
        grid.apply_spectral_multiplier(&mut rhs, &precond);
        let (delta, _) = gmres(apply, &rhs, 1e-6, 40, 200)?;
        let delta_field = grid.field_from_values(delta)?;

        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..8 {
            let trial = u.add_scaled(step, &delta_field)?;
            let trial_res = averaged_residual(avg, &trial)?.norm_l2();
            if trial_res < residual {
                u = trial;
                residual = trial_res;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !improved {
            break;
        }
    }
    Ok(StationaryReport {
        converged: residual <= tol,
        solution: u,
        residual,
        newton_iterations: iterations,
    })
}

/// Result of the λ-continuation sweep.
#[derive(Debug)]
pub struct LambdaSweepReport {
    /// λ values in the order solved (decreasing).
    pub lambdas: Vec<f64>,
    pub solves: Vec<PeriodicSolveReport>,
    /// H¹ distance of each λ-fixed-point to the averaged stationary
    /// solution.
    pub distances: Vec<f64>,
    pub stationary: StationaryReport,
}

/// Solves the fixed point of the rescaled period map for each λ (decreasing,
/// warm-started from the previous solution), solves the averaged stationary
/// problem warm-started from the smallest-λ fixed point, and reports H¹
/// distances to it.
pub fn lambda_sweep(
    nl: &Arc<Nonlinearity>,
    avg: &Arc<AveragedProblem>,
    lambdas: &[f64],
    scheme: Scheme,
    steps_per_period: usize,
    u0: &Field,
    opts: &SolverOptions,
) -> Result<LambdaSweepReport> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".to_string()));
    }
    for pair in lambdas.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::InvalidArgument(
                "lambda grid must be strictly decreasing".to_string(),
            ));
        }
    }
    if !(lambdas[0] <= 1.0 && lambdas[lambdas.len() - 1] > 0.0) {
        return Err(Error::InvalidArgument(
            "lambda grid must lie in (0, 1]".to_string(),
        ));
    }

    let mut solves = Vec::with_capacity(lambdas.len());
    let mut warm = u0.clone();
    for &lambda in lambdas {
        let map = PeriodMap::new(nl, lambda, scheme, steps_per_period)?;
        let mut report = solve_periodic(&map, &warm, opts)?;
        if !report.converged && opts.method != SolveMethod::NewtonKrylov {
            // Newton polish from wherever the primary method stalled.
            let polish = newton_krylov_solve(&map, &report.solution, opts.tol, 30)?;
            if polish.final_residual() < report.final_residual() {
                report = polish;
            }
        }
        warm = report.solution.clone();
        solves.push(report);
    }

    // The averaged stationary solve warm-starts from the smallest-λ fixed
    // point: by continuation it is the closest available approximation.
    let period = nl.period();
    let stationary = averaged_stationary_solve(
        avg,
        &warm,
        4.0 * period,
        period / steps_per_period as f64,
        opts.tol,
        40,
    )?;
    let distances = solves
        .iter()
        .map(|s| (&s.solution - &stationary.solution).norm_h1())
        .collect();
    Ok(LambdaSweepReport {
        lambdas: lambdas.to_vec(),
        solves,
        distances,
        stationary,
    })
}

/// Search direction for the sphere-sampling sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    /// Evidence for an outer a-priori bound: report the largest solution
    /// norm found.
    LargeNorm,
    /// Evidence for an inner bound: report the smallest nonzero solution
    /// norm found.
    SmallNorm,
}

/// Evidence-quality caveat attached to every sphere-sampling report.
pub const SAMPLING_EVIDENCE_LABEL: &str =
    "numerical evidence from finitely many sampled directions; not a proof";

/// Per-radius outcome of the sphere sweep.
#[derive(Debug, Clone)]
pub struct RadiusOutcome {
    pub radius: f64,
    /// H¹ norms of the converged fixed points found from this sphere.
    pub found_norms: Vec<f64>,
    pub failed_runs: usize,
}

/// Result of the sphere-sampling sweep.
#[derive(Debug, Clone)]
pub struct AprioriSweepReport {
    pub direction: SweepDirection,
    pub outcomes: Vec<RadiusOutcome>,
    /// Largest (LargeNorm) or smallest nonzero (SmallNorm) solution norm
    /// found across all spheres; None when nothing qualified.
    pub extreme_norm: Option<f64>,
    /// A found solution realizing a nonzero norm (the largest or smallest
    /// nonzero found), if any.
    pub witness: Option<Field>,
    pub seed: u64,
    pub directions_per_radius: usize,
    /// Always [`SAMPLING_EVIDENCE_LABEL`].
    pub evidence: &'static str,
}

/// Samples `directions_per_radius` random spectral directions on the H¹
/// sphere of each radius, runs the fixed-point solver from each, and
/// aggregates the solution norms. Norms at or below `10·tol` count as the
/// trivial solution.
pub fn apriori_sweep(
    map: &PeriodMap,
    radii: &[f64],
    direction: SweepDirection,
    directions_per_radius: usize,
    opts: &SolverOptions,
    seed: u64,
) -> Result<AprioriSweepReport> {
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidArgument(
            "radii must be positive".to_string(),
        ));
    }
    let grid = map.integrator.grid().clone();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dist = Uniform::new(-1.0, 1.0);
    let zero_threshold = 10.0 * opts.tol;

    let mut outcomes = Vec::with_capacity(radii.len());
    let mut best: Option<(f64, Field)> = None;
    for &radius in radii {
        let mut found = Vec::new();
        let mut failed = 0usize;
        for _ in 0..directions_per_radius {
            // Random spectral direction with a decaying mode profile, scaled
            // to the requested H¹ radius.
            let coeffs: Vec<f64> = grid
                .mode_eigenvalues()
                .iter()
                .map(|mu| dist.sample(&mut rng) / (1.0 + mu))
                .collect();
            let raw = grid.field_from_coefficients(&coeffs)?;
            let start = raw.scaled(radius / raw.norm_h1());
            let report = solve_periodic(map, &start, opts)?;
            if !report.converged {
                failed += 1;
                continue;
            }
            let norm = report.solution.norm_h1();
            found.push(norm);
            if norm > zero_threshold {
                let better = match (&best, direction) {
                    (None, _) => true,
                    (Some((b, _)), SweepDirection::LargeNorm) => norm > *b,
                    (Some((b, _)), SweepDirection::SmallNorm) => norm < *b,
                };
                if better {
                    best = Some((norm, report.solution.clone()));
                }
            }
        }
        found.sort_by(f64::total_cmp);
        outcomes.push(RadiusOutcome {
            radius,
            found_norms: found,
            failed_runs: failed,
        });
    }
    let (extreme_norm, witness) = match best {
        Some((n, f)) => (Some(n), Some(f)),
        None => (None, None),
    };
    Ok(AprioriSweepReport {
        direction,
        outcomes,
        extreme_norm,
        witness,
        seed,
        directions_per_radius,
        evidence: SAMPLING_EVIDENCE_LABEL,
    })
}
