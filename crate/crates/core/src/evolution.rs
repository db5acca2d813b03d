//! Time integration of u_t = κΔu + c·f(s·t, x, u).
//!
//! The integrator treats diffusion exactly in the sine basis (the semigroup
//! e^{tΔ} is diagonal there) and the reaction pointwise, composed with either
//! Strang splitting (order 2) or an implicit-diffusion / explicit-reaction
//! Euler step (order 1, used as a cross-check).
//!
//! The (κ, c, s) parametrization covers the three flows the solvers need for
//! a T-periodic reaction f and a scale λ ∈ (0, 1]:
//!
//! * physical:  u̇ = Δu + f(t/λ, x, u), integrated over [0, λT];
//! * rescaled:  v̇ = λΔv + λf(t, x, v), integrated over [0, T];
//! * averaged:  u̇ = Δu + f̂(x, u) for the time-averaged reaction f̂.
//!
//! Substituting v(t) = u(λt) shows the first two time-t maps agree; both are
//! provided so the identity can be verified numerically rather than assumed.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, SpatialGrid};
use crate::nonlinearity::{AveragedProblem, Nonlinearity, TimeSlice};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Half diffusion, one RK4 substep on the pointwise reaction ODE, half
    /// diffusion. Second order in dt; diffusion applied exactly.
    Strang,
    /// u ← (I - κ dt Δ)^{-1}(u + dt·c·f). First order; unconditionally
    /// stable in the stiff diffusion.
    ImexEuler,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Strang => write!(f, "strang"),
            Scheme::ImexEuler => write!(f, "imex-euler"),
        }
    }
}

/// Scheme and nominal step size for translation maps.
#[derive(Debug, Clone, Copy)]
pub struct EvolutionConfig {
    pub scheme: Scheme,
    /// Nominal dt; translation maps shrink it to divide the horizon exactly.
    pub dt: f64,
}

/// The reaction term driving an integrator.
#[derive(Clone)]
pub enum Reaction {
    /// f ≡ 0 (pure heat flow).
    Zero,
    /// A structured time-periodic reaction.
    Direct(Arc<Nonlinearity>),
    /// The time average f̂ of a structured reaction (autonomous).
    Averaged(Arc<AveragedProblem>),
}

enum ReactionSlice<'a> {
    Zero,
    Direct(TimeSlice<'a>),
    Averaged(&'a AveragedProblem),
}

impl ReactionSlice<'_> {
    #[inline]
    fn eval(&self, idx: usize, u: f64) -> f64 {
        match self {
            ReactionSlice::Zero => 0.0,
            ReactionSlice::Direct(slice) => slice.eval(idx, u),
            ReactionSlice::Averaged(avg) => avg.f_hat(idx, u),
        }
    }
}

/// Exact heat semigroup e^{tΔ} u in the grid's sine basis.
///
/// # Errors
/// Rejects negative or non-finite t (the semigroup is not defined backward).
pub fn heat_semigroup(u: &Field, t: f64) -> Result<Field> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "heat semigroup requires t >= 0, got {t}"
        )));
    }
    let grid = u.grid();
    let mult: Vec<f64> = grid
        .mode_eigenvalues()
        .iter()
        .map(|mu| (-t * mu).exp())
        .collect();
    let mut values = u.values().to_vec();
    grid.apply_spectral_multiplier(&mut values, &mult);
    grid.field_from_values(values)
}

/// Result of a translation (time-t solution) map.
#[derive(Debug, Clone)]
pub struct TranslationOutcome {
    pub state: Field,
    /// Step actually used; at most the nominal step.
    pub dt_used: f64,
    pub steps: usize,
    /// True when the nominal dt did not divide the horizon and was shrunk.
    pub dt_adjusted: bool,
}

/// Sampling plan for [`Integrator::evolve`].
#[derive(Debug, Clone)]
pub struct EvolveSpec {
    pub horizon: f64,
    pub steps: usize,
    /// Record every k-th step boundary (t0 is always recorded). Must divide
    /// `steps`.
    pub sample_every: usize,
    /// Keep the sampled fields (norm series are always kept).
    pub keep_states: bool,
    /// Record ∫_{|x|>r} u² at these radii per sample.
    pub tail_radii: Vec<f64>,
}

/// Sampled trajectory of one evolution run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Sampled states; empty unless `keep_states` was set.
    pub states: Vec<Field>,
    pub l2: Vec<f64>,
    pub h1: Vec<f64>,
    /// tails[i][j] = tail mass of sample i at radius j.
    pub tails: Vec<Vec<f64>>,
}

/// Fixed-coefficient integrator for u_t = κΔu + c·f(s·t, x, u).
pub struct Integrator {
    grid: Arc<SpatialGrid>,
    reaction: Reaction,
    scheme: Scheme,
    diffusion: f64,
    reaction_scale: f64,
    time_dilation: f64,
}

impl Integrator {
    fn build(
        grid: &Arc<SpatialGrid>,
        reaction: Reaction,
        scheme: Scheme,
        diffusion: f64,
        reaction_scale: f64,
        time_dilation: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("diffusion", diffusion),
            ("reaction_scale", reaction_scale),
            ("time_dilation", time_dilation),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite {name}: {v}")));
            }
        }
        if diffusion < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "diffusion coefficient must be nonnegative, got {diffusion}"
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            reaction,
            scheme,
            diffusion,
            reaction_scale,
            time_dilation,
        })
    }

    /// u̇ = Δu + f(t/λ, x, u); the period map is `translate` over [0, λT].
    pub fn physical(nl: &Arc<Nonlinearity>, lambda: f64, scheme: Scheme) -> Result<Self> {
        check_lambda(lambda)?;
        Self::build(
            &Arc::clone(nl.grid()),
            Reaction::Direct(Arc::clone(nl)),
            scheme,
            1.0,
            1.0,
            1.0 / lambda,
        )
    }

    /// v̇ = λΔv + λf(t, x, v); the period map is `translate` over [0, T].
    pub fn rescaled(nl: &Arc<Nonlinearity>, lambda: f64, scheme: Scheme) -> Result<Self> {
        check_lambda(lambda)?;
        Self::build(
            &Arc::clone(nl.grid()),
            Reaction::Direct(Arc::clone(nl)),
            scheme,
            lambda,
            lambda,
            1.0,
        )
    }

    /// u̇ = Δu + f̂(x, u) for the averaged reaction.
    pub fn averaged(avg: &Arc<AveragedProblem>, scheme: Scheme) -> Result<Self> {
        Self::build(
            &Arc::clone(avg.grid()),
            Reaction::Averaged(Arc::clone(avg)),
            scheme,
            1.0,
            1.0,
            1.0,
        )
    }

    /// Pure heat flow u̇ = Δu.
    pub fn heat_only(grid: &Arc<SpatialGrid>, scheme: Scheme) -> Result<Self> {
        Self::build(grid, Reaction::Zero, scheme, 1.0, 1.0, 1.0)
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn reaction_slice(&self, t: f64) -> ReactionSlice<'_> {
        match &self.reaction {
            Reaction::Zero => ReactionSlice::Zero,
            Reaction::Direct(nl) => {
                ReactionSlice::Direct(nl.time_slice(self.time_dilation * t))
            }
            Reaction::Averaged(avg) => ReactionSlice::Averaged(avg),
        }
    }

    fn heat_multiplier(&self, t: f64) -> Vec<f64> {
        let kt = self.diffusion * t;
        self.grid
            .mode_eigenvalues()
            .iter()
            .map(|mu| (-kt * mu).exp())
            .collect()
    }

    fn imex_divisor(&self, dt: f64) -> Vec<f64> {
        let kdt = self.diffusion * dt;
        self.grid
            .mode_eigenvalues()
            .iter()
            .map(|mu| 1.0 / (1.0 + kdt * mu))
            .collect()
    }

    /// One classical RK4 substep for the pointwise ODE u' = c·f(s·τ, x, u)
    /// over [t, t+dt], in place.
    fn react_rk4(&self, values: &mut [f64], t: f64, dt: f64) {
        let c = self.reaction_scale;
        let s_begin = self.reaction_slice(t);
        let s_mid = self.reaction_slice(t + 0.5 * dt);
        let s_end = self.reaction_slice(t + dt);
        for (idx, v) in values.iter_mut().enumerate() {
            let u = *v;
            let k1 = c * s_begin.eval(idx, u);
            let k2 = c * s_mid.eval(idx, u + 0.5 * dt * k1);
            let k3 = c * s_mid.eval(idx, u + 0.5 * dt * k2);
            let k4 = c * s_end.eval(idx, u + dt * k3);
            *v = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }

    fn check_finite(&self, values: &[f64], t: f64) -> Result<()> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { t })
        }
    }

    /// One step of the configured scheme from t to t + dt.
    pub fn step(&self, u: &Field, t: f64, dt: f64) -> Result<Field> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {dt}"
            )));
        }
        let mut values = u.values().to_vec();
        match self.scheme {
            Scheme::Strang => {
                let half = self.heat_multiplier(0.5 * dt);
                self.grid.apply_spectral_multiplier(&mut values, &half);
                self.react_rk4(&mut values, t, dt);
                self.grid.apply_spectral_multiplier(&mut values, &half);
            }
            Scheme::ImexEuler => {
                self.imex_step(&mut values, t, dt, &self.imex_divisor(dt));
            }
        }
        self.check_finite(&values, t + dt)?;
        self.grid.field_from_values(values)
    }

    fn imex_step(&self, values: &mut [f64], t: f64, dt: f64, divisor: &[f64]) {
        let c = self.reaction_scale;
        let slice = self.reaction_slice(t);
        for (idx, v) in values.iter_mut().enumerate() {
            *v += dt * c * slice.eval(idx, *v);
        }
        self.grid.apply_spectral_multiplier(values, divisor);
    }

    /// Time-`horizon` solution map starting at time `t0`, with the nominal
    /// step shrunk (never grown) so it divides the horizon exactly.
    pub fn translate(
        &self,
        u0: &Field,
        t0: f64,
        horizon: f64,
        dt_nominal: f64,
    ) -> Result<TranslationOutcome> {
        if !u0.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "translation horizon must be positive, got {horizon}"
            )));
        }
        if !(dt_nominal.is_finite() && dt_nominal > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "nominal dt must be positive, got {dt_nominal}"
            )));
        }
        let steps = (horizon / dt_nominal).ceil().max(1.0) as usize;
        let dt = horizon / steps as f64;
        let spec = EvolveSpec {
            horizon,
            steps,
            sample_every: steps,
            keep_states: true,
            tail_radii: Vec::new(),
        };
        let traj = self.evolve(u0, t0, &spec)?;
        Ok(TranslationOutcome {
            state: traj.states.into_iter().last().expect("final sample"),
            dt_used: dt,
            steps,
            dt_adjusted: (dt - dt_nominal).abs() > f64::EPSILON * dt_nominal,
        })
    }

    /// Integrates from `t0` over `spec.horizon` with `spec.steps` uniform
    /// steps, recording norm series (and optionally states and tail masses)
    /// at t0 and every `sample_every`-th boundary.
    pub fn evolve(&self, u0: &Field, t0: f64, spec: &EvolveSpec) -> Result<Trajectory> {
        if !u0.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        if !(spec.horizon.is_finite() && spec.horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {}",
                spec.horizon
            )));
        }
        if spec.steps == 0 {
            return Err(Error::InvalidArgument("steps must be positive".to_string()));
        }
        if spec.sample_every == 0 || spec.steps % spec.sample_every != 0 {
            return Err(Error::InvalidArgument(format!(
                "sample_every ({}) must divide steps ({})",
                spec.sample_every, spec.steps
            )));
        }
        for r in &spec.tail_radii {
            if !(r.is_finite() && *r >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "tail radius must be nonnegative, got {r}"
                )));
            }
        }
        let dt = spec.horizon / spec.steps as f64;
        let n_samples = spec.steps / spec.sample_every + 1;

        let mut traj = Trajectory {
            times: Vec::with_capacity(n_samples),
            states: Vec::new(),
            l2: Vec::with_capacity(n_samples),
            h1: Vec::with_capacity(n_samples),
            tails: Vec::with_capacity(n_samples),
        };
        let record = |values: &[f64], t: f64, traj: &mut Trajectory| -> Result<()> {
            let field = self.grid.field_from_values(values.to_vec())?;
            traj.times.push(t);
            traj.l2.push(field.norm_l2());
            traj.h1.push(field.norm_h1());
            let mut tails = Vec::with_capacity(spec.tail_radii.len());
            for r in &spec.tail_radii {
                tails.push(field.tail_mass(*r)?);
            }
            traj.tails.push(tails);
            if spec.keep_states {
                traj.states.push(field);
            }
            Ok(())
        };

        let mut values = u0.values().to_vec();
        self.check_finite(&values, t0)?;
        record(&values, t0, &mut traj)?;

        match self.scheme {
            Scheme::Strang => {
                // Fused Strang sweep: adjacent half-heats merge into full
                // heats except across recorded boundaries, where the true
                // composition state is materialized.
                let half = self.heat_multiplier(0.5 * dt);
                let full = self.heat_multiplier(dt);
                self.grid.apply_spectral_multiplier(&mut values, &half);
                for k in 0..spec.steps {
                    let t = t0 + k as f64 * dt;
                    self.react_rk4(&mut values, t, dt);
                    let boundary = k + 1;
                    let t_boundary = t0 + boundary as f64 * dt;
                    let observe = boundary % spec.sample_every == 0;
                    let last = boundary == spec.steps;
                    if last {
                        self.grid.apply_spectral_multiplier(&mut values, &half);
                        self.check_finite(&values, t_boundary)?;
                        record(&values, t_boundary, &mut traj)?;
                    } else if observe {
                        self.grid.apply_spectral_multiplier(&mut values, &half);
                        self.check_finite(&values, t_boundary)?;
                        record(&values, t_boundary, &mut traj)?;
                        self.grid.apply_spectral_multiplier(&mut values, &half);
                    } else {
                        self.grid.apply_spectral_multiplier(&mut values, &full);
                        self.check_finite(&values, t_boundary)?;
                    }
                }
            }
            Scheme::ImexEuler => {
                let divisor = self.imex_divisor(dt);
                for k in 0..spec.steps {
                    let t = t0 + k as f64 * dt;
                    self.imex_step(&mut values, t, dt, &divisor);
                    let boundary = k + 1;
                    let t_boundary = t0 + boundary as f64 * dt;
                    self.check_finite(&values, t_boundary)?;
                    if boundary % spec.sample_every == 0 {
                        record(&values, t_boundary, &mut traj)?;
                    }
                }
            }
        }
        Ok(traj)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use rand::distributions::{Distribution, Uniform};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn grid_1d() -> Arc<SpatialGrid> {
        SpatialGrid::new(1, 12.0, 96).unwrap()
    }

    fn random_field(grid: &Arc<SpatialGrid>, seed: u64, amp: f64) -> Field {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let dist = Uniform::new(-amp, amp);
        let coeffs: Vec<f64> = (0..grid.len())
            .map(|k| dist.sample(&mut rng) / (1.0 + k as f64))
            .collect();
        grid.field_from_coefficients(&coeffs).unwrap()
    }

    fn bump(grid: &Arc<SpatialGrid>) -> Field {
        grid.field_from_fn(|x| {
            let r2: f64 = x.iter().map(|xi| xi * xi).sum();
            1.3 * (-r2 / 4.0).exp()
        })
    }

    #[test]
    fn heat_rejects_negative_time() {
        let g = grid_1d();
        let u = bump(&g);
        assert!(heat_semigroup(&u, -0.1).is_err());
        assert!(heat_semigroup(&u, f64::NAN).is_err());
    }

    #[test]
    fn heat_decays_eigenmode_exactly() {
        let g = grid_1d();
        let phi = g.mode_field(&[3]).unwrap();
        let t = 0.37;
        let decayed = heat_semigroup(&phi, t).unwrap();
        let factor = (-t * g.axis_eigenvalues()[2]).exp();
        for (a, b) in decayed.values().iter().zip(phi.values()) {
            assert!((a - factor * b).abs() < 1e-13);
        }
    }

    #[test]
    fn heat_semigroup_property() {
        let g = grid_1d();
        let u = random_field(&g, 1, 1.0);
        let one = heat_semigroup(&heat_semigroup(&u, 0.2).unwrap(), 0.3).unwrap();
        let two = heat_semigroup(&u, 0.5).unwrap();
        assert!((&one - &two).norm_l2() < 1e-12 * u.norm_l2());
        // t = 0 is the identity.
        let id = heat_semigroup(&u, 0.0).unwrap();
        assert!((&id - &u).norm_l2() < 1e-12 * u.norm_l2());
    }

    #[test]
    fn heat_is_l2_nonexpansive() {
        let g = grid_1d();
        for seed in 0..5 {
            let u = random_field(&g, seed, 2.0);
            let v = heat_semigroup(&u, 0.8).unwrap();
            assert!(v.norm_l2() <= u.norm_l2() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn strang_matches_exact_linear_solution() {
        // f = c·u with constant c commutes with Δ, so the splitting is exact
        // and only the RK4 truncation of e^{c·dt} remains.
        let g = grid_1d();
        let c = -0.8;
        let nl = Arc::new(Nonlinearity::linear(&g, c).unwrap());
        let int = Integrator::physical(&nl, 1.0, Scheme::Strang).unwrap();
        let u0 = bump(&g);
        let t = 1.5;
        let got = int.translate(&u0, 0.0, t, t / 64.0).unwrap();
        let exact = heat_semigroup(&u0, t).unwrap().scaled((c * t).exp());
        let rel = (&got.state - &exact).norm_l2() / exact.norm_l2();
        assert!(rel < 1e-8, "rel = {rel}");
    }

    #[test]
    fn strang_self_convergence_is_second_order() {
        let g = grid_1d();
        let nl = Arc::new(Nonlinearity::demo(&g, 1.0, 0.9, 2.0, 1.0).unwrap());
        let int = Integrator::physical(&nl, 1.0, Scheme::Strang).unwrap();
        let u0 = bump(&g);
        let horizon = PI / 2.0; // |cos t| smooth in the interior
        let sol = |steps: usize| {
            int.translate(&u0, 0.0, horizon, horizon / steps as f64)
                .unwrap()
                .state
        };
        let (s8, s16, s32, s64) = (sol(8), sol(16), sol(32), sol(64));
        let e1 = (&s8 - &s16).norm_l2();
        let e2 = (&s16 - &s32).norm_l2();
        let e3 = (&s32 - &s64).norm_l2();
        let r1 = e1 / e2;
        let r2 = e2 / e3;
        assert!((3.0..5.0).contains(&r1), "r1 = {r1}");
        assert!((3.2..4.8).contains(&r2), "r2 = {r2}");
    }

    #[test]
    fn imex_self_convergence_is_first_order() {
        let g = grid_1d();
        let nl = Arc::new(Nonlinearity::demo(&g, 1.0, 0.9, 2.0, 1.0).unwrap());
        let int = Integrator::physical(&nl, 1.0, Scheme::ImexEuler).unwrap();
        let u0 = bump(&g);
        let horizon = PI / 2.0;
        let sol = |steps: usize| {
            int.translate(&u0, 0.0, horizon, horizon / steps as f64)
                .unwrap()
                .state
        };
        let e1 = (&sol(64) - &sol(128)).norm_l2();
        let e2 = (&sol(128) - &sol(256)).norm_l2();
        let r = e1 / e2;
        assert!((1.7..2.4).contains(&r), "r = {r}");
    }

    #[test]
    fn translate_adjusts_dt_downward() {
        let g = grid_1d();
        let int = Integrator::heat_only(&g, Scheme::Strang).unwrap();
        let u0 = bump(&g);
        let out = int.translate(&u0, 0.0, 1.0, 0.3).unwrap();
        assert_eq!(out.steps, 4);
        assert!((out.dt_used - 0.25).abs() < 1e-15);
        assert!(out.dt_adjusted);
        let out = int.translate(&u0, 0.0, 1.0, 0.25).unwrap();
        assert_eq!(out.steps, 4);
        assert!(!out.dt_adjusted);
        // dt larger than the horizon still takes one full step.
        let out = int.translate(&u0, 0.0, 1.0, 5.0).unwrap();
        assert_eq!(out.steps, 1);
        assert!((out.dt_used - 1.0).abs() < 1e-15);
    }

    #[test]
    fn period_map_contracts_at_dissipativity_rate() {
        // With b = 0 the demo slope lies in [-3a, -a], so the time-t map
        // contracts L² distances by at least e^{-a t}, up to the splitting
        // tolerance.
        let g = grid_1d();
        let a = 1.0;
        let nl = Arc::new(Nonlinearity::demo(&g, a, 0.0, 2.0, 1.0).unwrap());
        let int = Integrator::physical(&nl, 1.0, Scheme::Strang).unwrap();
        let t = 2.0 * PI;
        let dt = t / 256.0;
        for seed in [2, 9] {
            let u0 = random_field(&g, seed, 1.5);
            let v0 = random_field(&g, seed + 100, 1.5);
            let fu = int.translate(&u0, 0.0, t, dt).unwrap().state;
            let fv = int.translate(&v0, 0.0, t, dt).unwrap().state;
            let ratio = (&fu - &fv).norm_l2() / (&u0 - &v0).norm_l2();
            assert!(
                ratio <= (-a * t).exp() * (1.0 + 1e-6),
                "ratio = {ratio}, bound = {}",
                (-a * t).exp()
            );
        }
    }

    #[test]
    fn physical_and_rescaled_routes_agree() {
        let g = grid_1d();
        let nl = Arc::new(Nonlinearity::demo(&g, 1.0, 0.8, 2.0, 1.0).unwrap());
        let lambda = 0.25;
        let t_full = 2.0 * PI;
        let u0 = bump(&g);
        let steps = 64usize;

        let phys = Integrator::physical(&nl, lambda, Scheme::Strang).unwrap();
        let resc = Integrator::rescaled(&nl, lambda, Scheme::Strang).unwrap();
        let horizon_a = lambda * t_full;
        let route = |int: &Integrator, horizon: f64, n: usize| {
            int.translate(&u0, 0.0, horizon, horizon / n as f64)
                .unwrap()
                .state
        };
        let a = route(&phys, horizon_a, steps);
        let b = route(&resc, t_full, steps);
        let a_fine = route(&phys, horizon_a, 2 * steps);
        let b_fine = route(&resc, t_full, 2 * steps);

        let self_a = (&a - &a_fine).norm_l2();
        let self_b = (&b - &b_fine).norm_l2();
        let d_ab = (&a - &b).norm_l2();
        // The two parametrizations are the same flow, so their discrete maps
        // differ by far less than either route's own discretization error.
        assert!(
            d_ab <= 2.0 * (self_a + self_b) + 1e-12,
            "d_ab = {d_ab}, self_a = {self_a}, self_b = {self_b}"
        );
        assert!(d_ab <= 1e-10, "d_ab = {d_ab}");
    }

    #[test]
    fn zero_reaction_reduces_to_heat_semigroup() {
        let g = grid_1d();
        let int = Integrator::heat_only(&g, Scheme::Strang).unwrap();
        let u0 = random_field(&g, 4, 1.0);
        let t = 0.7;
        let via_steps = int.translate(&u0, 0.0, t, t / 16.0).unwrap().state;
        let direct = heat_semigroup(&u0, t).unwrap();
        assert!((&via_steps - &direct).norm_l2() < 1e-12 * direct.norm_l2());
    }

    #[test]
    fn evolve_samples_norm_series() {
        let g = grid_1d();
        let int = Integrator::heat_only(&g, Scheme::Strang).unwrap();
        let u0 = bump(&g);
        let spec = EvolveSpec {
            horizon: 0.8,
            steps: 32,
            sample_every: 8,
            keep_states: true,
            tail_radii: vec![0.0, 6.0],
        };
        let traj = int.evolve(&u0, 0.0, &spec).unwrap();
        assert_eq!(traj.times.len(), 5);
        assert_eq!(traj.states.len(), 5);
        assert_eq!(traj.tails.len(), 5);
        assert!((traj.times[1] - 0.2).abs() < 1e-14);
        // Heat flow decays both norms monotonically.
        for w in traj.l2.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-13));
        }
        for w in traj.h1.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-13));
        }
        // Radius-0 tail is the squared L² norm.
        for (tails, l2) in traj.tails.iter().zip(&traj.l2) {
            assert!((tails[0] - l2 * l2).abs() <= 1e-12 * l2 * l2);
        }
    }

    #[test]
    fn evolve_validates_spec() {
        let g = grid_1d();
        let int = Integrator::heat_only(&g, Scheme::Strang).unwrap();
        let u0 = bump(&g);
        let bad_steps = EvolveSpec {
            horizon: 1.0,
            steps: 0,
            sample_every: 1,
            keep_states: false,
            tail_radii: vec![],
        };
        assert!(int.evolve(&u0, 0.0, &bad_steps).is_err());
        let bad_sampling = EvolveSpec {
            horizon: 1.0,
            steps: 10,
            sample_every: 3,
            keep_states: false,
            tail_radii: vec![],
        };
        assert!(int.evolve(&u0, 0.0, &bad_sampling).is_err());
        let bad_radius = EvolveSpec {
            horizon: 1.0,
            steps: 8,
            sample_every: 4,
            keep_states: false,
            tail_radii: vec![-1.0],
        };
        assert!(int.evolve(&u0, 0.0, &bad_radius).is_err());
    }

    #[test]
    fn runaway_growth_reports_non_finite() {
        let g = grid_1d();
        // Strongly anti-dissipative linear reaction with a huge step
        // overflows the RK4 stages; the integrator must report the failure
        // time instead of propagating NaN.
        let nl = Arc::new(Nonlinearity::linear(&g, 50.0).unwrap());
        let int = Integrator::physical(&nl, 1.0, Scheme::Strang).unwrap();
        let u0 = bump(&g);
        let err = int.translate(&u0, 0.0, 1600.0, 40.0);
        match err {
            Err(Error::NonFinite { t }) => assert!(t > 0.0),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn averaged_flow_matches_time_independent_reaction() {
        // For a time-independent f the averaged reaction is f itself, so the
        // two integrators must agree to roundoff.
        let g = grid_1d();
        let nl = Arc::new(Nonlinearity::linear(&g, -0.6).unwrap());
        let avg = Arc::new(crate::nonlinearity::average_f(&nl, 16).unwrap());
        let direct = Integrator::physical(&nl, 1.0, Scheme::Strang).unwrap();
        let averaged = Integrator::averaged(&avg, Scheme::Strang).unwrap();
        let u0 = bump(&g);
        let a = direct.translate(&u0, 0.0, 1.0, 0.05).unwrap().state;
        let b = averaged.translate(&u0, 0.0, 1.0, 0.05).unwrap().state;
        assert!((&a - &b).norm_l2() <= 1e-12 * a.norm_l2());
    }
}
