//! Structured reaction terms f(t, x, u).
//!
//! A nonlinearity is a sum of terms from the template
//!
//! ```text
//! f(t,x,u) = U(t,x) + V(t,x)·u + Σ g(W(t,x)·u),
//! ```
//!
//! where each of U, V, W is a sum of separable coefficients
//! amplitude · ρ(|x|) · τ(t) and g is a bounded Lipschitz outer function with
//! g(0) = 0. Ingesting reactions in this structured form (rather than as
//! opaque callbacks) lets the constructor derive the data the solvers and
//! hypothesis checks need: the dissipativity rate and its spatially decaying
//! perturbation, the slopes at u = 0 and |u| → ∞ with their decaying /
//! non-decaying splits and uniform lower bounds, and whether u ≡ 0 is
//! preserved.
//!
//! The built-in demo problem is
//!
//! ```text
//! f(t,x,u) = -2a·u + sin(a·u + b·(1+|x|)^{-s}·|cos t|·u),
//! ```
//!
//! which is dissipative with rate a and perturbation b·(1+|x|)^{-s}, has slope
//! -2a at infinity, and slope -a + b·(1+|x|)^{-s}·|cos t| at zero.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, SpatialGrid};

/// Radial spatial factor ρ(|x|) of a separable coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialProfile {
    /// ρ ≡ 1 (does not decay; belongs to the L^∞ part of a slope).
    Constant,
    /// ρ(r) = (1 + r)^{-s}; in L^p exactly when s·p > N.
    InversePower { s: f64 },
    /// ρ(r) = exp(-r² / (2 width²)); in every L^p.
    Gaussian { width: f64 },
}

impl SpatialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            SpatialProfile::Constant => 1.0,
            SpatialProfile::InversePower { s } => (1.0 + r).powf(-s),
            SpatialProfile::Gaussian { width } => (-r * r / (2.0 * width * width)).exp(),
        }
    }

    /// Whether the profile decays at infinity (contributes to the L^p part).
    pub fn is_decaying(&self) -> bool {
        !matches!(self, SpatialProfile::Constant)
    }
}

/// Time factor τ(t) of a separable coefficient. All variants take values in
/// [-1, 1]; the amplitude carries the magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalProfile {
    Constant,
    /// |cos t|; kinks at odd multiples of π/2.
    AbsCos,
    /// cos(ω t).
    Cos { omega: f64 },
}

impl TemporalProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TemporalProfile::Constant => 1.0,
            TemporalProfile::AbsCos => t.cos().abs(),
            TemporalProfile::Cos { omega } => (omega * t).cos(),
        }
    }

    /// Closed range of τ over all t.
    fn range(&self) -> (f64, f64) {
        match self {
            TemporalProfile::Constant => (1.0, 1.0),
            TemporalProfile::AbsCos => (0.0, 1.0),
            TemporalProfile::Cos { .. } => (-1.0, 1.0),
        }
    }

    fn is_constant(&self) -> bool {
        matches!(self, TemporalProfile::Constant)
    }
}

/// One separable coefficient amplitude · ρ(|x|) · τ(t).
#[derive(Debug, Clone)]
pub struct Coefficient {
    pub amplitude: f64,
    pub spatial: SpatialProfile,
    pub temporal: TemporalProfile,
}

impl Coefficient {
    pub fn constant(amplitude: f64) -> Self {
        Self {
            amplitude,
            spatial: SpatialProfile::Constant,
            temporal: TemporalProfile::Constant,
        }
    }

    /// Largest value of amplitude · τ(t) over all t.
    fn sup_time_factor(&self) -> f64 {
        let (lo, hi) = self.temporal.range();
        (self.amplitude * lo).max(self.amplitude * hi)
    }

    /// Largest value of |amplitude · τ(t)| over all t.
    fn sup_abs_time_factor(&self) -> f64 {
        let (lo, hi) = self.temporal.range();
        (self.amplitude * lo).abs().max((self.amplitude * hi).abs())
    }
}

/// Bounded Lipschitz outer function g with g(0) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterFunction {
    Sin,
}

impl OuterFunction {
    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            OuterFunction::Sin => y.sin(),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        1.0
    }

    pub fn slope_at_zero(&self) -> f64 {
        1.0
    }
}

/// One term of the reaction template.
#[derive(Debug, Clone)]
pub enum Term {
    /// U(t,x): state-independent forcing.
    Forcing(Coefficient),
    /// V(t,x)·u: linear-in-u term.
    Linear(Coefficient),
    /// g(W(t,x)·u) with W a sum of separable coefficients.
    Outer {
        g: OuterFunction,
        inner: Vec<Coefficient>,
    },
}

/// A coefficient with its spatial profile sampled on the grid.
#[derive(Debug, Clone)]
struct Sampled {
    coeff: Coefficient,
    profile: Arc<Vec<f64>>,
}

impl Sampled {
    #[inline]
    fn factor_at(&self, t: f64) -> f64 {
        self.coeff.amplitude * self.coeff.temporal.eval(t)
    }
}

#[derive(Debug, Clone)]
enum SampledTerm {
    Forcing(Sampled),
    Linear(Sampled),
    Outer { g: OuterFunction, inner: Vec<Sampled> },
}

/// The slope of f in u at zero or at infinity, split into a spatially
/// decaying part (ω₀ / α₀, in L^p) and a non-decaying part whose negative is
/// the coercive limit (ω∞ / α∞).
#[derive(Debug, Clone)]
pub struct SlopeSplit {
    decaying: Vec<Sampled>,
    nondecaying: Vec<Sampled>,
    /// Uniform lower bound of the coercive limit over the grid and one
    /// period: ω̄∞ (resp. ᾱ∞). Derived from samples, never user-asserted.
    lower_bound: f64,
}

impl SlopeSplit {
    /// Decaying slope part (ω₀ or α₀) at time t and grid index idx.
    pub fn decaying_part(&self, t: f64, idx: usize) -> f64 {
        self.decaying
            .iter()
            .map(|s| s.factor_at(t) * s.profile[idx])
            .sum()
    }

    /// Coercive limit (ω∞ or α∞) at time t and grid index idx; the slope is
    /// decaying_part - limit_part.
    pub fn limit_part(&self, t: f64, idx: usize) -> f64 {
        -self
            .nondecaying
            .iter()
            .map(|s| s.factor_at(t) * s.profile[idx])
            .sum::<f64>()
    }

    /// Full slope ω(t,x) = ω₀ - ω∞ (resp. α).
    pub fn total(&self, t: f64, idx: usize) -> f64 {
        self.decaying_part(t, idx) - self.limit_part(t, idx)
    }

    /// ω̄∞ (resp. ᾱ∞): min of the coercive limit over grid and period.
    pub fn limit_lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// True when the decaying part is identically zero.
    pub fn decaying_part_is_zero(&self) -> bool {
        self.decaying.iter().all(|s| s.coeff.amplitude == 0.0)
    }

    /// True when neither part depends on t.
    pub fn is_time_independent(&self) -> bool {
        self.decaying
            .iter()
            .chain(&self.nondecaying)
            .all(|s| s.coeff.temporal.is_constant())
    }

    /// L^p norm of the decaying part at a fixed time, by grid quadrature.
    pub fn decaying_lp_norm(&self, grid: &SpatialGrid, t: f64, p: f64) -> f64 {
        let mut acc = 0.0;
        for idx in 0..grid.len() {
            acc += self.decaying_part(t, idx).abs().powf(p);
        }
        (acc * grid.cell_volume()).powf(1.0 / p)
    }
}

/// A T-periodic reaction term with its derived structural data.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    grid: Arc<SpatialGrid>,
    period: f64,
    terms: Vec<SampledTerm>,
    integrability_exponent: f64,
    hoelder_exponent: f64,
    dissipativity_rate: f64,
    dissipativity_perturbation: Field,
    slope_at_infinity: SlopeSplit,
    slope_at_zero: Option<SlopeSplit>,
    zero_preserving: bool,
    forcing_l2_bound: f64,
    lipschitz_in_u: f64,
}

impl Nonlinearity {
    /// Assembles a reaction from template terms and derives its structural
    /// data.
    ///
    /// # Errors
    /// Rejects nonpositive or non-finite `period`, `p` below the grid
    /// dimension, Hölder exponents outside (0, 1], and inverse-power profiles
    /// with s ≤ N/p (not in L^p).
    pub fn new(
        grid: &Arc<SpatialGrid>,
        period: f64,
        terms: Vec<Term>,
        p: f64,
        hoelder_exponent: f64,
    ) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let n = grid.dim() as f64;
        if !(p.is_finite() && p >= n) {
            return Err(Error::InvalidArgument(format!(
                "integrability exponent p must satisfy p >= N = {n}, got {p}"
            )));
        }
        if !(hoelder_exponent > 0.0 && hoelder_exponent <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Hoelder exponent must lie in (0, 1], got {hoelder_exponent}"
            )));
        }

        let check_profile = |c: &Coefficient| -> Result<()> {
            if !c.amplitude.is_finite() {
                return Err(Error::InvalidArgument("non-finite amplitude".to_string()));
            }
            if let SpatialProfile::InversePower { s } = c.spatial {
                if s * p <= n {
                    return Err(Error::InvalidArgument(format!(
                        "inverse-power profile with s = {s} is not in L^{p} in dimension {n} \
                         (requires s > N/p = {})",
                        n / p
                    )));
                }
            }
            if let SpatialProfile::Gaussian { width } = c.spatial {
                if !(width.is_finite() && width > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "Gaussian profile width must be positive, got {width}"
                    )));
                }
            }
            Ok(())
        };

        let sample = |c: &Coefficient| -> Sampled {
            let profile = Arc::new(
                grid.point_radii()
                    .iter()
                    .map(|r| c.spatial.eval(*r))
                    .collect::<Vec<f64>>(),
            );
            Sampled {
                coeff: c.clone(),
                profile,
            }
        };

        let mut sampled_terms = Vec::with_capacity(terms.len());
        for term in &terms {
            match term {
                Term::Forcing(c) | Term::Linear(c) => check_profile(c)?,
                Term::Outer { inner, .. } => {
                    for c in inner {
                        check_profile(c)?;
                    }
                }
            }
            sampled_terms.push(match term {
                Term::Forcing(c) => SampledTerm::Forcing(sample(c)),
                Term::Linear(c) => SampledTerm::Linear(sample(c)),
                Term::Outer { g, inner } => SampledTerm::Outer {
                    g: *g,
                    inner: inner.iter().map(sample).collect(),
                },
            });
        }

        // Zero preservation: every outer function vanishes at 0, so only
        // forcing terms can break u ≡ 0.
        let zero_preserving = sampled_terms.iter().all(|t| match t {
            SampledTerm::Forcing(s) => s.coeff.amplitude == 0.0,
            _ => true,
        });

        // Slope at infinity: bounded outer terms contribute nothing, so the
        // slope is the sum of the linear coefficients.
        let mut inf_decaying = Vec::new();
        let mut inf_nondecaying = Vec::new();
        for t in &sampled_terms {
            if let SampledTerm::Linear(s) = t {
                if s.coeff.spatial.is_decaying() {
                    inf_decaying.push(s.clone());
                } else {
                    inf_nondecaying.push(s.clone());
                }
            }
        }
        let slope_at_infinity = split_with_bound(grid, period, inf_decaying, inf_nondecaying);

        // Slope at zero: linear coefficients plus g'(0) times the inner
        // coefficients of each outer term. Only meaningful when u ≡ 0 is a
        // solution.
        let slope_at_zero = if zero_preserving {
            let mut dec = Vec::new();
            let mut nondec = Vec::new();
            for t in &sampled_terms {
                match t {
                    SampledTerm::Linear(s) => {
                        if s.coeff.spatial.is_decaying() {
                            dec.push(s.clone());
                        } else {
                            nondec.push(s.clone());
                        }
                    }
                    SampledTerm::Outer { g, inner } => {
                        for s in inner {
                            let mut scaled = s.clone();
                            scaled.coeff.amplitude *= g.slope_at_zero();
                            if scaled.coeff.spatial.is_decaying() {
                                dec.push(scaled);
                            } else {
                                nondec.push(scaled);
                            }
                        }
                    }
                    SampledTerm::Forcing(_) => {}
                }
            }
            Some(split_with_bound(grid, period, dec, nondec))
        } else {
            None
        };

        // Dissipativity data: (f(u)-f(v))(u-v) <= [V + Lip(g)·|W|](u-v)², and
        // the bracket is bounded by -rate + perturbation(x) with the
        // perturbation collecting every spatially decaying contribution.
        let mut rate = 0.0;
        let mut perturbation = vec![0.0; grid.len()];
        let mut lipschitz_in_u = 0.0;
        for t in &sampled_terms {
            match t {
                SampledTerm::Linear(s) => {
                    lipschitz_in_u += s.coeff.sup_abs_time_factor();
                    if s.coeff.spatial.is_decaying() {
                        let cap = s.coeff.sup_time_factor().max(0.0);
                        for (p_out, rho) in perturbation.iter_mut().zip(s.profile.iter()) {
                            *p_out += cap * rho;
                        }
                    } else {
                        rate -= s.coeff.sup_time_factor();
                    }
                }
                SampledTerm::Outer { g, inner } => {
                    for s in inner {
                        let cap = g.lipschitz() * s.coeff.sup_abs_time_factor();
                        lipschitz_in_u += cap;
                        if s.coeff.spatial.is_decaying() {
                            for (p_out, rho) in perturbation.iter_mut().zip(s.profile.iter()) {
                                *p_out += cap * rho;
                            }
                        } else {
                            rate -= cap;
                        }
                    }
                }
                SampledTerm::Forcing(_) => {}
            }
        }
        let dissipativity_perturbation = grid
            .field_from_values(perturbation)
            .expect("perturbation sampled on this grid");

        // sup_t ‖f(t,·,0)‖_{L²}: only forcing terms contribute.
        let forcing_l2_bound = {
            let mut worst = 0.0f64;
            let samples = 65;
            for k in 0..=samples {
                let t = period * k as f64 / samples as f64;
                let mut acc = 0.0;
                for idx in 0..grid.len() {
                    let mut v = 0.0;
                    for term in &sampled_terms {
                        if let SampledTerm::Forcing(s) = term {
                            v += s.factor_at(t) * s.profile[idx];
                        }
                    }
                    acc += v * v;
                }
                worst = worst.max((acc * grid.cell_volume()).sqrt());
            }
            worst
        };

        Ok(Self {
            grid: Arc::clone(grid),
            period,
            terms: sampled_terms,
            integrability_exponent: p,
            hoelder_exponent,
            dissipativity_rate: rate,
            dissipativity_perturbation,
            slope_at_infinity,
            slope_at_zero,
            zero_preserving,
            forcing_l2_bound,
            lipschitz_in_u,
        })
    }

    /// The built-in demo problem
    /// f(t,x,u) = -2a·u + sin(a·u + b·(1+|x|)^{-s}·|cos t|·u) with period 2π.
    ///
    /// The |cos t| factor has fundamental period π; declaring 2π keeps the
    /// period an integer multiple of every term's period while exposing both
    /// π- and 2π-periodicity to the checks. Derived data: dissipativity rate
    /// a with perturbation b·(1+|x|)^{-s}; slope -2a at infinity (coercive
    /// limit 2a); slope -a + b·(1+|x|)^{-s}|cos t| at zero (coercive limit a).
    ///
    /// # Errors
    /// Rejects a ≤ 0, b < 0, p < N, and s ≤ N/p.
    pub fn demo(grid: &Arc<SpatialGrid>, a: f64, b_coeff: f64, s: f64, p: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "demo requires a > 0, got {a}"
            )));
        }
        if !(b_coeff.is_finite() && b_coeff >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "demo requires b_coeff >= 0, got {b_coeff}"
            )));
        }
        let terms = vec![
            Term::Linear(Coefficient::constant(-2.0 * a)),
            Term::Outer {
                g: OuterFunction::Sin,
                inner: vec![
                    Coefficient::constant(a),
                    Coefficient {
                        amplitude: b_coeff,
                        spatial: SpatialProfile::InversePower { s },
                        temporal: TemporalProfile::AbsCos,
                    },
                ],
            },
        ];
        Self::new(grid, 2.0 * PI, terms, p, 1.0)
    }

    /// f = c·u (autonomous, linear). Dissipative with rate -c when c < 0.
    pub fn linear(grid: &Arc<SpatialGrid>, c: f64) -> Result<Self> {
        Self::new(
            grid,
            2.0 * PI,
            vec![Term::Linear(Coefficient::constant(c))],
            grid.dim() as f64,
            1.0,
        )
    }

    /// f ≡ 0.
    pub fn zero(grid: &Arc<SpatialGrid>) -> Result<Self> {
        Self::new(grid, 2.0 * PI, Vec::new(), grid.dim() as f64, 1.0)
    }

    /// Replaces the derived dissipativity data with asserted values, for
    /// checking foreign claims with [`dissipativity_check`].
    pub fn with_asserted_dissipativity(mut self, rate: f64, perturbation: Field) -> Result<Self> {
        if !perturbation.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        self.dissipativity_rate = rate;
        self.dissipativity_perturbation = perturbation;
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn integrability_exponent(&self) -> f64 {
        self.integrability_exponent
    }

    pub fn hoelder_exponent(&self) -> f64 {
        self.hoelder_exponent
    }

    /// Derived dissipativity rate a: (f(u)-f(v))(u-v) ≤ (-a + b(x))(u-v)².
    pub fn dissipativity_rate(&self) -> f64 {
        self.dissipativity_rate
    }

    /// Derived perturbation b(x) ≥ 0 of the dissipativity estimate.
    pub fn dissipativity_perturbation(&self) -> &Field {
        &self.dissipativity_perturbation
    }

    /// True when b(x) vanishes identically (pure contraction regime).
    pub fn perturbation_is_zero(&self) -> bool {
        self.dissipativity_perturbation
            .values()
            .iter()
            .all(|v| *v == 0.0)
    }

    pub fn slope_at_infinity(&self) -> &SlopeSplit {
        &self.slope_at_infinity
    }

    /// Present exactly when f(t,x,0) = 0 for all t, x.
    pub fn slope_at_zero(&self) -> Option<&SlopeSplit> {
        self.slope_at_zero.as_ref()
    }

    pub fn zero_preserving(&self) -> bool {
        self.zero_preserving
    }

    /// sup_t ‖f(t,·,0)‖_{L²} over sampled times (0 for zero-preserving f).
    pub fn forcing_l2_bound(&self) -> f64 {
        self.forcing_l2_bound
    }

    /// Crude global Lipschitz bound of f in u, used for check scales.
    pub fn lipschitz_in_u(&self) -> f64 {
        self.lipschitz_in_u
    }

    /// Point evaluation f(t, x_idx, u).
    pub fn eval(&self, t: f64, idx: usize, u: f64) -> f64 {
        let mut acc = 0.0;
        for term in &self.terms {
            match term {
                SampledTerm::Forcing(s) => acc += s.factor_at(t) * s.profile[idx],
                SampledTerm::Linear(s) => acc += s.factor_at(t) * s.profile[idx] * u,
                SampledTerm::Outer { g, inner } => {
                    let y: f64 = inner.iter().map(|s| s.factor_at(t) * s.profile[idx]).sum();
                    acc += g.eval(y * u);
                }
            }
        }
        acc
    }

    /// Precomputes the time factors at t so grid sweeps evaluate f with one
    /// pass over the profiles.
    pub fn time_slice(&self, t: f64) -> TimeSlice<'_> {
        let mut forcing = Vec::new();
        let mut linear = Vec::new();
        let mut outer = Vec::new();
        for term in &self.terms {
            match term {
                SampledTerm::Forcing(s) => forcing.push((s.factor_at(t), s.profile.as_slice())),
                SampledTerm::Linear(s) => linear.push((s.factor_at(t), s.profile.as_slice())),
                SampledTerm::Outer { g, inner } => outer.push((
                    *g,
                    inner
                        .iter()
                        .map(|s| (s.factor_at(t), s.profile.as_slice()))
                        .collect(),
                )),
            }
        }
        TimeSlice {
            forcing,
            linear,
            outer,
        }
    }
}

/// Time factors of every coefficient frozen at one t; see
/// [`Nonlinearity::time_slice`].
pub struct TimeSlice<'a> {
    forcing: Vec<(f64, &'a [f64])>,
    linear: Vec<(f64, &'a [f64])>,
    outer: Vec<(OuterFunction, Vec<(f64, &'a [f64])>)>,
}

impl TimeSlice<'_> {
    #[inline]
    pub fn eval(&self, idx: usize, u: f64) -> f64 {
        let mut acc = 0.0;
        for (fac, prof) in &self.forcing {
            acc += fac * prof[idx];
        }
        for (fac, prof) in &self.linear {
            acc += fac * prof[idx] * u;
        }
        for (g, inner) in &self.outer {
            let mut y = 0.0;
            for (fac, prof) in inner {
                y += fac * prof[idx];
            }
            acc += g.eval(y * u);
        }
        acc
    }
}

fn split_with_bound(
    grid: &SpatialGrid,
    period: f64,
    decaying: Vec<Sampled>,
    nondecaying: Vec<Sampled>,
) -> SlopeSplit {
    // The temporal profiles reach their extrema on a period-aligned sample
    // set containing the quarter-period points, so a sampled minimum is exact
    // for the supported profiles.
    let time_dependent = nondecaying.iter().any(|s| !s.coeff.temporal.is_constant());
    let t_samples = if time_dependent { 128 } else { 0 };
    let spatially_varying = nondecaying.iter().any(|s| s.coeff.spatial.is_decaying());
    let idx_count = if spatially_varying { grid.len() } else { 1 };

    let mut lower = f64::INFINITY;
    let split = SlopeSplit {
        decaying,
        nondecaying,
        lower_bound: 0.0,
    };
    for k in 0..=t_samples {
        let t = period * k as f64 / t_samples.max(1) as f64;
        for idx in 0..idx_count {
            lower = lower.min(split.limit_part(t, idx));
        }
    }
    SlopeSplit {
        lower_bound: lower,
        ..split
    }
}

/// Result of the sampled dissipativity estimate check.
#[derive(Debug, Clone)]
pub struct DissipativityReport {
    /// max over samples of (f(u)-f(v))(u-v) + a(u-v)² - b(x)(u-v)².
    pub max_violation: f64,
    /// Magnitude scale of the sampled expression, for relative thresholds.
    pub scale: f64,
    pub samples: usize,
}

impl DissipativityReport {
    /// A conforming nonlinearity stays within roundoff of nonpositive.
    pub fn passes(&self, relative_tol: f64) -> bool {
        self.max_violation <= relative_tol * self.scale
    }
}

/// Samples the dissipativity estimate
/// (f(t,x,u) - f(t,x,v))(u - v) ≤ -a(u-v)² + b(x)(u-v)²
/// against the rate and perturbation stored in `nl`.
///
/// # Errors
/// Rejects sample counts below 1000 and empty ranges.
pub fn dissipativity_check(
    nl: &Nonlinearity,
    sample_count: usize,
    u_range: (f64, f64),
    seed: u64,
) -> Result<DissipativityReport> {
    if sample_count < 1000 {
        return Err(Error::InvalidArgument(format!(
            "dissipativity check needs at least 1000 samples, got {sample_count}"
        )));
    }
    if !(u_range.0 < u_range.1) {
        return Err(Error::InvalidArgument(
            "u_range must be a nonempty interval".to_string(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let t_dist = Uniform::new(0.0, nl.period());
    let u_dist = Uniform::new(u_range.0, u_range.1);
    let idx_dist = Uniform::new(0, nl.grid().len());
    let a = nl.dissipativity_rate();
    let b = nl.dissipativity_perturbation().values();

    let span = u_range.1 - u_range.0;
    let scale = (a.abs() + nl.lipschitz_in_u()).max(1.0) * span * span;
    let mut max_violation = f64::NEG_INFINITY;
    for _ in 0..sample_count {
        let t = t_dist.sample(&mut rng);
        let idx = idx_dist.sample(&mut rng);
        let u = u_dist.sample(&mut rng);
        let v = u_dist.sample(&mut rng);
        let du = u - v;
        let lhs = (nl.eval(t, idx, u) - nl.eval(t, idx, v)) * du;
        let violation = lhs + a * du * du - b[idx] * du * du;
        max_violation = max_violation.max(violation);
    }
    Ok(DissipativityReport {
        max_violation,
        scale,
        samples: sample_count,
    })
}

/// Result of the sampled periodicity check.
#[derive(Debug, Clone)]
pub struct PeriodicityReport {
    /// max over samples of |f(t+T, x, u) - f(t, x, u)|.
    pub max_violation: f64,
    /// max over samples of |f(t, x, u)|, for relative thresholds.
    pub scale: f64,
}

impl PeriodicityReport {
    pub fn passes(&self, relative_tol: f64) -> bool {
        self.max_violation <= relative_tol * self.scale.max(1.0)
    }
}

/// Samples |f(t+T,x,u) - f(t,x,u)| over random (t, x, u).
pub fn periodicity_check(
    nl: &Nonlinearity,
    sample_count: usize,
    u_range: (f64, f64),
    seed: u64,
) -> Result<PeriodicityReport> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument(
            "periodicity check needs at least one sample".to_string(),
        ));
    }
    if !(u_range.0 < u_range.1) {
        return Err(Error::InvalidArgument(
            "u_range must be a nonempty interval".to_string(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let t_dist = Uniform::new(0.0, nl.period());
    let u_dist = Uniform::new(u_range.0, u_range.1);
    let idx_dist = Uniform::new(0, nl.grid().len());
    let mut max_violation = 0.0f64;
    let mut scale = 0.0f64;
    for _ in 0..sample_count {
        let t = t_dist.sample(&mut rng);
        let idx = idx_dist.sample(&mut rng);
        let u = u_dist.sample(&mut rng);
        let here = nl.eval(t, idx, u);
        let there = nl.eval(t + nl.period(), idx, u);
        max_violation = max_violation.max((there - here).abs());
        scale = scale.max(here.abs());
    }
    Ok(PeriodicityReport {
        max_violation,
        scale,
    })
}

/// The time-averaged problem: f̂(x,u) = (1/T)∫₀ᵀ f(t,x,u) dt together with
/// the averaged slope potentials.
///
/// Quadrature is composite Simpson over one period with the node count
/// rounded up to a multiple of 4 so the |cos t| kinks at T/4 and 3T/4 land on
/// nodes and full fourth-order accuracy is retained piecewise.
#[derive(Debug, Clone)]
pub struct AveragedProblem {
    nl: Arc<Nonlinearity>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    omega_hat: Field,
    alpha_hat: Option<Field>,
    quadrature_points: usize,
    quadrature_error_estimate: f64,
}

/// Averages `nl` over one period with composite Simpson quadrature.
///
/// The returned problem reports a Richardson-style error estimate: the
/// largest difference between the full-resolution and half-resolution
/// averages of any temporal factor. For integrands smooth in t the estimate
/// at 2n points is at most half the estimate at n points.
///
/// # Errors
/// Rejects `quadrature_points` < 16.
pub fn average_f(nl: &Arc<Nonlinearity>, quadrature_points: usize) -> Result<AveragedProblem> {
    if quadrature_points < 16 {
        return Err(Error::InvalidArgument(format!(
            "averaging needs at least 16 quadrature points, got {quadrature_points}"
        )));
    }
    // Multiple of 4: aligns nodes with the quarter-period kinks and keeps the
    // half-resolution rule (n/2 intervals) a valid Simpson rule.
    let n = quadrature_points.div_ceil(4) * 4;
    let t_of = |k: usize, m: usize| nl.period() * k as f64 / m as f64;
    let (nodes, weights) = simpson_rule(nl.period(), n);

    let avg_with = |profile: &TemporalProfile, m: usize| -> f64 {
        let (nds, wts) = simpson_rule(nl.period(), m);
        nds.iter()
            .zip(&wts)
            .map(|(t, w)| w * profile.eval(*t))
            .sum()
    };

    // Error estimate over every distinct temporal profile in the slopes.
    let mut est = 0.0f64;
    {
        let mut probe = |s: &Sampled| {
            let full = avg_with(&s.coeff.temporal, n);
            let half = avg_with(&s.coeff.temporal, n / 2);
            est = est.max((s.coeff.amplitude * (full - half)).abs());
        };
        let inf = &nl.slope_at_infinity;
        for s in inf.decaying.iter().chain(&inf.nondecaying) {
            probe(s);
        }
        if let Some(zero) = &nl.slope_at_zero {
            for s in zero.decaying.iter().chain(&zero.nondecaying) {
                probe(s);
            }
        }
        let _ = t_of;
    }

    let average_split = |split: &SlopeSplit| -> Field {
        let grid = nl.grid();
        let mut values = vec![0.0; grid.len()];
        for s in split.decaying.iter().chain(&split.nondecaying) {
            let avg = s.coeff.amplitude * avg_with(&s.coeff.temporal, n);
            for (v, rho) in values.iter_mut().zip(s.profile.iter()) {
                *v += avg * rho;
            }
        }
        grid.field_from_values(values)
            .expect("sampled on this grid")
    };

    let omega_hat = average_split(&nl.slope_at_infinity);
    let alpha_hat = nl.slope_at_zero.as_ref().map(average_split);

    Ok(AveragedProblem {
        nl: Arc::clone(nl),
        nodes,
        weights,
        omega_hat,
        alpha_hat,
        quadrature_points: n,
        quadrature_error_estimate: est,
    })
}

fn simpson_rule(period: f64, intervals: usize) -> (Vec<f64>, Vec<f64>) {
    // Composite Simpson with weights (1,4,2,...,4,1)·h/3, normalized by 1/T.
    let h = period / intervals as f64;
    let mut nodes = Vec::with_capacity(intervals + 1);
    let mut weights = Vec::with_capacity(intervals + 1);
    for k in 0..=intervals {
        nodes.push(period * k as f64 / intervals as f64);
        let w = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        weights.push(w * h / (3.0 * period));
    }
    (nodes, weights)
}

impl AveragedProblem {
    pub fn nonlinearity(&self) -> &Arc<Nonlinearity> {
        &self.nl
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        self.nl.grid()
    }

    /// f̂(x_idx, u) by the stored quadrature rule.
    pub fn f_hat(&self, idx: usize, u: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * self.nl.eval(*t, idx, u))
            .sum()
    }

    /// Averaged slope potential at infinity, ω̂(x).
    pub fn omega_hat(&self) -> &Field {
        &self.omega_hat
    }

    /// Averaged slope potential at zero, α̂(x); present iff f preserves 0.
    pub fn alpha_hat(&self) -> Option<&Field> {
        self.alpha_hat.as_ref()
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    /// Richardson-style estimate of the temporal quadrature error.
    pub fn quadrature_error_estimate(&self) -> f64 {
        self.quadrature_error_estimate
    }

    /// Quadrature nodes and weights (weights sum to 1).
    pub fn quadrature(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.weights)
    }
}
