//! Numerical toolkit for time-periodic solutions of dissipative semilinear
//! parabolic equations
//!
//! ```text
//! u_t = Δu + f(t, x, u),      u(t, x) = 0 on the boundary of (-L, L)^N,
//! ```
//!
//! where f is T-periodic in t. Periodic solutions are located as fixed points
//! of the period map (translation along trajectories) u0 ↦ u(T; u0), and the
//! structural conditions that make such fixed points exist are checked
//! numerically: dissipative contraction, tail decay of orbits, convergence of
//! the fast-oscillation (small λ) family to the time-averaged problem, and
//! eigenvalue counts of the averaged linearizations at zero and at infinity.
//!
//! Module map:
//! - [`grid`]: truncated box with Dirichlet sine basis, fields, transforms, norms.
//! - [`nonlinearity`]: structured reaction terms f(t,x,u), their decomposition
//!   data, and time averaging.
//! - [`evolution`]: exact-semigroup splitting integrators and the period map.
//! - [`spectral`]: eigenvalue counts of -Δ - V for averaged potentials.
//! - [`periodic`]: fixed-point solvers, the averaged stationary problem, and
//!   the λ-continuation sweep.
//! - [`experiments`]: verification harnesses (averaging error, tail bound fit,
//!   contraction ratios, smallness bound, hypothesis checklist).

pub mod error;
pub mod evolution;
pub mod experiments;
pub mod grid;
pub mod nonlinearity;
pub mod periodic;
pub mod spectral;

pub use error::{Error, Result};
pub use evolution::{EvolutionConfig, Integrator, Scheme, Trajectory, TranslationOutcome};
pub use experiments::{
    AveragingReport, CheckStatus, ContractionReport, HypothesisVerdict, InitialDataMode,
    SmallnessBound, TailReport, TheoremKind, Verdict,
};
pub use grid::{Field, LaplacianKind, NormKind, SpatialGrid};
pub use nonlinearity::{AveragedProblem, Nonlinearity};
pub use periodic::{
    AprioriSweepReport, LambdaSweepReport, PeriodMap, PeriodicSolveReport, SolveMethod,
    SolverOptions, StationaryReport, SweepDirection,
};
pub use spectral::{SchrodingerOperator, SpectralReport};
