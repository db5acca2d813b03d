//! Randomized structural properties of the toolkit: norm identities,
//! transform consistency, semigroup algebra, contraction, averaging
//! linearity, and bound monotonicity.

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use parasol_core::evolution::{heat_semigroup, Integrator, Scheme};
use parasol_core::experiments::slope_smallness_bound;
use parasol_core::grid::{Field, LaplacianKind, SpatialGrid};
use parasol_core::nonlinearity::{
    average_f, Coefficient, Nonlinearity, SpatialProfile, TemporalProfile, Term,
};

const M: usize = 64;

fn grid() -> Arc<SpatialGrid> {
    SpatialGrid::with_laplacian(1, 10.0, M, LaplacianKind::Stencil).unwrap()
}

fn field(values: Vec<f64>) -> Field {
    grid().field_from_values(values).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, M)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn l2_norm_satisfies_parseval(vals in values()) {
        let u = field(vals);
        let physical = u.norm_l2();
        let spectral = u
            .sine_coefficients()
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt();
        prop_assert!(
            (physical - spectral).abs() <= 1e-10 * (1.0 + physical),
            "grid norm {physical} vs coefficient norm {spectral}"
        );
    }

    #[test]
    fn tail_mass_is_nonincreasing_in_the_radius(
        vals in values(),
        r1 in 0.0f64..12.0,
        r2 in 0.0f64..12.0,
    ) {
        let u = field(vals);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let t_lo = u.tail_mass(lo).unwrap();
        let t_hi = u.tail_mass(hi).unwrap();
        prop_assert!(t_hi <= t_lo, "tail grew from {t_lo} at {lo} to {t_hi} at {hi}");
        let full = u.tail_mass(0.0).unwrap();
        let norm2 = u.norm_l2().powi(2);
        prop_assert!((full - norm2).abs() <= 1e-12 * (1.0 + norm2));
    }

    #[test]
    fn spectral_and_stencil_laplacians_agree(vals in values()) {
        let u = field(vals);
        let diff = (&u.laplacian() - &u.stencil_laplacian()).norm_l2();
        let scale = 1.0 + u.stencil_laplacian().norm_l2();
        prop_assert!(diff <= 1e-10 * scale, "routes differ by {diff}");
    }

    #[test]
    fn heat_semigroup_composes(vals in values(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let u = field(vals);
        let two_step = heat_semigroup(&heat_semigroup(&u, s).unwrap(), t).unwrap();
        let one_step = heat_semigroup(&u, s + t).unwrap();
        let diff = (&two_step - &one_step).norm_l2();
        prop_assert!(diff <= 1e-11 * (1.0 + u.norm_l2()), "composition broke by {diff}");
    }

    #[test]
    fn heat_semigroup_never_expands_the_l2_norm(vals in values(), t in 0.0f64..5.0) {
        let u = field(vals);
        let before = u.norm_l2();
        let after = heat_semigroup(&u, t).unwrap().norm_l2();
        prop_assert!(after <= before * (1.0 + 1e-12), "norm grew {before} -> {after}");
    }

    #[test]
    fn norms_are_absolutely_homogeneous(vals in values(), alpha in -4.0f64..4.0) {
        let u = field(vals);
        let scaled = u.scaled(alpha);
        for (a, b) in [
            (scaled.norm_l2(), alpha.abs() * u.norm_l2()),
            (scaled.norm_h1(), alpha.abs() * u.norm_h1()),
        ] {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b), "{a} vs {b}");
        }
    }

    #[test]
    fn smallness_bound_is_monotone_in_its_inputs(
        alpha_bar in 0.05f64..8.0,
        factor in 1.01f64..4.0,
        p_scale in 1.0f64..4.0,
        dim in 3usize..=6,
        lhs_scale in 0.0f64..2.0,
    ) {
        let p = p_scale * dim as f64;
        let base = slope_smallness_bound(0.0, alpha_bar, p, dim, None).unwrap();
        let lhs = lhs_scale * base.rhs;
        let bound = slope_smallness_bound(lhs, alpha_bar, p, dim, None).unwrap();
        prop_assert_eq!(bound.holds, lhs < bound.rhs);
        // More coercive limit part: the certificate can only get easier.
        let looser = slope_smallness_bound(lhs, alpha_bar * factor, p, dim, None).unwrap();
        prop_assert!(looser.rhs > bound.rhs);
        if bound.holds {
            prop_assert!(looser.holds);
        }
        // Smaller decaying part: likewise.
        let smaller = slope_smallness_bound(lhs / 2.0, alpha_bar, p, dim, None).unwrap();
        if bound.holds {
            prop_assert!(smaller.holds);
        }
    }

    #[test]
    fn averaged_reaction_is_additive_in_the_terms(
        forcing_amp in -3.0f64..3.0,
        linear_amp in -2.0f64..2.0,
        width in 0.5f64..4.0,
        u in -4.0f64..4.0,
    ) {
        let g = grid();
        let forcing = Term::Forcing(Coefficient {
            amplitude: forcing_amp,
            spatial: SpatialProfile::Gaussian { width },
            temporal: TemporalProfile::Cos { omega: 1.0 },
        });
        let linear = Term::Linear(Coefficient {
            amplitude: linear_amp,
            spatial: SpatialProfile::Constant,
            temporal: TemporalProfile::AbsCos,
        });
        let make = |terms: Vec<Term>| {
            let nl = Arc::new(Nonlinearity::new(&g, 2.0 * PI, terms, 1.0, 1.0).unwrap());
            average_f(&nl, 64).unwrap()
        };
        let only_forcing = make(vec![forcing.clone()]);
        let only_linear = make(vec![linear.clone()]);
        let both = make(vec![forcing, linear]);
        for idx in [0, M / 3, M / 2, M - 1] {
            let sum = only_forcing.f_hat(idx, u) + only_linear.f_hat(idx, u);
            let joint = both.f_hat(idx, u);
            prop_assert!(
                (joint - sum).abs() <= 1e-12 * (1.0 + sum.abs()),
                "averaging was not additive at {idx}: {joint} vs {sum}"
            );
        }
    }

    #[test]
    fn averaged_demo_reaction_preserves_zero(b in 0.0f64..6.0) {
        let g = grid();
        let nl = Arc::new(Nonlinearity::demo(&g, 1.0, b, 2.0, 1.0).unwrap());
        let avg = average_f(&nl, 64).unwrap();
        for idx in [0, M / 4, M / 2] {
            prop_assert!(avg.f_hat(idx, 0.0).abs() <= 1e-14 * (1.0 + b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn physical_and_rescaled_routes_give_the_same_period_map(
        lambda in 0.3f64..1.0,
        amplitude in 0.3f64..2.0,
        width in 1.0f64..3.0,
    ) {
        let g = grid();
        let nl = Arc::new(Nonlinearity::demo(&g, 1.0, 0.8, 2.0, 1.0).unwrap());
        let u0 = g.field_from_fn(|x| {
            amplitude * (-x[0] * x[0] / (2.0 * width * width)).exp()
        });
        let period = nl.period();
        let steps = 192usize;
        let physical = Integrator::physical(&nl, lambda, Scheme::Strang).unwrap();
        let rescaled = Integrator::rescaled(&nl, lambda, Scheme::Strang).unwrap();
        let coarse = physical
            .translate(&u0, 0.0, lambda * period, lambda * period / steps as f64)
            .unwrap()
            .state;
        let fine = physical
            .translate(&u0, 0.0, lambda * period, lambda * period / (2 * steps) as f64)
            .unwrap()
            .state;
        let other_route = rescaled
            .translate(&u0, 0.0, period, period / steps as f64)
            .unwrap()
            .state;
        let discretization = (&coarse - &fine).norm_h1();
        let gap = (&coarse - &other_route).norm_h1();
        prop_assert!(
            gap <= 2.0 * discretization + 1e-11,
            "routes differ by {gap} against a discretization error of {discretization}"
        );
    }

    #[test]
    fn unperturbed_flow_contracts_pairs_of_states(
        vals1 in values(),
        vals2 in values(),
        horizon in 0.5f64..3.0,
    ) {
        let g = grid();
        let nl = Arc::new(Nonlinearity::demo(&g, 1.0, 0.0, 2.0, 1.0).unwrap());
        let u1 = g.field_from_values(vals1).unwrap();
        let u2 = g.field_from_values(vals2).unwrap();
        let before = (&u1 - &u2).norm_l2();
        prop_assume!(before > 1e-8);
        let integrator = Integrator::physical(&nl, 1.0, Scheme::Strang).unwrap();
        let dt = nl.period() / 256.0;
        let f1 = integrator.translate(&u1, 0.0, horizon, dt).unwrap().state;
        let f2 = integrator.translate(&u2, 0.0, horizon, dt).unwrap().state;
        let after = (&f1 - &f2).norm_l2();
        let ratio = after / ((-horizon).exp() * before);
        prop_assert!(ratio <= 1.01, "contraction ratio {ratio} above 1.01");
    }
}
