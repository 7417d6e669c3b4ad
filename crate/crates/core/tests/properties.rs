use proptest::prelude::*;

use wavespeed::bounds::{upper_bound, zfk_lower};
use wavespeed::numerics::{bisect, integrate, log_beta, QuadratureSpec};
use wavespeed::variational::{j_functional, trial_galpha, trial_param, TrialFunction};
use wavespeed::{MediaParams, ReactionTerm};

fn media() -> impl Strategy<Value = MediaParams> {
    (0.5f64..3.0, 1.2f64..4.0)
        .prop_filter("gamma >= 0", |(m, p)| m * (p - 1.0) >= 1.0)
        .prop_map(|(m, p)| MediaParams::new(m, p).unwrap())
}

fn reaction() -> impl Strategy<Value = ReactionTerm> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|l| ReactionTerm::scaled_kpp(l).unwrap()),
        (0.2f64..5.0).prop_map(|l| ReactionTerm::sine(l).unwrap()),
        (1.0f64..4.0).prop_map(|s| ReactionTerm::power_kpp(s).unwrap()),
    ]
}

fn trial() -> impl Strategy<Value = TrialFunction> {
    prop_oneof![
        (0.05f64..0.95).prop_map(|a| trial_galpha(a).unwrap()),
        (0.1f64..4.0, 0.01f64..1.0).prop_map(|(a, b)| trial_param(a, b).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reactions_are_positive_and_concave(r in reaction(), u1 in 0.0f64..1.0, u2 in 0.0f64..1.0) {
        let mid = r.f(0.5 * (u1 + u2));
        prop_assert!(mid >= 0.5 * (r.f(u1) + r.f(u2)) - 1e-12);
        let u = 0.5 * (u1 + u2);
        if u > 0.0 && u < 1.0 {
            prop_assert!(r.f(u) > 0.0);
            prop_assert!(r.f(u) <= r.fprime0() * u * (1.0 + 1e-12));
        }
    }

    #[test]
    fn bounds_are_ordered(mp in media(), r in reaction()) {
        let lo = zfk_lower(&mp, &r).unwrap().value;
        let hi = upper_bound(&mp, &r).unwrap().value;
        prop_assert!(lo > 0.0 && lo <= hi);
    }

    #[test]
    fn functional_is_scale_invariant(mp in media(), g in trial(), lambda in -3.0f64..3.0) {
        let r = ReactionTerm::kpp();
        let base = j_functional(&g, &mp, &r).unwrap();
        let scaled = j_functional(&g.scaled(10f64.powf(lambda)), &mp, &r).unwrap();
        prop_assert!((scaled - base).abs() <= 1e-10 * base);
    }

    #[test]
    fn functional_below_upper_bound(mp in media(), r in reaction(), g in trial()) {
        let j = j_functional(&g, &mp, &r).unwrap();
        prop_assert!(j > 0.0);
        prop_assert!(j <= upper_bound(&mp, &r).unwrap().value * (1.0 + 1e-9));
    }

    #[test]
    fn beta_matches_quadrature(x in 0.3f64..4.0, y in 0.3f64..4.0) {
        let spec = QuadratureSpec::default().left_singular(x - 1.0).right_singular(y - 1.0);
        let q = integrate(|t| t.powf(x - 1.0) * (1.0 - t).powf(y - 1.0), 0.0, 1.0, &spec).unwrap();
        prop_assert!((q.value.ln() - log_beta(x, y).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn bisection_finds_threshold(t in 0.01f64..0.99) {
        let x = bisect(|x| x >= t, 0.0, 1.0, 1e-12).unwrap();
        prop_assert!((x - t).abs() <= 1e-12);
    }
}
