mod common;

use common::*;
use losssense::functionals::{AlphaProfile, GProfile, LossDoc, UtilityDoc};
use losssense::{FunctionalSpec, Position};
use proptest::prelude::*;

fn preset(s: &str) -> FunctionalSpec {
    FunctionalSpec::preset(s).unwrap()
}

fn risk(spec: &FunctionalSpec, x: &Position) -> f64 {
    spec.risk(x).unwrap().to_f64()
}

const CATALOG: &[&str] = &[
    "var:0.1",
    "es:0.1",
    "es:1",
    "entropic:0.5",
    "worstcase",
    "shortfall:exp:1",
    "eu:exp:1",
    "eu:power-s:0.3,0.5",
    "ce:exp:1",
    "ce:sqrt-s",
    "umean:exp:1",
    "umean:power-s:0.5,0.3",
    "oce:oce-remark",
    "oce:exp:1",
    "oce:linear-gain-quadratic-loss",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn es_dominates_var_and_decreases_in_level(x in position(1, 8), a in 0.001f64..1.0, b in 0.001f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let tol = 1e-12 * x.sup_norm().max(1.0);
        prop_assert!(x.es(lo).unwrap() >= x.es(hi).unwrap() - tol);
        if lo < 1.0 {
            prop_assert!(x.es(lo).unwrap() >= x.var(lo).unwrap() - tol);
        }
    }

    #[test]
    fn var_and_es_are_cash_additive_and_homogeneous(x in position(1, 8), a in 0.001f64..0.999, m in -10f64..10.0, l in 0.01f64..100.0) {
        let tol = 1e-12 * (x.sup_norm() + m.abs()).max(1.0) * l.max(1.0);
        prop_assert!((x.shift(m).var(a).unwrap() - (x.var(a).unwrap() - m)).abs() <= tol);
        prop_assert!((x.shift(m).es(a).unwrap() - (x.es(a).unwrap() - m)).abs() <= tol * 10.0);
        prop_assert!((x.scale(l).var(a).unwrap() - l * x.var(a).unwrap()).abs() <= tol);
        prop_assert!((x.scale(l).es(a).unwrap() - l * x.es(a).unwrap()).abs() <= tol * 10.0);
    }

    #[test]
    fn es_approaches_worst_case_below_the_smallest_atom(x in position(1, 8)) {
        let smallest = x.probs().iter().cloned().fold(1.0, f64::min);
        prop_assert!(close(x.es(smallest / 2.0).unwrap(), x.ess_sup_neg(), 1e-12));
    }

    #[test]
    fn entropic_matches_shortfall_bisection(x in position(1, 8), g in 0.1f64..3.0) {
        let e = risk(&FunctionalSpec::entropic(g).unwrap(), &x);
        let s = risk(&FunctionalSpec::shortfall(LossDoc::Preset { preset: format!("exp:{g}") }).unwrap(), &x);
        prop_assert!(close(e, s, 1e-8), "{e} vs {s}");
    }

    #[test]
    fn adjusted_es_with_zero_profile_is_worst_case(x in position(1, 8)) {
        let g = GProfile::new(0.0, vec![(0.0, 0.0), (1.0, 0.0)]).unwrap();
        let v = risk(&FunctionalSpec::adj_es(g).unwrap(), &x);
        prop_assert!((v - x.ess_sup_neg()).abs() <= 1e-9);
    }

    #[test]
    fn lvar_is_cash_additive_and_star_shaped(x in position(1, 8), m in -5f64..5.0, l in 1.0f64..20.0) {
        let p = AlphaProfile::sampled(|v| 0.01 + v.exp() / 4.0, -10.0, 32, 0.01).unwrap();
        let spec = FunctionalSpec::lvar(p).unwrap();
        let r = risk(&spec, &x);
        prop_assert!(close(risk(&spec, &x.shift(m)), r - m, 1e-12));
        prop_assert!(l * r <= risk(&spec, &x.scale(l)) + 1e-12 * l * x.sup_norm().max(1.0));
    }

    #[test]
    fn ce_and_eu_share_their_sign(x in position(1, 8), u in prop::sample::select(vec!["exp:1", "power-s:0.3,0.5", "sqrt-s", "oce-remark", "linear"])) {
        let eu = FunctionalSpec::expected_utility(UtilityDoc::Preset { preset: u.into() }).unwrap().value(&x).unwrap().to_f64();
        let ce = FunctionalSpec::classical_ce(UtilityDoc::Preset { preset: u.into() }).unwrap().value(&x).unwrap().to_f64();
        prop_assert_eq!(ce >= 0.0, eu >= 0.0, "u={} eu={} ce={}", u, eu, ce);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn es_matches_midpoint_quadrature_of_var(x in lattice_position(), a in prop::sample::select(vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.25, 0.5])) {
        const N: usize = 100_000;
        let h = a / N as f64;
        let integral: f64 = (0..N).map(|j| x.var((j as f64 + 0.5) * h).unwrap()).sum::<f64>() * h / a;
        prop_assert!((integral - x.es(a).unwrap()).abs() <= 1e-6, "{integral} vs {}", x.es(a).unwrap());
    }

    #[test]
    fn oce_is_cash_additive(x in position(1, 6), m in -5f64..5.0, u in prop::sample::select(vec!["oce-remark", "exp:1", "linear-gain-quadratic-loss"])) {
        let spec = FunctionalSpec::oce(UtilityDoc::Preset { preset: u.into() }).unwrap();
        let (a, b) = (spec.value(&x.shift(m)).unwrap().to_f64(), spec.value(&x).unwrap().to_f64());
        prop_assert!((a - (b + m)).abs() <= 1e-6, "{a} vs {}", b + m);
    }

    #[test]
    fn catalog_is_normalized_and_monotone(x in position(1, 6), bumps in prop::collection::vec(0f64..5.0, 8)) {
        for s in CATALOG {
            let spec = preset(s);
            let zero = Position::constant(x.space().clone(), 0.0).unwrap();
            // Root-finding functionals carry the bisection tolerance; closed forms are exact.
            prop_assert!(risk(&spec, &zero).abs() <= 1e-9, "{} at 0", s);
            let y = Position::new(x.space().clone(), x.outcomes().iter().zip(&bumps).map(|(v, b)| v + b).collect()).unwrap();
            let (rx, ry) = (risk(&spec, &x), risk(&spec, &y));
            prop_assert!(ry <= rx + 1e-9 * rx.abs().max(1.0), "{}: r(Y) = {} > r(X) = {}", s, ry, rx);
        }
    }
}

#[test]
fn oce_lies_between_mean_and_expected_utility_on_catalog_utilities() {
    let sampler = losssense::sampling::Sampler::new(42);
    for u in ["oce-remark", "exp:1", "linear-gain-quadratic-loss", "oce-remark:0.3,4"] {
        let oce = FunctionalSpec::oce(UtilityDoc::Preset { preset: u.into() }).unwrap();
        let eu = FunctionalSpec::expected_utility(UtilityDoc::Preset { preset: u.into() }).unwrap();
        for i in 0..200 {
            let x = sampler.raw(i);
            let o = oce.value(&x).unwrap().to_f64();
            assert!(x.expectation() >= o - 1e-8 && o >= eu.value(&x).unwrap().to_f64() - 1e-8, "{u} #{i}");
        }
    }
}
