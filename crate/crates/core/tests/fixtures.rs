use losssense::fixtures::{index, run_all, run_fixture};
use proptest::prelude::*;
use serde_json::json;

#[test]
fn every_fixture_passes_at_defaults() {
    let reports = run_all().unwrap();
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| format!("{}: {}", r.id, r.first_failure.as_deref().unwrap_or(""))).collect();
    assert!(failed.is_empty(), "{failed:#?}");
    assert_eq!(reports.len(), index().len());
}

#[test]
fn reports_are_deterministic() {
    let a = serde_json::to_string(&run_all().unwrap()).unwrap();
    let b = serde_json::to_string(&run_all().unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn headline_values() {
    let r = run_fixture("entropic-sll", &json!(null)).unwrap();
    let c = r.checks.iter().find(|c| c.name == "eu_closed_form").unwrap();
    assert!((c.computed.as_f64().unwrap() - 0.118254).abs() < 1e-6);
    let r = run_fixture("es-insensitive", &json!(null)).unwrap();
    let c = r.checks.iter().find(|c| c.name == "formula_nonpositive").unwrap();
    assert_eq!(c.computed.as_f64().unwrap(), 0.0);
}

#[test]
fn var_boundary_level_still_vanishes() {
    // P(A) = α sits on the quantile boundary; the upper quantile keeps VaR at 0.
    let r = run_fixture("var-insensitive", &json!({"alpha": 0.1, "p_a": 0.1})).unwrap();
    assert!(r.passed, "{:?}", r.first_failure);
}

#[test]
fn es_boundary_n_gives_zero() {
    let r = run_fixture("es-insensitive", &json!({"alpha": 0.2, "p_a": 0.1, "n": 1})).unwrap();
    assert!(r.passed, "{:?}", r.first_failure);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn var_fixture_holds_across_validity_region(alpha in 0.01f64..0.99, frac in 0.01f64..=1.0) {
        let r = run_fixture("var-insensitive", &json!({"alpha": alpha, "p_a": alpha * frac})).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_failure);
    }

    #[test]
    fn es_fixture_holds_across_validity_region(alpha in 0.01f64..0.99, frac in 0.01f64..0.99, extra in 0u32..5) {
        let pa = alpha * frac;
        let n = (pa / (alpha - pa)).ceil().max(1.0) + extra as f64;
        let r = run_fixture("es-insensitive", &json!({"alpha": alpha, "p_a": pa, "n": n})).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_failure);
    }

    #[test]
    fn recession_fixtures_hold(alpha in 0.02f64..0.9, frac in 0.05f64..0.95, pu in 0.01f64..0.24) {
        let r = run_fixture("recession-risk", &json!({"alpha": alpha, "p_a": alpha * frac})).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_failure);
        let r = run_fixture("recession-utility", &json!({"p_a": pu})).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_failure);
    }

    #[test]
    fn entropic_fixture_holds(pa in 0.39f64..0.99) {
        let r = run_fixture("entropic-sll", &json!({"p_a": pa})).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_failure);
    }

    #[test]
    fn probe_fixtures_hold(pl in 0.05f64..0.6, pz in 0.0f64..0.3, loss in 0.2f64..5.0, gain in 0.2f64..5.0, alpha in 0.05f64..0.5, f in 0.05f64..1.0) {
        let r = run_fixture("star-utility-probe", &json!({"p_loss": pl, "p_zero": pz, "loss": loss, "gain": gain})).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_failure);
        let r = run_fixture("var-reduction", &json!({"alpha": alpha, "p_loss": alpha * f})).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_failure);
    }

    #[test]
    fn event_fixtures_hold(pa in 0.05f64..0.95, pw in 0.51f64..0.99) {
        for id in ["induced-fails", "concentration-counter"] {
            let r = run_fixture(id, &json!({"p_a": pa})).unwrap();
            prop_assert!(r.passed, "{id}: {:?}", r.first_failure);
        }
        let r = run_fixture("pure-not-expected", &json!({"p_a": pw})).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_failure);
    }

    #[test]
    fn oce_witnesses_hold(beta in 1.0f64..10.0, shrink in 0.1f64..=1.0, pb in 0.34f64..0.99) {
        let r = run_fixture("oce-witness-a", &json!({"beta": beta, "shrink": shrink})).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_failure);
        let r = run_fixture("oce-witness-b", &json!({"p_b": pb})).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_failure);
    }
}
