mod common;

use common::*;
use losssense::recession::{induced_cash_additive, recession, RecessionMode};
use losssense::FunctionalSpec;
use proptest::prelude::*;

fn preset(s: &str) -> FunctionalSpec {
    FunctionalSpec::preset(s).unwrap()
}

const STAR: &[&str] = &["entropic:1", "entropic:0.3", "shortfall:exp:2", "es:0.2", "var:0.1", "worstcase", "eu:exp:1", "oce:exp:1"];
const CASH: &[&str] = &["entropic:1", "shortfall:exp:2", "es:0.2", "var:0.1", "worstcase", "oce:oce-remark"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recession_is_positively_homogeneous(x in with_losses(1, 6), l in prop::sample::select(vec![0.5, 2.0, 7.0])) {
        for s in STAR {
            let spec = preset(s);
            let (a, b) = (recession(&spec, &x.scale(l)).unwrap(), recession(&spec, &x).unwrap());
            let (va, vb) = (a.value.to_f64(), l * b.value.to_f64());
            if va == vb {
                continue;
            }
            if a.mode == RecessionMode::Analytic && b.mode == RecessionMode::Analytic {
                prop_assert!(close(va, vb, 1e-12), "{s}: {va} vs {vb}");
            } else {
                prop_assert!((va - vb).abs() <= 1e-6 * vb.abs().max(l), "{s}: {va} vs {vb}");
            }
        }
    }

    #[test]
    fn recession_dominates_the_functional_for_star_shaped_specs(x in position(1, 6)) {
        for s in STAR {
            let spec = preset(s);
            let r = spec.risk(&x).unwrap().to_f64();
            let rec = recession(&spec, &x).unwrap().risk_value(spec.kind()).to_f64();
            prop_assert!(rec >= r - 1e-9 * r.abs().max(1.0), "{s}: R^inf = {rec} < R = {r}");
        }
    }

    #[test]
    fn homogeneous_specs_are_their_own_recession(x in position(1, 6)) {
        for s in ["es:0.2", "var:0.1", "worstcase", "es:1"] {
            let spec = preset(s);
            let rec = recession(&spec, &x).unwrap();
            prop_assert_eq!(rec.mode, RecessionMode::Analytic);
            prop_assert_eq!(rec.value, spec.value(&x).unwrap());
        }
    }

    #[test]
    fn cash_additive_specs_coincide_with_their_induced_functional(x in position(1, 6)) {
        for s in CASH {
            let spec = preset(s);
            let r = spec.risk(&x).unwrap().to_f64();
            let induced = induced_cash_additive(&spec, &x).to_f64();
            prop_assert!((r - induced).abs() <= 1e-6 * r.abs().max(1.0), "{s}: {r} vs {induced}");
        }
    }

    #[test]
    fn induced_recession_matches_recession_of_induced(x in with_losses(1, 6)) {
        // For cash-additive star-shaped specs both sides equal R^inf.
        for s in ["entropic:1", "shortfall:exp:2", "es:0.2"] {
            let spec = preset(s);
            let rec = recession(&spec, &x).unwrap().risk_value(spec.kind()).to_f64();
            let l = 2f64.powi(30);
            let via_induced = induced_cash_additive(&spec, &x.scale(l)).to_f64() / l;
            prop_assert!((rec - via_induced).abs() <= 1e-6 * rec.abs().max(1.0), "{s}: {rec} vs {via_induced}");
        }
    }
}

#[test]
fn entropic_trace_reaches_the_worst_case_by_two_to_the_twenty() {
    let x = losssense::Position::from_atoms(&[(0.5, -1.0), (0.5, 0.0)]).unwrap();
    let est = recession(&preset("entropic:1"), &x).unwrap();
    let at = est.ratio_trace.iter().find(|p| p.lambda == 2f64.powi(20)).map(|p| p.ratio.to_f64());
    let last = est.ratio_trace.last().unwrap();
    let v = at.unwrap_or(last.ratio.to_f64());
    assert!(last.lambda <= 2f64.powi(20) || at.is_some());
    assert!((v - 1.0).abs() < 1e-4, "{v}");
    assert!((est.value.to_f64() - 1.0).abs() < 1e-4);
}
