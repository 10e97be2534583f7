use losssense::functionals::{AlphaProfile, GProfile, UtilityDoc};
use losssense::sensitivity::{localized_battery, sll_certify, sll_position, CertifyConfig, Method, PositionVerdict, Status, Witness};
use losssense::{DomainSpec, FunctionalSpec, Position};
use serde_json::json;

fn cfg() -> CertifyConfig {
    CertifyConfig { seed: 42, trials: 40, ..Default::default() }
}

fn status(spec: &FunctionalSpec, d: DomainSpec) -> Status {
    sll_certify(spec, &d, &cfg()).unwrap().status
}

fn preset(s: &str) -> FunctionalSpec {
    FunctionalSpec::preset(s).unwrap()
}

#[test]
fn var_battery() {
    let b = localized_battery(&preset("var:0.05"), &cfg()).unwrap();
    let st: Vec<_> = b.verdicts.iter().map(|v| (v.domain.clone(), v.status, v.certified)).collect();
    assert_eq!(b.get("sure").unwrap().status, Status::Sensitive, "{st:?}");
    for d in ["pure", "expected", "full"] {
        let v = b.get(d).unwrap();
        assert_eq!(v.status, Status::Insensitive, "{d}");
        assert!(v.certified);
    }
    let w = b.get("pure").unwrap().witness_position.clone().unwrap();
    assert_eq!(w.outcomes(), &[-1.0, 0.0]);
    assert!(b.ordering_consistent);
}

#[test]
fn es_battery() {
    let b = localized_battery(&preset("es:0.05"), &cfg()).unwrap();
    for d in ["sure", "pure", "expected"] {
        let v = b.get(d).unwrap();
        assert_eq!((v.status, v.method), (Status::Sensitive, Method::StrictExpectationBound), "{d}");
    }
    let full = b.get("full").unwrap();
    assert_eq!(full.status, Status::Insensitive);
    assert_eq!(full.witness_position.as_ref().unwrap().outcomes(), &[-1.0, 1.0]);
}

#[test]
fn worst_case_and_entropic_are_sensitive_everywhere() {
    for s in ["worstcase", "entropic:1"] {
        let b = localized_battery(&preset(s), &cfg()).unwrap();
        assert!(b.verdicts.iter().all(|v| v.status == Status::Sensitive), "{s}");
    }
    assert_eq!(sll_certify(&preset("entropic:1"), &DomainSpec::Full, &cfg()).unwrap().method, Method::TailRatio);
}

#[test]
fn power_s_tail_ratio_agrees_across_certainty_equivalents() {
    for (a, b, want) in [(0.3, 0.5, Status::Sensitive), (0.5, 0.5, Status::Insensitive), (0.5, 0.3, Status::Insensitive)] {
        for head in ["eu", "ce", "umean"] {
            let spec = preset(&format!("{head}:power-s:{a},{b}"));
            assert_eq!(status(&spec, DomainSpec::Full), want, "{head} {a} {b}");
        }
    }
}

#[test]
fn oce_remark_separates_oce_from_expected_utility() {
    let v = sll_certify(&preset("oce:oce-remark"), &DomainSpec::Full, &cfg()).unwrap();
    assert_eq!(v.status, Status::Insensitive);
    assert!(v.certified);
    match v.witness {
        Some(Witness::Counterexample { lambdas, values, .. }) => {
            assert_eq!(lambdas[0], 1.0);
            assert!(values.iter().all(|x| x.to_f64() >= 0.0));
        }
        w => panic!("{w:?}"),
    }
    assert_eq!(status(&preset("eu:oce-remark"), DomainSpec::Full), Status::Sensitive);
    let b = FunctionalSpec::oce(UtilityDoc::Preset { preset: "linear-gain-quadratic-loss".into() }).unwrap();
    assert_eq!(status(&b, DomainSpec::Full), Status::Insensitive);
}

#[test]
fn lvar_dichotomy() {
    let sensitive = AlphaProfile::sampled(|l| l.exp() / 2.0, -20.0, 64, 0.0).unwrap();
    assert_eq!(status(&FunctionalSpec::lvar(sensitive).unwrap(), DomainSpec::Full), Status::Sensitive);
    let flat = AlphaProfile::sampled(|l| 0.02 + l.exp() / 4.0, -20.0, 64, 0.02).unwrap();
    let v = sll_certify(&FunctionalSpec::lvar(flat).unwrap(), &DomainSpec::Full, &cfg()).unwrap();
    assert_eq!(v.status, Status::Insensitive);
    let w = v.witness_position.unwrap();
    assert_eq!(w.probs()[0], 0.01);
    assert_eq!(w.outcomes(), &[-1.0, 0.0]);
}

#[test]
fn adjusted_es_with_infinite_prefix_is_insensitive() {
    let g = GProfile::new(0.2, vec![(0.2, 1.0), (1.0, 0.0)]).unwrap();
    let v = sll_certify(&FunctionalSpec::adj_es(g).unwrap(), &DomainSpec::Full, &cfg()).unwrap();
    assert_eq!(v.status, Status::Insensitive);
    let g = GProfile::new(0.0, vec![(0.0, 3.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
    assert_eq!(status(&FunctionalSpec::adj_es(g).unwrap(), DomainSpec::Full), Status::Sensitive);
}

#[test]
fn negation_mirrors_verdicts() {
    for s in ["var:0.1", "es:0.2", "entropic:0.5", "worstcase"] {
        let spec = preset(s);
        let b1 = localized_battery(&spec, &cfg()).unwrap();
        let b2 = localized_battery(&spec.negated(), &cfg()).unwrap();
        for (v1, v2) in b1.verdicts.iter().zip(&b2.verdicts) {
            assert_eq!((v1.status, v1.method, v1.certified), (v2.status, v2.method, v2.certified), "{s} {}", v1.domain);
        }
    }
}

#[test]
fn catalog_counterexamples() {
    // The capital-floor functional is cash-additive but not star-shaped: its hint ray is
    // acceptable from λ = 1 on.
    let spec = FunctionalSpec::custom("min-worst-case-var", json!({})).unwrap();
    let v = sll_certify(&spec, &DomainSpec::Full, &cfg()).unwrap();
    assert_eq!(v.status, Status::Insensitive);
    let spec = FunctionalSpec::custom("max-loss-mean", json!({})).unwrap();
    assert_eq!(status(&spec, DomainSpec::Full), Status::Insensitive);
    let spec = FunctionalSpec::custom("event-weighted-mean", json!({})).unwrap();
    assert_eq!(status(&spec, DomainSpec::ExpectedLosses), Status::Insensitive);
    assert_eq!(status(&spec, DomainSpec::PureLosses), Status::Sensitive);
}

#[test]
fn single_rays() {
    let x = Position::from_atoms(&[(0.5, -1.0), (0.5, 2.0)]).unwrap();
    match sll_position(&preset("entropic:1"), &x, 40).unwrap() {
        PositionVerdict::CertifiedSensitive { lambda, .. } => assert!(lambda.is_finite()),
        v => panic!("{v:?}"),
    }
    let x = Position::from_atoms(&[(0.05, -1.0), (0.95, 1.0)]).unwrap();
    assert!(matches!(sll_position(&preset("es:0.1"), &x, 40).unwrap(), PositionVerdict::CertifiedInsensitive { .. }));
}

mod invariants {
    use super::*;
    use losssense::recession::recession;
    use losssense::sampling::Sampler;
    use losssense::sensitivity::{loss_concentration_check, ConcentrationResult};
    use losssense::EventMask;

    const SPECS: &[&str] = &[
        "var:0.05",
        "es:0.05",
        "es:1",
        "entropic:1",
        "worstcase",
        "shortfall:exp:1",
        "eu:exp:1",
        "eu:sqrt-s",
        "ce:power-s:0.3,0.5",
        "umean:power-s:0.5,0.3",
        "oce:oce-remark",
        "oce:linear-gain-quadratic-loss",
        "custom:event-weighted-mean",
    ];

    #[test]
    fn certified_verdicts_respect_the_domain_ordering() {
        for s in SPECS {
            let b = localized_battery(&preset(s), &cfg()).unwrap();
            assert!(b.ordering_consistent, "{s}");
            let sens = |d: &str| {
                let v = b.get(d).unwrap();
                v.certified && v.status == Status::Sensitive
            };
            if sens("expected") {
                assert!(b.get("pure").unwrap().status == Status::Sensitive, "{s}");
            }
            if sens("pure") {
                assert!(b.get("sure").unwrap().status == Status::Sensitive, "{s}");
            }
        }
    }

    #[test]
    fn expected_loss_sensitivity_implies_concentration_sensitivity() {
        let sampler = Sampler::new(42);
        for s in SPECS {
            let spec = preset(s);
            if spec.fixed_space().is_some() {
                continue;
            }
            let v = sll_certify(&spec, &DomainSpec::ExpectedLosses, &cfg()).unwrap();
            if !(v.certified && v.status == Status::Sensitive) {
                continue;
            }
            for i in 0..50 {
                let x = sampler.raw(i);
                let a = EventMask::from_indices(x.space(), &[(i as usize) % x.len()]).unwrap();
                let r = loss_concentration_check(&spec, &x, &a, &cfg()).unwrap();
                assert!(matches!(r, ConcentrationResult::ConcentrationSensitive { .. }), "{s} #{i}: {r:?}");
            }
        }
    }

    #[test]
    fn concentration_sensitivity_on_indicators_implies_pure_loss_sensitivity() {
        let sampler = Sampler::new(7);
        for s in SPECS {
            let spec = preset(s);
            if spec.fixed_space().is_some() {
                continue;
            }
            let all_conc = (0..20).all(|i| {
                let space = sampler.raw(i).space().clone();
                let zero = Position::constant(space.clone(), 0.0).unwrap();
                let a = EventMask::from_indices(&space, &[0]).unwrap();
                matches!(loss_concentration_check(&spec, &zero, &a, &cfg()).unwrap(), ConcentrationResult::ConcentrationSensitive { .. })
            });
            if !all_conc {
                continue;
            }
            for i in 0..50 {
                let x = sampler.sample(i, &DomainSpec::PureLosses).unwrap();
                let v = sll_position(&spec, &x, 40).unwrap();
                let large = spec.risk(&x.scale(2f64.powi(40))).unwrap();
                assert!(
                    matches!(v, PositionVerdict::CertifiedSensitive { .. }) || large > losssense::ExtReal::ZERO,
                    "{s} #{i}: {v:?}"
                );
            }
        }
    }

    #[test]
    fn star_shaped_positions_are_sensitive_iff_recession_is_positive() {
        let sampler = Sampler::new(42);
        for s in ["entropic:1", "shortfall:exp:1", "es:0.1", "var:0.1", "worstcase", "eu:exp:1", "oce:exp:1"] {
            let spec = preset(s);
            assert!(spec.flags().star_shaped, "{s}");
            for i in 0..100 {
                let x = sampler.sample(i, &DomainSpec::Full).unwrap();
                let sensitive = matches!(sll_position(&spec, &x, 40).unwrap(), PositionVerdict::CertifiedSensitive { .. });
                let rec = recession(&spec, &x).unwrap().risk_value(spec.kind()).to_f64();
                assert_eq!(sensitive, rec > 1e-9, "{s} #{i}: R^inf = {rec}");
            }
        }
    }

    #[test]
    fn full_sensitive_cash_additive_specs_recede_to_the_worst_case() {
        let sampler = Sampler::new(42);
        let g = GProfile::new(0.0, vec![(0.0, 2.0), (0.5, 0.5), (1.0, 0.0)]).unwrap();
        let specs = vec![preset("entropic:1"), preset("entropic:0.2"), preset("worstcase"), preset("shortfall:exp:3"), FunctionalSpec::adj_es(g).unwrap()];
        for spec in specs {
            let f = spec.flags();
            assert!(f.cash_additive && f.star_shaped);
            assert!(sll_certify(&spec, &DomainSpec::Full, &cfg()).unwrap().is_sensitive());
            for i in 0..100 {
                let x = sampler.sample(i, &DomainSpec::Full).unwrap();
                let rec = recession(&spec, &x).unwrap().risk_value(spec.kind()).to_f64();
                assert!((rec - x.ess_sup_neg()).abs() < 1e-6, "{} #{i}: {rec} vs {}", spec.label(), x.ess_sup_neg());
            }
        }
    }

    #[test]
    fn strict_expectation_bound_gives_expected_loss_sensitivity() {
        let sampler = Sampler::new(42);
        for s in ["es:0.1", "es:0.5", "entropic:1", "worstcase"] {
            let spec = preset(s);
            let bounded = (0..100).all(|i| {
                let x = sampler.nonconstant(i);
                recession(&spec, &x).unwrap().risk_value(spec.kind()).to_f64() > -x.expectation() + 1e-9
            });
            assert!(bounded, "{s}");
            let v = sll_certify(&spec, &DomainSpec::ExpectedLosses, &cfg()).unwrap();
            assert_eq!(v.status, Status::Sensitive, "{s}");
        }
    }

    #[test]
    fn negation_mirrors_every_catalog_verdict() {
        for s in SPECS {
            let spec = preset(s);
            let b1 = localized_battery(&spec, &cfg()).unwrap();
            let b2 = localized_battery(&spec.negated(), &cfg()).unwrap();
            for (v1, v2) in b1.verdicts.iter().zip(&b2.verdicts) {
                assert_eq!((v1.status, v1.method, v1.certified), (v2.status, v2.method, v2.certified), "{s} {}", v1.domain);
                if let (Some(Witness::Counterexample { values: a, .. }), Some(Witness::Counterexample { values: b, .. })) = (&v1.witness, &v2.witness) {
                    assert!(a.iter().zip(b).all(|(p, q)| *p == q.neg()), "{s}");
                }
            }
        }
    }
}
