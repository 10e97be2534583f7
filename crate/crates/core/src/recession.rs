//! Recession functionals `R^∞(X) = sup_λ R(λX)/λ` (and `U^∞ = inf_λ U(λX)/λ`) and the
//! cash-additive functional induced by an acceptance set.

use crate::error::Result;
use crate::ext::ExtReal;
use crate::functionals::{FunctionalSpec, Kind, Variant};
use crate::prob::{FiniteSpace, Position};
use crate::sampling::Sampler;
use crate::solve::{self, Bracket};
use rand::Rng;
use serde::Serialize;
use serde_json::Value;

pub const DEFAULT_MAX_EXP: i32 = 40;
pub const RATIO_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecessionMode {
    Analytic,
    NumericConverged,
    NumericLowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioPoint {
    pub lambda: f64,
    pub ratio: ExtReal,
}

/// Values and ratios are in the functional's own sign: for a utility functional the
/// estimate is `U^∞` and a `numeric_lower_bound` is an upper bound on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecessionEstimate {
    pub value: ExtReal,
    pub mode: RecessionMode,
    pub lambda_max: f64,
    pub ratio_trace: Vec<RatioPoint>,
}

impl RecessionEstimate {
    fn analytic(value: ExtReal) -> Self {
        RecessionEstimate { value, mode: RecessionMode::Analytic, lambda_max: 0.0, ratio_trace: Vec::new() }
    }

    fn negated(mut self) -> Self {
        self.value = self.value.neg();
        for p in &mut self.ratio_trace {
            p.ratio = p.ratio.neg();
        }
        self
    }

    /// The estimate in the risk view (`R^∞`, or `−U^∞` for utility functionals).
    pub fn risk_value(&self, kind: Kind) -> ExtReal {
        match kind {
            Kind::Risk => self.value,
            Kind::Utility => self.value.neg(),
        }
    }
}

fn closed_form(spec: &FunctionalSpec, x: &Position) -> Result<Option<ExtReal>> {
    let fin = |v: f64| Ok(Some(ExtReal::Finite(v)));
    match spec.variant() {
        Variant::Var { alpha } => fin(x.var(*alpha)?),
        Variant::Es { alpha } => fin(x.es(*alpha)?),
        Variant::WorstCase => fin(x.ess_sup_neg()),
        Variant::Lvar(p) if p.alpha_inf() > 0.0 => fin(x.var(p.alpha_inf())?),
        Variant::Lvar(_) => fin(x.ess_sup_neg()),
        Variant::AdjEs(g) if g.is_finite_everywhere() => fin(x.ess_sup_neg()),
        Variant::AdjEs(g) => fin(x.es(g.inf_prefix())?),
        Variant::Custom(c) => match &c.recession {
            Some(f) => Ok(Some(f(x))),
            None if c.flags.pos_homogeneous => Ok(Some(c.evaluate(x)?)),
            None => Ok(None),
        },
        _ if spec.flags().pos_homogeneous => Ok(Some(spec.value(x)?)),
        _ => Ok(None),
    }
}

/// Recession estimate with the default schedule `λ = 2^k`, `k ≤ 40`.
pub fn recession(spec: &FunctionalSpec, x: &Position) -> Result<RecessionEstimate> {
    recession_with(spec, x, DEFAULT_MAX_EXP)
}

/// Closed forms where they are proved; otherwise the ratio `r(λX)/λ` along `λ = 2^k`.
/// Star-shaped functionals have nondecreasing ratios, so `k = 0..=max_exp` with a
/// relative-change stop is used and the last ratio is a certified lower bound. Without
/// star-shapedness the ratio may oscillate; the supremum over `k = −max_exp..=max_exp` is
/// reported and always labelled a lower bound.
pub fn recession_with(spec: &FunctionalSpec, x: &Position, max_exp: i32) -> Result<RecessionEstimate> {
    if let Variant::Negated(inner) = spec.variant() {
        return Ok(recession_with(inner, x, max_exp)?.negated());
    }
    if let Some(v) = closed_form(spec, x)? {
        return Ok(RecessionEstimate::analytic(v));
    }
    let star = spec.flags().star_shaped;
    let own = |r: ExtReal| match spec.kind() {
        Kind::Risk => r,
        Kind::Utility => r.neg(),
    };
    let ks: Vec<i32> = if star { (0..=max_exp).collect() } else { (-max_exp..=max_exp).collect() };
    let mut trace = Vec::with_capacity(ks.len());
    let mut best = ExtReal::NegInf;
    let mut prev: Option<f64> = None;
    for k in ks {
        let lambda = 2f64.powi(k);
        let ratio = spec.risk(&x.scale(lambda))?.scale(1.0 / lambda);
        trace.push(RatioPoint { lambda, ratio: own(ratio) });
        best = best.max(ratio);
        if ratio == ExtReal::PosInf {
            let mode = if star { RecessionMode::Analytic } else { RecessionMode::NumericLowerBound };
            return Ok(RecessionEstimate { value: own(ExtReal::PosInf), mode, lambda_max: lambda, ratio_trace: trace });
        }
        if star {
            if let (Some(p), ExtReal::Finite(r)) = (prev, ratio) {
                if (r - p).abs() < RATIO_REL_TOL * r.abs().max(1.0) {
                    return Ok(RecessionEstimate {
                        value: own(ratio),
                        mode: RecessionMode::NumericConverged,
                        lambda_max: lambda,
                        ratio_trace: trace,
                    });
                }
            }
            prev = ratio.finite();
        }
    }
    let lambda_max = trace.last().map(|p| p.lambda).unwrap_or(1.0);
    let value = if star { trace.last().map(|p| p.ratio).unwrap_or(ExtReal::NegInf) } else { own(best) };
    Ok(RecessionEstimate { value, mode: RecessionMode::NumericLowerBound, lambda_max, ratio_trace: trace })
}

/// `R_A(X) = inf{m : X + m ∈ A}` for the acceptance set `A = {r ≤ 0}` of the functional.
/// Positions whose evaluation fails are treated as unacceptable. `±∞` when no finite
/// bracket exists within `|m| ≤ 10¹²·max(1, ‖X‖)`.
pub fn induced_cash_additive(spec: &FunctionalSpec, x: &Position) -> ExtReal {
    let acceptable = |m: f64| matches!(spec.risk(&x.shift(m)), Ok(r) if r <= ExtReal::ZERO);
    let limit = solve::BRACKET_LIMIT_FACTOR * x.sup_norm().max(1.0);
    match solve::bracket(&acceptable, -x.max() - 1.0, -x.min() + 1.0, limit) {
        Bracket::Found { lo, hi } => ExtReal::Finite(solve::bisect(&acceptable, lo, hi)),
        Bracket::TrueEverywhere => ExtReal::NegInf,
        Bracket::FalseEverywhere => ExtReal::PosInf,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InducedCheck {
    pub holds: bool,
    pub samples: usize,
    /// A constant `m < 0` with `r(m) ≤ 0`, or a position `X` with `r(X + m) ≤ 0` for every
    /// tried `m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_x: Option<Value>,
}

/// Randomized check that the induced functional is again a risk functional: `r(m) > 0` for
/// sampled `m < 0` (starting with `m = −1`), and for sampled `X` some `m` with `r(X+m) > 0`.
pub fn is_risk_functional_induced(spec: &FunctionalSpec, samples: usize, seed: u64) -> Result<InducedCheck> {
    let sampler = match spec.fixed_space() {
        Some(s) => Sampler::new(seed).on_space(s.clone()),
        None => Sampler::new(seed),
    };
    let space = match spec.fixed_space() {
        Some(s) => s.clone(),
        None => FiniteSpace::uniform(1)?,
    };
    let positive = |p: &Position| matches!(spec.risk(p), Ok(r) if r > ExtReal::ZERO);
    let mut check = InducedCheck { holds: true, samples, witness_m: None, witness_x: None };
    let mut ms = vec![-1.0];
    ms.extend((0..samples as u64).map(|i| -sampler.rng(i).random_range(1e-3..10.0)));
    for m in ms {
        if !positive(&Position::constant(space.clone(), m)?) {
            check.holds = false;
            check.witness_m = Some(m);
            return Ok(check);
        }
    }
    for i in 0..samples as u64 {
        let x = sampler.raw(1_000_000 + i);
        let base = x.sup_norm() + 1.0;
        if !(0..=40).any(|k| positive(&x.shift(-base * 2f64.powi(k)))) {
            check.holds = false;
            check.witness_x = Some(crate::io::position_json(&x));
            return Ok(check);
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropic_trace_converges_to_worst_case() {
        let x = Position::from_atoms(&[(0.5, -1.0), (0.5, 0.0)]).unwrap();
        let est = recession(&FunctionalSpec::entropic(1.0).unwrap(), &x).unwrap();
        assert_eq!(est.mode, RecessionMode::NumericConverged);
        assert!((est.value.to_f64() - 1.0).abs() < 1e-6);
        let at20 = est.ratio_trace.iter().find(|p| p.lambda == 2f64.powi(20)).unwrap();
        assert!((at20.ratio.to_f64() - 1.0).abs() < 1e-4);
        assert!(est.ratio_trace.windows(2).all(|w| w[1].ratio.to_f64() >= w[0].ratio.to_f64() - 1e-9));
    }

    #[test]
    fn zero_functional_does_not_induce_a_risk_functional() {
        let c = is_risk_functional_induced(&FunctionalSpec::custom("zero", Value::Null).unwrap(), 10, 1).unwrap();
        assert!(!c.holds);
        assert_eq!(c.witness_m, Some(-1.0));
        assert!(is_risk_functional_induced(&FunctionalSpec::var(0.1).unwrap(), 20, 1).unwrap().holds);
    }

    #[test]
    fn induced_matches_cash_additive_value() {
        let x = Position::from_atoms(&[(0.2, -3.0), (0.5, 1.0), (0.3, 2.5)]).unwrap();
        for s in ["es:0.3", "entropic:0.7", "shortfall:exp:2"] {
            let spec = FunctionalSpec::preset(s).unwrap();
            let v = spec.value(&x).unwrap().to_f64();
            assert!((induced_cash_additive(&spec, &x).to_f64() - v).abs() < 1e-8, "{s}");
        }
    }
}
