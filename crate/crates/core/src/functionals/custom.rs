//! User-defined functionals and a small catalog of hand-built counterexamples.

use super::{Flags, Kind};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::prob::{EventMask, FiniteSpace, Position};
use serde_json::{json, Value};
use std::fmt;
use std::sync::Arc;

pub type EvalFn = Arc<dyn Fn(&Position) -> Result<ExtReal> + Send + Sync>;
/// Closed-form behaviour of the risk view `λ ↦ r(λX)` along a ray.
pub type RayFn = Arc<dyn Fn(&Position) -> Option<RayIdentity> + Send + Sync>;
pub type RecessionFn = Arc<dyn Fn(&Position) -> ExtReal + Send + Sync>;

/// Sign of `r(λX)` for all `λ` beyond a threshold, known in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayIdentity {
    /// `r(λX) ≤ 0` for every `λ ≥ λ0`.
    NonPositiveFrom(f64),
    /// `r(λX) > 0` for every `λ > λ0`.
    PositiveFrom(f64),
}

#[derive(Clone)]
pub struct CustomFunctional {
    pub name: String,
    pub params: Value,
    pub kind: Kind,
    pub flags: Flags,
    pub eval: EvalFn,
    /// Functionals defined through a fixed event live on one space only.
    pub space: Option<Arc<FiniteSpace>>,
    pub ray: Option<RayFn>,
    /// Closed-form recession functional, reported in the functional's own sign.
    pub recession: Option<RecessionFn>,
    /// Positions that axiom checks and samplers should try first.
    pub witness_hints: Vec<Position>,
}

impl fmt::Debug for CustomFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFunctional").field("name", &self.name).field("params", &self.params).finish()
    }
}

impl CustomFunctional {
    pub fn new(name: impl Into<String>, kind: Kind, flags: Flags, eval: impl Fn(&Position) -> Result<ExtReal> + Send + Sync + 'static) -> Self {
        CustomFunctional {
            name: name.into(),
            params: Value::Null,
            kind,
            flags,
            eval: Arc::new(eval),
            space: None,
            ray: None,
            recession: None,
            witness_hints: Vec::new(),
        }
    }

    fn check_space(&self, x: &Position) -> Result<()> {
        match &self.space {
            Some(s) if s.probs() != x.probs() => Err(Error::SpaceMismatch),
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, x: &Position) -> Result<ExtReal> {
        self.check_space(x)?;
        (self.eval)(x)
    }
}

pub const CATALOG: &[&str] =
    &["min-worst-case-var", "max-loss-mean", "event-barrier", "event-concentration", "event-weighted-mean", "zero"];

fn param(params: &Value, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(default),
        Some(v) => v.as_f64().ok_or_else(|| Error::Parameter(format!("parameter `{key}` must be a number"))),
    }
}

/// Space and event for the event-based catalog entries: `probs` (default a two-atom space
/// with `P(A) = p_a`) and `event` (indices of the atoms in A, default `[0]`).
fn event_space(params: &Value, default_pa: f64) -> Result<(Arc<FiniteSpace>, EventMask)> {
    let space = match params.get("probs") {
        Some(v) => {
            let probs: Vec<f64> = serde_json::from_value(v.clone()).map_err(|e| Error::Parameter(format!("`probs`: {e}")))?;
            FiniteSpace::new(probs)?
        }
        None => FiniteSpace::binary(param(params, "p_a", default_pa)?)?,
    };
    let idx: Vec<usize> = match params.get("event") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Parameter(format!("`event`: {e}")))?,
        None => vec![0],
    };
    let mask = EventMask::from_indices(&space, &idx)?;
    if idx.is_empty() || idx.len() == space.len() {
        return Err(Error::Parameter("the event must have probability strictly between 0 and 1".into()));
    }
    Ok((space, mask))
}

fn canonical_params(name: &str, params: &Value) -> Value {
    let mut obj = match params {
        Value::Object(m) => m.clone(),
        _ => serde_json::Map::new(),
    };
    if name == "min-worst-case-var" && !obj.contains_key("alpha") {
        obj.insert("alpha".into(), json!(0.1));
    }
    Value::Object(obj)
}

/// Builds a catalog functional by name.
///
/// * `min-worst-case-var {alpha}` — `R(X) = min{ess sup(−X), VaR_α(X) + 1}`: cash-additive,
///   not star-shaped, with recession functional `ess sup(−X)` but not sensitive to large losses.
/// * `max-loss-mean` — utility `U(X) = max{E[X·1_{X<0}], E[X] − 1}`.
/// * `event-barrier {probs|p_a, event}` — `R(X) = ∞` if `E[X·1_A] ≤ 0`, else 0.
/// * `event-concentration {probs|p_a, event}` — `R(X) = min{ess sup(−X), ess sup((1−X)·1_A)}`.
/// * `event-weighted-mean {p_a}` — `R(X) = (2 − 1/P(A))·E[−X·1_A] + 2·E[−X·1_{A^c}]`, `P(A) > 1/2`.
/// * `zero` — the zero functional.
pub fn build(name: &str, params: &Value) -> Result<CustomFunctional> {
    let params = canonical_params(name, params);
    let mut f = match name {
        "min-worst-case-var" => {
            let alpha = param(&params, "alpha", 0.1)?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::Parameter(format!("alpha {alpha} must lie in (0,1)")));
            }
            let flags = Flags { monotone: true, normalized: true, cash_additive: true, ..Flags::default() };
            let mut f = CustomFunctional::new(name, Kind::Risk, flags, move |x| {
                Ok(ExtReal::Finite(x.ess_sup_neg().min(x.var(alpha)? + 1.0)))
            });
            // r(λX) = min{λ·ess sup(−X), λ·VaR_α(X) + 1}.
            f.ray = Some(Arc::new(move |x: &Position| {
                let (w, v) = (x.ess_sup_neg(), x.var(alpha).ok()?);
                if v < 0.0 {
                    Some(RayIdentity::NonPositiveFrom(-1.0 / v))
                } else if w > 0.0 {
                    Some(RayIdentity::PositiveFrom(0.0))
                } else {
                    Some(RayIdentity::NonPositiveFrom(0.0))
                }
            }));
            f.recession = Some(Arc::new(|x: &Position| ExtReal::Finite(x.ess_sup_neg())));
            let pa = alpha / 2.0;
            f.witness_hints = vec![
                Position::from_atoms(&[(pa, -1.0), (1.0 - pa, 1.0)])?,
                Position::from_atoms(&[(pa, -1.0), (1.0 - pa, 0.0)])?,
            ];
            f
        }
        "max-loss-mean" => {
            let flags = Flags { monotone: true, normalized: true, ..Flags::default() };
            let mut f = CustomFunctional::new(name, Kind::Utility, flags, |x| {
                let neg: f64 = x.atoms().filter(|a| a.1 < 0.0).map(|(p, v)| p * v).sum();
                Ok(ExtReal::Finite(neg.max(x.expectation() - 1.0)))
            });
            // U(λX) = max{λ·E[X·1_{X<0}], λ·E[X] − 1}; risk view r = −U.
            f.ray = Some(Arc::new(|x: &Position| {
                let e = x.expectation();
                if e > 0.0 {
                    Some(RayIdentity::NonPositiveFrom(1.0 / e))
                } else if x.has_losses() {
                    Some(RayIdentity::PositiveFrom(0.0))
                } else {
                    Some(RayIdentity::NonPositiveFrom(0.0))
                }
            }));
            f.recession = Some(Arc::new(|x: &Position| {
                ExtReal::Finite(x.atoms().filter(|a| a.1 < 0.0).map(|(p, v)| p * v).sum())
            }));
            f.witness_hints = vec![Position::from_atoms(&[(0.2, -1.0), (0.8, 1.0)])?];
            f
        }
        "event-barrier" => {
            let (space, mask) = event_space(&params, 0.5)?;
            let flags = Flags { monotone: true, pos_homogeneous: true, star_shaped: true, convex: true, ..Flags::default() };
            let m = mask.clone();
            let mut f = CustomFunctional::new(name, Kind::Risk, flags, move |x| {
                let ea: f64 = x.restrict(&m)?.expectation();
                Ok(if ea <= 0.0 { ExtReal::PosInf } else { ExtReal::ZERO })
            });
            f.space = Some(space);
            f
        }
        "event-concentration" => {
            let (space, mask) = event_space(&params, 0.5)?;
            let flags = Flags { monotone: true, normalized: true, ..Flags::default() };
            let m = mask.clone();
            let mut f = CustomFunctional::new(name, Kind::Risk, flags, move |x| {
                let on_a = x
                    .outcomes()
                    .iter()
                    .zip(m.members())
                    .map(|(&v, &inside)| if inside { 1.0 - v } else { 0.0 })
                    .fold(f64::NEG_INFINITY, f64::max);
                Ok(ExtReal::Finite(x.ess_sup_neg().min(on_a)))
            });
            f.space = Some(space);
            f
        }
        "event-weighted-mean" => {
            let pa = param(&params, "p_a", 0.75)?;
            if !(pa > 0.5 && pa < 1.0) {
                return Err(Error::Parameter(format!("p_a {pa} must lie in (1/2, 1)")));
            }
            let (space, mask) = event_space(&json!({"p_a": pa}), pa)?;
            let flags = Flags {
                monotone: true,
                normalized: true,
                cash_additive: true,
                pos_homogeneous: true,
                star_shaped: true,
                convex: true,
                lsc: true,
            };
            let w_a = 2.0 - 1.0 / pa;
            let m = mask.clone();
            let mut f = CustomFunctional::new(name, Kind::Risk, flags, move |x| {
                let on_a: f64 = x.restrict(&m)?.expectation();
                let off_a = x.expectation() - on_a;
                Ok(ExtReal::Finite(-w_a * on_a - 2.0 * off_a))
            });
            f.space = Some(space);
            f
        }
        "zero" => {
            let flags = Flags {
                monotone: true,
                normalized: true,
                pos_homogeneous: true,
                star_shaped: true,
                convex: true,
                lsc: true,
                ..Flags::default()
            };
            CustomFunctional::new(name, Kind::Risk, flags, |_| Ok(ExtReal::ZERO))
        }
        _ => return Err(Error::Parameter(format!("unknown custom functional `{name}` (known: {})", CATALOG.join(", ")))),
    };
    f.params = params;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_mean_counterexample_value() {
        let f = build("event-weighted-mean", &json!({"p_a": 0.75})).unwrap();
        let y = Position::new(f.space.clone().unwrap(), vec![-1.0, 3.0]).unwrap();
        assert!((f.evaluate(&y).unwrap().to_f64() + 1.0).abs() < 1e-12);
        assert!(y.expectation().abs() < 1e-12);
    }

    #[test]
    fn event_functionals_reject_foreign_spaces() {
        let f = build("event-barrier", &json!({})).unwrap();
        let x = Position::from_atoms(&[(0.3, 1.0), (0.7, 2.0)]).unwrap();
        assert_eq!(f.evaluate(&x), Err(Error::SpaceMismatch));
    }
}
