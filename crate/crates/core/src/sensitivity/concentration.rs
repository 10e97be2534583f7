//! Loss concentrations `X − λ1_A` and the search for positions `Y` that a loss makes
//! strictly riskier.

use super::position::{is_positive, own_sign};
use super::{sll_certify, CertifyConfig, DomainSpec, Status};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::functionals::FunctionalSpec;
use crate::io::position_json;
use crate::prob::{EventMask, Position};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

/// Concentration sweeps start at `λ = 2^MIN_EXP`.
const MIN_EXP: i32 = -10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationBasis {
    /// `r(X − λ1_A)` evaluated along `λ = 2^k`.
    Sweep,
    /// Star-shaped lower semicontinuous functionals are sensitive to loss concentrations
    /// exactly when they are sensitive to large pure losses.
    PureLossEquivalence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConcentrationResult {
    /// `r(X − λ1_A) > 0`; for monotone functionals this persists for larger `λ`.
    ConcentrationSensitive { lambda: Option<f64>, basis: ConcentrationBasis },
    /// `r(X − λ1_A) ≤ 0` at every swept `λ` (own sign in `values`).
    Counterexample { lambdas: Vec<f64>, values: Vec<ExtReal> },
    Undecided { lambda_max: f64 },
}

/// Looks for `λ` with `r(X − λ1_A) > 0`. With declared star-shapedness and lower
/// semicontinuity, a certified pure-loss sensitivity verdict settles the question.
pub fn loss_concentration_check(spec: &FunctionalSpec, x: &Position, a: &EventMask, cfg: &CertifyConfig) -> Result<ConcentrationResult> {
    if x.space().prob(a) <= 0.0 {
        return Err(Error::Parameter("the event must have positive probability".into()));
    }
    let eval = |lambda: f64| -> Result<ExtReal> { spec.risk(&x.minus_indicator(lambda, a)?) };
    let mut lambdas = Vec::new();
    let mut values = Vec::new();
    let mut first_positive = None;
    let mut failed = false;
    for k in MIN_EXP..=cfg.max_exp {
        let lambda = 2f64.powi(k);
        match eval(lambda) {
            Ok(v) if is_positive(v, lambda, x) => {
                first_positive = Some(lambda);
                break;
            }
            Ok(v) => {
                lambdas.push(lambda);
                values.push(own_sign(spec.kind(), v));
            }
            Err(_) => failed = true,
        }
    }
    let f = spec.flags();
    if f.star_shaped && f.lsc {
        let pure = sll_certify(spec, &DomainSpec::PureLosses, &CertifyConfig { trials: cfg.trials.min(20), ..cfg.clone() })?;
        if pure.certified && pure.status == Status::Sensitive {
            return Ok(ConcentrationResult::ConcentrationSensitive {
                lambda: first_positive,
                basis: ConcentrationBasis::PureLossEquivalence,
            });
        }
    }
    Ok(match first_positive {
        Some(lambda) if f.monotone => ConcentrationResult::ConcentrationSensitive { lambda: Some(lambda), basis: ConcentrationBasis::Sweep },
        Some(_) => ConcentrationResult::Undecided { lambda_max: 2f64.powi(cfg.max_exp) },
        None if failed => ConcentrationResult::Undecided { lambda_max: 2f64.powi(cfg.max_exp) },
        None => ConcentrationResult::Counterexample { lambdas, values },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    /// Largest `r(X+Y) − r(Y)` found (`−∞` when nothing could be evaluated).
    pub best_gap: f64,
    pub best_y: Option<Value>,
    pub positive: bool,
    pub candidates_tried: usize,
    #[serde(skip)]
    pub best_position: Option<Position>,
}

/// Default probe set: constants, `±(1+‖X‖)·1_B` over every nonempty event `B`, and
/// `Y_n = ‖X‖ + (n − X)·1_{X>0}` for `n ∈ {1, 5, 10, 20, 40}`.
pub fn default_candidates(x: &Position) -> Vec<Position> {
    let space = x.space().clone();
    let s = 1.0 + x.sup_norm();
    let mut out: Vec<Position> = [-s, -1.0, 0.0, 1.0, s].iter().map(|&c| Position::constant(space.clone(), c).expect("finite")).collect();
    let n = x.len();
    if n <= 8 {
        for bits in 1u32..(1 << n) {
            let members: Vec<bool> = (0..n).map(|i| bits & (1 << i) != 0).collect();
            for sign in [-1.0, 1.0] {
                let y = members.iter().map(|&m| if m { sign * s } else { 0.0 }).collect();
                out.push(Position::new(space.clone(), y).expect("finite"));
            }
        }
    }
    let norm = x.sup_norm();
    for m in [1.0, 5.0, 10.0, 20.0, 40.0] {
        out.push(x.map(|v| norm + if v > 0.0 { m - v } else { 0.0 }));
    }
    out
}

/// Maximizes `r(X+Y) − r(Y)` over the candidates. A positive gap means the loss in `X`
/// makes some position strictly riskier. This is a falsification search: the condition is
/// necessary for sensitivity to large losses but not sufficient without convexity, and
/// finding no such `Y` proves nothing.
pub fn risk_reduction_probe(spec: &FunctionalSpec, x: &Position, candidates: &[Position]) -> Result<ProbeResult> {
    if !x.has_losses() {
        return Err(Error::Domain("the position carries no loss (P(X<0) = 0)".into()));
    }
    let gaps: Vec<Option<f64>> = candidates
        .par_iter()
        .map(|y| {
            let ry = spec.risk(y).ok()?;
            let rxy = spec.risk(&x.add(y).ok()?).ok()?;
            match (rxy, ry) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => Some(a - b),
                (ExtReal::PosInf, ExtReal::Finite(_)) | (ExtReal::Finite(_), ExtReal::NegInf) => Some(f64::INFINITY),
                (ExtReal::NegInf, ExtReal::Finite(_)) | (ExtReal::Finite(_), ExtReal::PosInf) => Some(f64::NEG_INFINITY),
                _ => None,
            }
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, g) in gaps.iter().enumerate() {
        if let Some(g) = *g {
            if best.is_none_or(|(_, b)| g > b) {
                best = Some((i, g));
            }
        }
    }
    let scale = x.sup_norm().max(1.0);
    Ok(match best {
        Some((i, g)) => ProbeResult {
            best_gap: g,
            best_y: Some(position_json(&candidates[i])),
            positive: g > 1e-12 * scale,
            candidates_tried: candidates.len(),
            best_position: Some(candidates[i].clone()),
        },
        None => ProbeResult { best_gap: f64::NEG_INFINITY, best_y: None, positive: false, candidates_tried: candidates.len(), best_position: None },
    })
}
