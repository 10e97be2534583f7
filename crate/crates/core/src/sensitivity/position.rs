//! Per-position decisions along the ray `λ ↦ λX` and re-verification of witnesses.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::functionals::{FunctionalSpec, Kind, RayIdentity, Variant};
use crate::prob::Position;
use serde::Serialize;

/// Values below `POS_TOL·max(1, λ‖X‖)` are not counted as positive risk.
pub const POS_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_EXP: i32 = 40;
/// A witness must satisfy `r(2^k X) ≤ 0` for every `k` from some `k0 ≤ MAX_ONSET_EXP` on.
pub const MAX_ONSET_EXP: i32 = 20;

pub(crate) fn is_positive(r: ExtReal, lambda: f64, x: &Position) -> bool {
    match r {
        ExtReal::PosInf => true,
        ExtReal::NegInf => false,
        ExtReal::Finite(v) => v > POS_TOL * (lambda * x.sup_norm()).max(1.0),
    }
}

pub(crate) fn own_sign(kind: Kind, r: ExtReal) -> ExtReal {
    match kind {
        Kind::Risk => r,
        Kind::Utility => r.neg(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// `r(λX) = λ·r(X)`: the sign at `λ = 1` decides the whole ray.
    PositiveHomogeneity,
    /// Star-shaped: once `r(λX) > 0`, the ratio `r(λX)/λ` stays positive.
    StarShaped,
    /// A closed form for `r(λX)` supplied with the functional.
    RayIdentity,
}

/// `r(λX)` at the listed `λ`, reported in the functional's own sign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaySample {
    pub lambdas: Vec<f64>,
    pub values: Vec<ExtReal>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PositionVerdict {
    /// `r(λX) > 0` for every `λ > lambda`.
    CertifiedSensitive { lambda: f64, basis: Basis },
    /// `r(λX) ≤ 0` along an unbounded sequence of `λ`.
    CertifiedInsensitive { basis: Basis, evidence: RaySample },
    Undecided { lambda_max: f64 },
}

fn base(spec: &FunctionalSpec) -> &FunctionalSpec {
    match spec.variant() {
        Variant::Negated(inner) => base(inner),
        _ => spec,
    }
}

/// Decides sensitivity along the ray through `X` (which must carry a loss) using the
/// strongest structure available: positive homogeneity, a closed-form ray identity, or a
/// doubling sweep `λ = 2^k`, `k ≤ max_exp`, for star-shaped functionals. Anything else is
/// undecided: without star-shapedness a positive value proves nothing about larger `λ`.
pub fn sll_position(spec: &FunctionalSpec, x: &Position, max_exp: i32) -> Result<PositionVerdict> {
    if !x.has_losses() {
        return Err(Error::Domain("the position carries no loss (P(X<0) = 0)".into()));
    }
    let r = |lambda: f64| spec.risk(&x.scale(lambda));
    let kind = spec.kind();
    if spec.flags().pos_homogeneous {
        let v = r(1.0)?;
        return Ok(if is_positive(v, 1.0, x) {
            PositionVerdict::CertifiedSensitive { lambda: 0.0, basis: Basis::PositiveHomogeneity }
        } else {
            PositionVerdict::CertifiedInsensitive {
                basis: Basis::PositiveHomogeneity,
                evidence: RaySample { lambdas: vec![1.0], values: vec![own_sign(kind, v)] },
            }
        });
    }
    if let Variant::Custom(c) = base(spec).variant() {
        if let Some(id) = c.ray.as_ref().and_then(|f| f(x)) {
            match id {
                RayIdentity::NonPositiveFrom(l0) => {
                    if let Some(evidence) = sweep_nonpositive(spec, x, l0, max_exp) {
                        return Ok(PositionVerdict::CertifiedInsensitive { basis: Basis::RayIdentity, evidence });
                    }
                }
                RayIdentity::PositiveFrom(l0) => {
                    let probe = (2.0 * l0).max(1.0);
                    if is_positive(r(probe)?, probe, x) {
                        return Ok(PositionVerdict::CertifiedSensitive { lambda: l0, basis: Basis::RayIdentity });
                    }
                }
            }
        }
    }
    if spec.flags().star_shaped {
        for k in 0..=max_exp {
            let lambda = 2f64.powi(k);
            if is_positive(r(lambda)?, lambda, x) {
                return Ok(PositionVerdict::CertifiedSensitive { lambda, basis: Basis::StarShaped });
            }
        }
    }
    Ok(PositionVerdict::Undecided { lambda_max: 2f64.powi(max_exp) })
}

/// `r(2^k X) ≤ 0` for every `2^k ≥ from`, `k ≤ max_exp`; the evaluated values on success.
fn sweep_nonpositive(spec: &FunctionalSpec, x: &Position, from: f64, max_exp: i32) -> Option<RaySample> {
    let k0 = if from <= 1.0 { 0 } else { from.log2().ceil() as i32 };
    let mut s = RaySample { lambdas: Vec::new(), values: Vec::new() };
    for k in k0..=max_exp.max(k0) {
        let lambda = 2f64.powi(k);
        let v = spec.risk(&x.scale(lambda)).ok()?;
        if is_positive(v, lambda, x) {
            return None;
        }
        s.lambdas.push(lambda);
        s.values.push(own_sign(spec.kind(), v));
    }
    Some(s)
}

/// Re-verifies an insensitivity witness by direct evaluation: `X` carries a loss and
/// `r(2^k X) ≤ 0` for all `k0 ≤ k ≤ max_exp`, for some onset `k0 ≤ 20`. Returns the
/// evaluated tail of the ray.
pub fn verify_insensitive(spec: &FunctionalSpec, x: &Position, max_exp: i32) -> Option<RaySample> {
    if !x.has_losses() {
        return None;
    }
    let mut vals = Vec::with_capacity(max_exp as usize + 1);
    for k in 0..=max_exp {
        let lambda = 2f64.powi(k);
        let v = spec.risk(&x.scale(lambda)).ok()?;
        vals.push((lambda, v));
    }
    let last_bad = vals.iter().rposition(|&(l, v)| is_positive(v, l, x));
    let onset = last_bad.map(|i| i + 1).unwrap_or(0);
    if onset as i32 > MAX_ONSET_EXP {
        return None;
    }
    let tail = &vals[onset..];
    Some(RaySample {
        lambdas: tail.iter().map(|p| p.0).collect(),
        values: tail.iter().map(|p| own_sign(spec.kind(), p.1)).collect(),
    })
}
