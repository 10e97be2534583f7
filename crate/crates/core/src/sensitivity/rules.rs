//! Closed-form sensitivity criteria per variant and domain.
//!
//! A rule either proves sensitivity outright or names insensitivity witnesses; witnesses
//! are always re-verified by evaluation before a verdict is emitted.

use super::{DomainSpec, Method};
use crate::functionals::{FunctionalSpec, Variant};
use crate::prob::Position;

pub(crate) enum Rule {
    Sensitive { method: Method, note: String },
    Insensitive { method: Method, witnesses: Vec<Position>, note: String },
    Unknown,
}

fn sensitive(method: Method, note: impl Into<String>) -> Rule {
    Rule::Sensitive { method, note: note.into() }
}

fn insensitive(method: Method, witnesses: Vec<Position>, note: impl Into<String>) -> Rule {
    Rule::Insensitive { method, witnesses, note: note.into() }
}

/// `X = off·1_{A^c} + on·1_A` on a two-atom space with `P(A) = p`.
pub(crate) fn binary(p: f64, on_a: f64, off_a: f64) -> Position {
    Position::from_atoms(&[(p, on_a), (1.0 - p, off_a)]).expect("p lies in (0,1)")
}

/// Zero-mean two-point losses `−1_A + q/(1−q)·1_{A^c}`, `P(A) = q`, for `q = 1/2, 1/4, …`.
fn zero_mean_family() -> Vec<Position> {
    (1..=10).map(|i| 0.5f64.powi(i)).map(|q| binary(q, -1.0, q / (1.0 - q))).collect()
}

/// The witness of the tail-ratio criteria: `1_{A^c} − 1_A` with `P(A) = 1/(2(2−L))` where
/// `L = limsup u(−x)/u(x) > −∞`.
fn tail_witness(ratio: f64) -> Position {
    binary(1.0 / (2.0 * (2.0 - ratio)), -1.0, 1.0)
}

pub(crate) fn rule(spec: &FunctionalSpec, domain: &DomainSpec) -> Rule {
    use DomainSpec::*;
    if matches!(domain, Custom { .. }) {
        return match full_sensitive(spec) {
            Some(r @ Rule::Sensitive { .. }) => r,
            _ => Rule::Unknown,
        };
    }
    match spec.variant() {
        Variant::Var { alpha } => match domain {
            SureLosses => sensitive(Method::SignBound, "VaR of a position that is negative almost surely is positive"),
            _ => insensitive(
                Method::TheoremCashAdditive,
                vec![binary(alpha / 2.0, -1.0, 0.0)],
                "VaR ignores losses on events of probability below the level",
            ),
        },
        Variant::Es { alpha } if *alpha < 1.0 => match domain {
            Full => insensitive(
                Method::TheoremCashAdditive,
                vec![binary(alpha / 2.0, -1.0, 1.0)],
                "ES differs from ess sup(-X); the rare loss is offset by gains inside the tail",
            ),
            _ => sensitive(Method::StrictExpectationBound, "ES_a(X) > E[-X] for nonconstant X when a < 1"),
        },
        Variant::Es { .. } => match domain {
            Full | ExpectedLosses => {
                insensitive(Method::PositiveHomogeneity, vec![binary(0.5, -1.0, 1.0)], "ES_1 is the negated mean")
            }
            _ => sensitive(Method::ExpectationBound, "E[-X] > 0 on pure losses"),
        },
        Variant::WorstCase => sensitive(Method::SignBound, "ess sup(-X) > 0 whenever P(X<0) > 0"),
        Variant::Lvar(p) => {
            let a = p.alpha_inf();
            if a == 0.0 {
                sensitive(Method::TheoremCashAdditive, "alpha_inf = 0, so the recession functional is ess sup(-X)")
            } else if matches!(domain, SureLosses) {
                sensitive(Method::SignBound, "the loss level 0 contributes VaR of a sure loss, which is positive")
            } else {
                insensitive(
                    Method::TheoremCashAdditive,
                    vec![binary(a / 2.0, -1.0, 0.0)],
                    "alpha_inf > 0, so the recession functional is VaR at alpha_inf",
                )
            }
        }
        Variant::AdjEs(g) => {
            let p = g.inf_prefix();
            if g.is_finite_everywhere() {
                return sensitive(Method::TheoremCashAdditive, "g is finite everywhere, so the recession functional is ess sup(-X)");
            }
            match domain {
                SureLosses | PureLosses => sensitive(Method::ExpectationBound, "ES^g(X) >= ES_1(X) - g(1) = E[-X]"),
                ExpectedLosses if p < 1.0 => {
                    sensitive(Method::StrictExpectationBound, "ES^g(X) >= ES_a(X) - g(a) with ES_a(X) > E[-X] for some a in [p,1)")
                }
                ExpectedLosses => insensitive(Method::PositiveHomogeneity, vec![binary(0.5, -1.0, 1.0)], "p = 1 leaves only ES_1"),
                _ => insensitive(
                    Method::TheoremCashAdditive,
                    vec![binary(p / 2.0, -1.0, 1.0)],
                    "g is infinite below p, so the recession functional is ES_p",
                ),
            }
        }
        Variant::Entropic { .. } => sensitive(Method::TailRatio, "exponential loss: the loss tail dominates the gain tail"),
        Variant::Shortfall(l) => {
            let ratio = l.tail_ratio();
            let f = l.flags();
            if ratio == f64::NEG_INFINITY && (f.convex || f.pos_star_shaped_on_neg) {
                sensitive(Method::TailRatio, "limsup l(x)/l(-x) = -inf")
            } else if ratio > f64::NEG_INFINITY && matches!(domain, Full) {
                insensitive(Method::TailRatio, vec![tail_witness(ratio)], format!("limsup l(x)/l(-x) = {ratio} > -inf"))
            } else {
                Rule::Unknown
            }
        }
        Variant::ExpectedUtility(u) | Variant::ClassicalCe(u) | Variant::UmeanCe(u) => {
            let f = u.flags();
            let ratio = u.tails().loss_gain_ratio();
            let star_pos = f.neg_star_shaped_on_pos || f.concave_on_pos || f.concave || f.neg_star_shaped;
            let gate = match spec.variant() {
                Variant::ClassicalCe(_) => f.left_continuous_at_0,
                _ => true,
            };
            if ratio == f64::NEG_INFINITY {
                return if star_pos && gate {
                    sensitive(Method::TailRatio, "limsup u(-x)/u(x) = -inf")
                } else {
                    Rule::Unknown
                };
            }
            if ratio.is_nan() {
                return Rule::Unknown;
            }
            match domain {
                Full => insensitive(Method::TailRatio, vec![tail_witness(ratio)], format!("limsup u(-x)/u(x) = {ratio} > -inf")),
                SureLosses | PureLosses if f.strictly_negative_on_neg && f.normalized && f.left_continuous_at_0 => {
                    sensitive(Method::SignBound, "u < 0 on losses, so pure losses have negative utility")
                }
                ExpectedLosses => insensitive(
                    Method::TailRatio,
                    zero_mean_family(),
                    format!("limsup u(-x)/u(x) = {ratio} > -inf; zero-mean two-point losses"),
                ),
                _ => Rule::Unknown,
            }
        }
        Variant::Oce(u) => {
            let (a, b) = (u.tails().slope_minus(), u.tails().slope_plus());
            if a == f64::INFINITY && b == 0.0 {
                return sensitive(Method::OceAsymptotic, "lim u(x)/x = inf at -inf and 0 at +inf");
            }
            match domain {
                SureLosses | PureLosses => sensitive(Method::ExpectationBound, "OCE(X) <= E[X] < 0 on pure losses"),
                ExpectedLosses => insensitive(Method::OceAsymptotic, zero_mean_family(), "zero-mean two-point losses"),
                _ => {
                    let mut w = Vec::new();
                    if a.is_finite() {
                        w.push(binary(1.0 / (2.0 * (a + 1.0)), -1.0, 1.0));
                    }
                    if b > 0.0 {
                        w.push(binary(1.0 - 2.0 * b / 3.0, -1.0, 2.0 / (b * b) - 1.0));
                    }
                    insensitive(Method::OceAsymptotic, w, format!("lim u(x)/x is {a} at -inf and {b} at +inf"))
                }
            }
        }
        Variant::Custom(_) | Variant::Negated(_) => Rule::Unknown,
    }
}

fn full_sensitive(spec: &FunctionalSpec) -> Option<Rule> {
    match rule(spec, &DomainSpec::Full) {
        r @ Rule::Sensitive { .. } => Some(r),
        _ => None,
    }
}
