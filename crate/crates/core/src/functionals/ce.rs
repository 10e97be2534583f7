//! Functionals built from a scalar utility or loss function: expected utility, the three
//! certainty equivalents, shortfall risk and the entropic risk measure.

use crate::error::{Direction, Error, Result};
use crate::ext::{Evaluation, ExtReal};
use crate::function::{LossFn, UtilityFn};
use crate::prob::Position;
use crate::solve::{self, Bracket};

/// Grid density of the OCE search for nonconcave utilities.
pub const OCE_GRID: usize = 512;
pub const OCE_MAX_WIDENINGS: usize = 8;
pub const OCE_WIDEN_FACTOR: f64 = 4.0;
pub const OCE_REL_TOL: f64 = 1e-8;
pub const OCE_MAX_ITER: usize = 300;

fn bracket_limit(x: &Position) -> f64 {
    solve::BRACKET_LIMIT_FACTOR * x.sup_norm().max(1.0)
}

/// `E[u(X)]`. A `−∞` coming from a piece that is `−∞` by definition is exact; any other
/// infinity is floating overflow and flagged as such.
pub fn expected_utility(u: &UtilityFn, x: &Position) -> Evaluation {
    let mut gains = Vec::with_capacity(x.len());
    let mut losses = Vec::with_capacity(x.len());
    for (p, v) in x.atoms() {
        let uv = u.eval(v);
        if uv == f64::NEG_INFINITY && u.is_neg_infinite_at(v) {
            return Evaluation::exact(ExtReal::NegInf);
        }
        let t = p * uv;
        if t >= 0.0 {
            gains.push(t);
        } else {
            losses.push(-t);
        }
    }
    Evaluation::from_arith(ascending_sum(gains) - ascending_sum(losses))
}

/// Sums nonnegative terms smallest first; mirrored gain and loss terms then cancel exactly.
fn ascending_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// `C_u(X) = u⁻¹(E[u(X)])` with the generalized inverse `inf{x : u(x) ≥ y}`.
pub fn classical_ce(u: &UtilityFn, x: &Position) -> Evaluation {
    let eu = expected_utility(u, x);
    match eu.value {
        ExtReal::NegInf => Evaluation { value: ExtReal::NegInf, overflow: eu.overflow },
        v => Evaluation { value: u.generalized_inverse(v.to_f64()), overflow: eu.overflow },
    }
}

/// `M_u(X) = sup{m : E[u(X−m)] ≥ 0}`.
pub fn umean_ce(u: &UtilityFn, x: &Position) -> Evaluation {
    // The predicate "E[u(X−m)] < 0" is false for small m and true for large m.
    let below_zero = |m: f64| {
        let e: f64 = x.atoms().map(|(p, v)| p * u.eval(v - m)).sum();
        e < 0.0 || e.is_nan()
    };
    match solve::bracket(&below_zero, x.min(), x.max() + 1.0, bracket_limit(x)) {
        Bracket::Found { lo, hi } => Evaluation::exact(ExtReal::Finite(solve::bisect(&below_zero, lo, hi))),
        Bracket::TrueEverywhere => Evaluation::exact(ExtReal::NegInf),
        Bracket::FalseEverywhere => Evaluation::exact(ExtReal::PosInf),
    }
}

/// Shortfall risk `inf{m : E[ℓ(−X−m)] ≤ 0}`.
pub fn shortfall(l: &LossFn, x: &Position) -> Result<f64> {
    let acceptable = |m: f64| {
        let e: f64 = x.atoms().map(|(p, v)| p * l.eval(-v - m)).sum();
        e <= 0.0
    };
    let limit = bracket_limit(x);
    match solve::bracket(&acceptable, -x.max() - 1.0, -x.min(), limit) {
        Bracket::Found { lo, hi } => Ok(solve::bisect(&acceptable, lo, hi)),
        Bracket::TrueEverywhere => Err(Error::Diverged { direction: Direction::MinusInfinity, limit }),
        Bracket::FalseEverywhere => Err(Error::Diverged { direction: Direction::PlusInfinity, limit }),
    }
}

/// Entropic risk `(1/γ) log E[e^{−γX}]`, in log-sum-exp form.
pub fn entropic(gamma: f64, x: &Position) -> f64 {
    let terms: Vec<f64> = x.atoms().map(|(p, v)| p.ln() - gamma * v).collect();
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    (m + s.ln()) / gamma
}

/// `OCE_u(X) = sup_η η + E[u(X−η)]`.
pub fn oce(u: &UtilityFn, x: &Position) -> Result<Evaluation> {
    let h = |eta: f64| -> f64 {
        let e: f64 = x.atoms().map(|(p, v)| p * u.eval(v - eta)).sum();
        if e.is_nan() {
            f64::NEG_INFINITY
        } else {
            eta + e
        }
    };
    let concave = u.flags().concave;
    let mut half = (x.max() - x.min()) + 10.0;
    for _ in 0..=OCE_MAX_WIDENINGS {
        let (a, b) = (x.min() - half, x.max() + half);
        let (eta, val) = if concave { solve::golden_max(&h, a, b, OCE_REL_TOL, OCE_MAX_ITER) } else { grid_search(&h, a, b) };
        if !at_edge(&h, eta, a, b) {
            return Ok(Evaluation::from_arith(val.max(kink_max(u, x, &h, a, b))));
        }
        half *= OCE_WIDEN_FACTOR;
    }
    Err(Error::UnboundedSearch { widenings: OCE_MAX_WIDENINGS })
}

/// Best objective over the kinks `η = x_i − k` of a piecewise utility, where the maximum
/// of a piecewise-linear objective sits and golden-section search only gets close.
fn kink_max(u: &UtilityFn, x: &Position, h: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let Some(pieces) = u.pieces() else { return f64::NEG_INFINITY };
    let knots: Vec<f64> = pieces.iter().map(|p| p.from).filter(|k| k.is_finite()).collect();
    x.outcomes()
        .iter()
        .flat_map(|&v| knots.iter().map(move |&k| v - k))
        .filter(|eta| (a..=b).contains(eta))
        .map(h)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Argmax within 1% of an edge with the objective still rising towards that edge.
fn at_edge(h: &impl Fn(f64) -> f64, eta: f64, a: f64, b: f64) -> bool {
    let d = 0.01 * (b - a);
    let rising = |edge: f64, inner: f64| {
        let (he, hi) = (h(edge), h(inner));
        he > hi + 1e-12 * he.abs().max(hi.abs()).max(1.0)
    };
    (eta >= b - d && rising(b, b - d)) || (eta <= a + d && rising(a, a + d))
}

fn grid_search(h: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let n = OCE_GRID;
    let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let hs: Vec<f64> = xs.iter().map(|&e| h(e)).collect();
    let mut best = (xs[0], hs[0]);
    for i in 0..n {
        let left_ok = i == 0 || hs[i] >= hs[i - 1];
        let right_ok = i + 1 == n || hs[i] >= hs[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let (lo, hi) = (xs[i.saturating_sub(1)], xs[(i + 1).min(n - 1)]);
        let cand = solve::golden_max(h, lo, hi, OCE_REL_TOL, OCE_MAX_ITER);
        let cand = if cand.1 >= hs[i] { cand } else { (xs[i], hs[i]) };
        if cand.1 > best.1 {
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Position {
        Position::from_atoms(&[(0.2, -3.0), (0.5, 0.5), (0.3, 4.0)]).unwrap()
    }

    #[test]
    fn entropic_matches_shortfall() {
        let x = sample();
        for g in [0.3, 1.0, 2.5] {
            let sf = shortfall(&LossFn::exponential(g).unwrap(), &x).unwrap();
            assert!((sf - entropic(g, &x)).abs() < 1e-8, "{g}: {sf} vs {}", entropic(g, &x));
        }
        assert!((shortfall(&LossFn::linear(), &x).unwrap() + x.expectation()).abs() < 1e-8);
    }

    #[test]
    fn exponential_umean_is_negated_entropic() {
        let x = sample();
        let m = umean_ce(&UtilityFn::exponential(1.0).unwrap(), &x).value.finite().unwrap();
        assert!((m + entropic(1.0, &x)).abs() < 1e-8);
    }

    #[test]
    fn linear_utility_reduces_to_expectation() {
        let x = sample();
        let u = UtilityFn::linear();
        let e = x.expectation();
        assert!((expected_utility(&u, &x).value.to_f64() - e).abs() < 1e-12);
        assert!((classical_ce(&u, &x).value.to_f64() - e).abs() < 1e-12);
        assert!((umean_ce(&u, &x).value.to_f64() - e).abs() < 1e-8);
        assert!((oce(&u, &x).unwrap().value.to_f64() - e).abs() < 1e-8);
    }

    #[test]
    fn oce_sandwich_for_nonconcave_utility() {
        let x = sample();
        let u = UtilityFn::oce_remark(0.5, 2.0).unwrap();
        let o = oce(&u, &x).unwrap().value.to_f64();
        assert!(o <= x.expectation() + 1e-8);
        assert!(o >= expected_utility(&u, &x).value.to_f64() - 1e-8);
    }
}
