//! Loss Value at Risk and adjusted Expected Shortfall.

use crate::error::{Error, Result};
use crate::prob::Position;
use serde::{Deserialize, Serialize};

/// Piecewise-constant benchmark loss distribution `ℓ ↦ α(ℓ)` on `(−∞, 0]`.
///
/// Breakpoint `i` says `α(ℓ) = alpha_i` on `[ℓ_i, ℓ_{i+1})` (the last piece runs up to 0
/// inclusive); below the first breakpoint the profile equals `alpha_inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaProfile {
    breakpoints: Vec<Breakpoint>,
    alpha_inf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub l: f64,
    pub alpha: f64,
}

impl AlphaProfile {
    pub fn new(breakpoints: Vec<Breakpoint>, alpha_inf: f64) -> Result<Self> {
        let bad = |m: String| Err(Error::Parameter(format!("alpha profile: {m}")));
        if breakpoints.is_empty() {
            return bad("at least one breakpoint is required".into());
        }
        if !(0.0..1.0).contains(&alpha_inf) {
            return bad(format!("limit {alpha_inf} must lie in [0,1)"));
        }
        for (i, b) in breakpoints.iter().enumerate() {
            if !(b.l.is_finite() && b.l <= 0.0) {
                return bad(format!("breakpoint {i}: loss level {} must be finite and <= 0", b.l));
            }
            if !(b.alpha > 0.0 && b.alpha < 1.0) {
                return bad(format!("breakpoint {i}: level {} must lie in (0,1)", b.alpha));
            }
            if i > 0 {
                let prev = breakpoints[i - 1];
                if b.l <= prev.l {
                    return bad(format!("breakpoint {i}: loss levels must be strictly increasing"));
                }
                if b.alpha < prev.alpha {
                    return bad(format!("breakpoint {i}: levels must be increasing in the loss level"));
                }
            }
        }
        if alpha_inf > breakpoints[0].alpha {
            return bad(format!("limit {alpha_inf} exceeds the first level {}", breakpoints[0].alpha));
        }
        Ok(AlphaProfile { breakpoints, alpha_inf })
    }

    /// Constant profile `α(ℓ) ≡ α0`, for which LVaR reduces to `VaR_{α0}`.
    pub fn constant(alpha0: f64) -> Result<Self> {
        Self::new(vec![Breakpoint { l: 0.0, alpha: alpha0 }], alpha0)
    }

    /// Samples an increasing function on `n` equally spaced loss levels in `[l_min, 0]`.
    pub fn sampled(f: impl Fn(f64) -> f64, l_min: f64, n: usize, alpha_inf: f64) -> Result<Self> {
        if n < 1 || !(l_min < 0.0) {
            return Err(Error::Parameter("alpha profile: need n >= 1 and l_min < 0".into()));
        }
        let step = if n == 1 { 0.0 } else { -l_min / (n - 1) as f64 };
        let bps = (0..n).map(|i| {
            let l = if i + 1 == n { 0.0 } else { l_min + step * i as f64 };
            Breakpoint { l, alpha: f(l) }
        });
        Self::new(bps.collect(), alpha_inf)
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    /// `inf_ℓ α(ℓ)`.
    pub fn alpha_inf(&self) -> f64 {
        self.alpha_inf
    }

    /// `sup_{ℓ ≤ 0} VaR_{α(ℓ)}(X) + ℓ`. On each constant piece the supremum sits at its
    /// right end; the tail below the first breakpoint contributes `VaR_ᾱ(X) + ℓ_1`.
    pub fn lvar(&self, x: &Position) -> Result<f64> {
        let bps = &self.breakpoints;
        let mut best = x.var_level(self.alpha_inf)? + bps[0].l;
        for (i, b) in bps.iter().enumerate() {
            let right = bps.get(i + 1).map(|n| n.l).unwrap_or(0.0);
            best = best.max(x.var(b.alpha)? + right);
        }
        Ok(best)
    }
}

/// Risk profile `g : (0,1] → [0,∞]`: infinite on `(0, p)`, piecewise linear and
/// nonincreasing on `[p, 1]` through `knots`, with `g(1) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GProfile {
    inf_prefix: f64,
    knots: Vec<(f64, f64)>,
}

impl GProfile {
    pub fn new(inf_prefix: f64, knots: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |m: String| Err(Error::Parameter(format!("risk profile: {m}")));
        if !(0.0..=1.0).contains(&inf_prefix) {
            return bad(format!("infinite prefix {inf_prefix} must lie in [0,1]"));
        }
        if knots.is_empty() {
            return bad("no knots".into());
        }
        if knots[0].0 != inf_prefix {
            return bad(format!("first knot at {} must sit at the prefix end {inf_prefix}", knots[0].0));
        }
        let last = knots[knots.len() - 1];
        if last != (1.0, 0.0) {
            return bad(format!("last knot must be (1, 0), found {last:?}"));
        }
        for (i, w) in knots.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return bad(format!("knot {}: abscissae must increase", i + 1));
            }
            if w[1].1 > w[0].1 {
                return bad(format!("knot {}: g must be nonincreasing", i + 1));
            }
        }
        if knots.iter().any(|k| !k.1.is_finite() || k.1 < 0.0) {
            return bad("knot values must be finite and nonnegative".into());
        }
        if inf_prefix == 1.0 && knots.len() != 1 {
            return bad("with prefix 1 the only knot is (1, 0)".into());
        }
        Ok(GProfile { inf_prefix, knots })
    }

    /// `g = 0` on `[α0, 1]`, `∞` below: adjusted ES reduces to `ES_{α0}`.
    pub fn es_level(alpha0: f64) -> Result<Self> {
        if alpha0 == 1.0 {
            return Self::new(1.0, vec![(1.0, 0.0)]);
        }
        Self::new(alpha0, vec![(alpha0, 0.0), (1.0, 0.0)])
    }

    /// `p = sup{α : g(α) = ∞}`.
    pub fn inf_prefix(&self) -> f64 {
        self.inf_prefix
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn is_finite_everywhere(&self) -> bool {
        self.inf_prefix == 0.0
    }

    /// `g(α)` for `α ∈ [p, 1]` (and `g(0+)` at `α = 0` when `p = 0`).
    pub fn eval(&self, alpha: f64) -> f64 {
        if alpha < self.inf_prefix {
            return f64::INFINITY;
        }
        let k = &self.knots;
        for w in k.windows(2) {
            if alpha <= w[1].0 {
                let t = (alpha - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + t * (w[1].1 - w[0].1);
            }
        }
        k[k.len() - 1].1
    }

    /// `sup_{α ∈ (0,1]} ES_α(X) − g(α)`.
    ///
    /// On every cell where both `ES_α = v + c/α` and `g = A + Bα` are smooth the objective
    /// is convex in `α`, so the supremum sits at a cell endpoint. Stationary points are
    /// still evaluated; they are minima and never change the answer.
    pub fn adj_es(&self, x: &Position) -> Result<f64> {
        let p = self.inf_prefix;
        let pieces = x.es_pieces();
        let mut cands: Vec<f64> = vec![p, 1.0];
        cands.extend(self.knots.iter().map(|k| k.0));
        cands.extend(pieces.iter().map(|s| s.hi).filter(|&a| a > p && a < 1.0));
        for s in &pieces {
            for w in self.knots.windows(2) {
                let (lo, hi) = (s.lo.max(w[0].0), s.hi.min(w[1].0));
                let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                if hi > lo && slope < 0.0 && s.c > 0.0 {
                    let a = (s.c / -slope).sqrt();
                    if a > lo && a < hi {
                        cands.push(a);
                    }
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        for a in cands {
            let val = if a == 0.0 { x.ess_sup_neg() - self.eval(0.0) } else { x.es(a)? - self.eval(a) };
            best = best.max(val);
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile_is_var() {
        let x = Position::from_atoms(&[(0.2, -2.0), (0.3, -1.0), (0.5, 3.0)]).unwrap();
        let prof = AlphaProfile::constant(0.25).unwrap();
        assert_eq!(prof.lvar(&x).unwrap(), x.var(0.25).unwrap());
    }

    #[test]
    fn es_level_profile_is_es() {
        let x = Position::from_atoms(&[(0.1, -5.0), (0.3, -1.0), (0.6, 2.0)]).unwrap();
        for a in [0.05, 0.1, 0.37, 1.0] {
            let g = GProfile::es_level(a).unwrap();
            assert!((g.adj_es(&x).unwrap() - x.es(a).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_profile_gives_worst_case() {
        let x = Position::from_atoms(&[(0.1, -5.0), (0.3, -1.0), (0.6, 2.0)]).unwrap();
        let g = GProfile::new(0.0, vec![(0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(g.adj_es(&x).unwrap(), 5.0);
    }

    #[test]
    fn validation() {
        assert!(GProfile::new(0.2, vec![(0.3, 1.0), (1.0, 0.0)]).is_err());
        assert!(GProfile::new(0.0, vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).is_err());
        assert!(AlphaProfile::new(vec![Breakpoint { l: -1.0, alpha: 0.2 }, Breakpoint { l: 0.0, alpha: 0.1 }], 0.0).is_err());
        assert!(AlphaProfile::new(vec![Breakpoint { l: 0.0, alpha: 0.1 }], 0.2).is_err());
    }
}
