//! One-dimensional bracketing, bisection and golden-section search.

/// Bracket expansion never goes beyond `|m| ≤ BRACKET_LIMIT_FACTOR · max(1, scale)`.
pub const BRACKET_LIMIT_FACTOR: f64 = 1e12;
pub const BISECT_REL_TOL: f64 = 1e-10;
pub const BISECT_MAX_ITER: usize = 200;

/// Outcome of a bracket search for a monotone predicate that is false below
/// its switch point and true above it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bracket {
    Found { lo: f64, hi: f64 },
    /// Predicate still true at `-limit`: the switch point is at `-∞` as far as we can tell.
    TrueEverywhere,
    /// Predicate still false at `+limit`.
    FalseEverywhere,
}

pub fn bracket(pred: &impl Fn(f64) -> bool, a: f64, b: f64, limit: f64) -> Bracket {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut step = (hi - lo).max(1.0);
    while !pred(hi) {
        if hi >= limit {
            return Bracket::FalseEverywhere;
        }
        lo = hi;
        step *= 2.0;
        hi = (hi + step).min(limit);
    }
    while pred(lo) {
        if lo <= -limit {
            return Bracket::TrueEverywhere;
        }
        hi = lo;
        step *= 2.0;
        lo = (lo - step).max(-limit);
    }
    Bracket::Found { lo, hi }
}

/// Bisection on a bracket with `!pred(lo) && pred(hi)`; returns the upper end,
/// i.e. a point of the true region within the tolerance of the switch point.
pub fn bisect(pred: &impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= BISECT_REL_TOL * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64, max_iter: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..max_iter {
        if (b - a).abs() <= rel_tol * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let ends = [(a, f(a)), (b, f(b)), (c, fc), (d, fd)];
    ends.into_iter().fold((a, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}
