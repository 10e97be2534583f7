//! Piecewise-analytic utility and loss functions with tail metadata.
//!
//! Tail limits such as `lim u(x)/x` or `limsup u(-x)/u(x)` are read off the
//! outermost pieces instead of being estimated numerically.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::solve::{self, Bracket};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Form {
    /// `a·x + b`
    Linear { a: f64, b: f64 },
    /// `coef·sign(x)·|x|^exponent + offset`
    Power {
        coef: f64,
        exponent: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `a·(1 − e^{−rate·x}) + b`
    Exponential {
        a: f64,
        rate: f64,
        #[serde(default)]
        b: f64,
    },
    Constant { value: f64 },
    NegInfinity,
    PosInfinity,
}

impl Form {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Form::Linear { a, b } => a * x + b,
            Form::Power { coef, exponent, offset } => {
                if x == 0.0 {
                    offset
                } else {
                    coef * x.signum() * x.abs().powf(exponent) + offset
                }
            }
            Form::Exponential { a, rate, b } => {
                if a == 0.0 {
                    b
                } else {
                    -a * (-rate * x).exp_m1() + b
                }
            }
            Form::Constant { value } => value,
            Form::NegInfinity => f64::NEG_INFINITY,
            Form::PosInfinity => f64::INFINITY,
        }
    }

    fn is_increasing(&self) -> bool {
        match *self {
            Form::Linear { a, .. } => a >= 0.0,
            Form::Power { coef, exponent, .. } => coef >= 0.0 && exponent > 0.0,
            Form::Exponential { a, rate, .. } => a * rate >= 0.0 && rate != 0.0,
            _ => true,
        }
    }

    fn is_flat(&self) -> bool {
        match *self {
            Form::Linear { a, .. } => a == 0.0,
            Form::Power { coef, .. } => coef == 0.0,
            Form::Exponential { a, .. } => a == 0.0,
            _ => true,
        }
    }

    /// Solves `form(x) = y` for a strictly increasing form.
    fn solve(&self, y: f64) -> f64 {
        match *self {
            Form::Linear { a, b } => (y - b) / a,
            Form::Power { coef, exponent, offset } => {
                let z = (y - offset) / coef;
                z.signum() * z.abs().powf(1.0 / exponent)
            }
            Form::Exponential { a, rate, b } => -(-(y - b) / a).ln_1p() / rate,
            _ => f64::NAN,
        }
    }

    /// The form of `x ↦ −f(−x)`.
    fn mirror(&self) -> Form {
        match *self {
            Form::Linear { a, b } => Form::Linear { a, b: -b },
            Form::Power { coef, exponent, offset } => Form::Power { coef, exponent, offset: -offset },
            Form::Exponential { a, rate, b } => Form::Exponential { a: -a, rate: -rate, b: -b },
            Form::Constant { value } => Form::Constant { value: -value },
            Form::NegInfinity => Form::PosInfinity,
            Form::PosInfinity => Form::NegInfinity,
        }
    }

    fn growth_plus(&self) -> Growth {
        match *self {
            Form::Linear { a, b } => if a > 0.0 { Growth::Power { coef: a, exponent: 1.0 } } else { Growth::Const { value: b } },
            Form::Power { coef, exponent, offset } => {
                if coef > 0.0 { Growth::Power { coef, exponent } } else { Growth::Const { value: offset } }
            }
            Form::Exponential { a, rate, b } => {
                if a == 0.0 {
                    Growth::Const { value: b }
                } else if rate > 0.0 {
                    Growth::Const { value: a + b }
                } else {
                    Growth::Exp { coef: -a, rate: -rate }
                }
            }
            Form::Constant { value } => Growth::Const { value },
            Form::NegInfinity => Growth::NegInf,
            Form::PosInfinity => Growth::PosInf,
        }
    }

    fn growth_minus(&self) -> Growth {
        match *self {
            Form::Linear { a, b } => if a > 0.0 { Growth::Power { coef: a, exponent: 1.0 } } else { Growth::Const { value: b } },
            Form::Power { coef, exponent, offset } => {
                if coef > 0.0 { Growth::Power { coef, exponent } } else { Growth::Const { value: offset } }
            }
            Form::Exponential { a, rate, b } => {
                if a == 0.0 {
                    Growth::Const { value: b }
                } else if rate > 0.0 {
                    Growth::Exp { coef: a, rate }
                } else {
                    Growth::Const { value: a + b }
                }
            }
            Form::Constant { value } => Growth::Const { value },
            Form::NegInfinity => Growth::NegInf,
            Form::PosInfinity => Growth::PosInf,
        }
    }
}

/// Asymptotic class of a function at one end of the real line.
///
/// At `+∞`: `Power` means `≈ coef·x^exponent`, `Exp` means `≈ coef·e^{rate·x}`.
/// At `−∞`: `Power` means `≈ −coef·|x|^exponent`, `Exp` means `≈ −coef·e^{rate·|x|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Growth {
    NegInf,
    PosInf,
    Const { value: f64 },
    Power { coef: f64, exponent: f64 },
    Exp { coef: f64, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tails {
    pub minus: Growth,
    pub plus: Growth,
}

impl Tails {
    /// `lim_{x→∞} u(x)/x`.
    pub fn slope_plus(&self) -> f64 {
        match self.plus {
            Growth::Const { .. } | Growth::NegInf => 0.0,
            Growth::Power { coef, exponent } => {
                if exponent < 1.0 {
                    0.0
                } else if exponent == 1.0 {
                    coef
                } else {
                    f64::INFINITY
                }
            }
            Growth::Exp { .. } | Growth::PosInf => f64::INFINITY,
        }
    }

    /// `lim_{x→−∞} u(x)/x` (possibly `+∞`).
    pub fn slope_minus(&self) -> f64 {
        match self.minus {
            Growth::Const { .. } | Growth::PosInf => 0.0,
            Growth::Power { coef, exponent } => {
                if exponent < 1.0 {
                    0.0
                } else if exponent == 1.0 {
                    coef
                } else {
                    f64::INFINITY
                }
            }
            Growth::Exp { .. } | Growth::NegInf => f64::INFINITY,
        }
    }

    /// `limsup_{x→∞} u(−x)/u(x)` with the convention `0/0 = 0` and `c/0 = −∞` for `c < 0`.
    pub fn loss_gain_ratio(&self) -> f64 {
        // Numerator behaviour u(−x).
        let num_unbounded = matches!(self.minus, Growth::NegInf | Growth::Power { .. } | Growth::Exp { .. });
        match self.plus {
            Growth::Const { value: d } => {
                if num_unbounded {
                    return f64::NEG_INFINITY;
                }
                let n = match self.minus {
                    Growth::Const { value } => value,
                    _ => 0.0,
                };
                if d > 0.0 {
                    n / d
                } else if n < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
            Growth::Power { coef: cd, exponent: ed } => match self.minus {
                Growth::NegInf | Growth::Exp { .. } => f64::NEG_INFINITY,
                Growth::Const { .. } | Growth::PosInf => 0.0,
                Growth::Power { coef: cn, exponent: en } => {
                    if en > ed {
                        f64::NEG_INFINITY
                    } else if en == ed {
                        -cn / cd
                    } else {
                        0.0
                    }
                }
            },
            Growth::Exp { coef: cd, rate: rd } => match self.minus {
                Growth::NegInf => f64::NEG_INFINITY,
                Growth::Exp { coef: cn, rate: rn } => {
                    if rn > rd {
                        f64::NEG_INFINITY
                    } else if rn == rd {
                        -cn / cd
                    } else {
                        0.0
                    }
                }
                _ => 0.0,
            },
            Growth::NegInf | Growth::PosInf => f64::NAN,
        }
    }
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(with = "crate::ext::bound")]
    pub from: f64,
    #[serde(with = "crate::ext::bound")]
    pub to: f64,
    pub form: Form,
    /// Whether the left endpoint belongs to this piece (otherwise to the previous one).
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub include_from: bool,
}

impl Piece {
    pub fn new(from: f64, to: f64, form: Form) -> Self {
        Piece { from, to, form, include_from: true }
    }
}

/// Weakly increasing function given by analytic pieces partitioning ℝ.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PiecewiseFn {
    pieces: Vec<Piece>,
}

impl PiecewiseFn {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidFunction(m));
        if pieces.is_empty() {
            return bad("no pieces".into());
        }
        if pieces[0].from != f64::NEG_INFINITY {
            return bad("the first piece must start at -inf".into());
        }
        if pieces[pieces.len() - 1].to != f64::INFINITY {
            return bad("the last piece must end at inf".into());
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.from.is_nan() || p.to.is_nan() || p.from >= p.to {
                return bad(format!("piece {i}: empty interval [{}, {})", p.from, p.to));
            }
            if !p.form.is_increasing() {
                return bad(format!("piece {i}: form {:?} is decreasing", p.form));
            }
            if i > 0 && pieces[i - 1].to != p.from {
                return bad(format!("piece {i} starts at {} but piece {} ends at {}", p.from, i - 1, pieces[i - 1].to));
            }
        }
        // Junction monotonicity: left limit ≤ right limit.
        for i in 1..pieces.len() {
            let x = pieces[i].from;
            let left = pieces[i - 1].form.eval(x);
            let right = pieces[i].form.eval(x);
            if left > right + 1e-12 * left.abs().max(right.abs()).max(1.0) {
                return bad(format!("decreasing jump at x = {x}: {left} > {right}"));
            }
        }
        Ok(PiecewiseFn { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn piece_at(&self, x: f64) -> &Piece {
        for (i, p) in self.pieces.iter().enumerate() {
            let next_includes = self.pieces.get(i + 1).map(|n| n.include_from).unwrap_or(true);
            let inside = (x > p.from || (x == p.from && p.include_from)) && (x < p.to || (x == p.to && !next_includes));
            if inside {
                return p;
            }
        }
        &self.pieces[self.pieces.len() - 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.piece_at(x).form.eval(x)
    }

    fn left_limit_at_0(&self) -> f64 {
        let p = self.pieces.iter().find(|p| p.from < 0.0 && p.to >= 0.0).expect("pieces partition the line");
        p.form.eval(0.0)
    }

    pub fn is_neg_infinite_at(&self, x: f64) -> bool {
        matches!(self.piece_at(x).form, Form::NegInfinity)
    }

    pub fn tails(&self) -> Tails {
        Tails { minus: self.pieces[0].form.growth_minus(), plus: self.pieces[self.pieces.len() - 1].form.growth_plus() }
    }

    pub fn is_continuous(&self) -> bool {
        if self.pieces.iter().any(|p| matches!(p.form, Form::NegInfinity | Form::PosInfinity)) {
            return false;
        }
        (1..self.pieces.len()).all(|i| {
            let x = self.pieces[i].from;
            let (l, r) = (self.pieces[i - 1].form.eval(x), self.pieces[i].form.eval(x));
            (l - r).abs() <= 1e-12 * l.abs().max(1.0)
        })
    }

    /// `inf{x : f(x) ≥ y}`.
    pub fn generalized_inverse(&self, y: f64) -> ExtReal {
        if y == f64::NEG_INFINITY {
            return ExtReal::NegInf;
        }
        let tails = self.tails();
        for (i, p) in self.pieces.iter().enumerate() {
            match p.form {
                Form::NegInfinity => continue,
                Form::PosInfinity => return ExtReal::from_f64(p.from),
                _ => {}
            }
            let lo_val = if i == 0 {
                match tails.minus {
                    Growth::Const { value } => value,
                    Growth::PosInf => f64::INFINITY,
                    _ => f64::NEG_INFINITY,
                }
            } else {
                p.form.eval(p.from)
            };
            if lo_val >= y {
                return ExtReal::from_f64(p.from);
            }
            let hi_val = if p.to == f64::INFINITY {
                match tails.plus {
                    Growth::Const { value } => value,
                    Growth::NegInf => f64::NEG_INFINITY,
                    _ => f64::INFINITY,
                }
            } else {
                p.form.eval(p.to)
            };
            if hi_val < y || p.form.is_flat() {
                continue;
            }
            let x = p.form.solve(y);
            let x = if x.is_nan() { p.to } else { x.clamp(p.from, p.to) };
            return ExtReal::from_f64(x);
        }
        ExtReal::PosInf
    }

    fn mirrored(&self) -> PiecewiseFn {
        let n = self.pieces.len();
        let mut out = Vec::with_capacity(n);
        for i in (0..n).rev() {
            let p = &self.pieces[i];
            // The point −to belongs to the mirrored piece iff `to` belonged to piece i.
            let include_from = self.pieces.get(i + 1).map(|q| !q.include_from).unwrap_or(true);
            out.push(Piece { from: -p.to, to: -p.from, form: p.form.mirror(), include_from });
        }
        PiecewiseFn { pieces: out }
    }
}

/// Declared shape properties of a utility function; each is spot-checked at construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct UtilityFlags {
    pub increasing: bool,
    pub normalized: bool,
    pub concave: bool,
    pub concave_on_pos: bool,
    pub neg_star_shaped: bool,
    pub neg_star_shaped_on_pos: bool,
    pub below_identity: bool,
    pub strictly_negative_on_neg: bool,
    pub left_continuous_at_0: bool,
}

type Callback = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Piecewise(PiecewiseFn),
    Callback(Callback),
}

/// A utility function `u : ℝ → [−∞, ∞)`.
#[derive(Clone)]
pub struct UtilityFn {
    name: String,
    repr: Repr,
    tails: Tails,
    flags: UtilityFlags,
}

impl fmt::Debug for UtilityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UtilityFn").field("name", &self.name).field("flags", &self.flags).finish()
    }
}

/// Grid used to spot-check declared flags: ±10^t for 50 log-spaced t in [−3, 3].
pub fn check_grid() -> Vec<f64> {
    let pos: Vec<f64> = (0..50).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0)).collect();
    let mut g: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
    g.extend(pos);
    g
}

fn close_le(a: f64, b: f64) -> bool {
    a <= b || a <= b + 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// `left_limit` is `lim_{x↑0} u(x)`, exact for pieces and approximated by `u(−1e−300)` for callbacks.
fn verify_flags(u: &dyn Fn(f64) -> f64, left_limit: f64, flags: &UtilityFlags) -> Result<()> {
    let grid = check_grid();
    let vals: Vec<f64> = grid.iter().map(|&x| u(x)).collect();
    let fail = |what: &str, x: f64| Err(Error::InvalidFunction(format!("declared flag `{what}` fails at x = {x}")));
    if flags.increasing {
        for i in 1..grid.len() {
            if !close_le(vals[i - 1], vals[i]) {
                return fail("increasing", grid[i]);
            }
        }
    }
    if flags.normalized && u(0.0).abs() > 1e-12 {
        return fail("normalized", 0.0);
    }
    let concave_on = |lo: f64| -> Option<f64> {
        let pts: Vec<(f64, f64)> =
            std::iter::once(0.0).chain(grid.iter().copied()).filter(|&x| x >= lo).map(|x| (x, u(x))).collect();
        let mut pts = pts;
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pts.windows(3) {
            let [(a, fa), (b, fb), (c, fc)] = [w[0], w[1], w[2]];
            if !(fa.is_finite() && fb.is_finite() && fc.is_finite()) {
                continue;
            }
            let s1 = (fb - fa) / (b - a);
            let s2 = (fc - fb) / (c - b);
            if s2 > s1 + 1e-7 * s1.abs().max(1.0) {
                return Some(b);
            }
        }
        None
    };
    if flags.concave {
        if let Some(x) = concave_on(f64::NEG_INFINITY) {
            return fail("concave", x);
        }
    }
    if flags.concave_on_pos {
        if let Some(x) = concave_on(0.0) {
            return fail("concave_on_pos", x);
        }
    }
    // u(t)/t nonincreasing on each half-line.
    let star_fail = |neg_too: bool| -> Option<f64> {
        let ratio = |x: f64| u(x) / x;
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a < 0.0) != (b < 0.0) || (a < 0.0 && !neg_too) {
                continue;
            }
            let (ra, rb) = (ratio(a), ratio(b));
            if ra.is_nan() || rb.is_nan() {
                continue;
            }
            if !close_le(rb, ra) {
                return Some(b);
            }
        }
        None
    };
    if flags.neg_star_shaped {
        if let Some(x) = star_fail(true) {
            return fail("neg_star_shaped", x);
        }
    }
    if flags.neg_star_shaped_on_pos {
        if let Some(x) = star_fail(false) {
            return fail("neg_star_shaped_on_pos", x);
        }
    }
    if flags.below_identity {
        if let Some(&x) = grid.iter().find(|&&x| !close_le(u(x), x)) {
            return fail("below_identity", x);
        }
    }
    if flags.strictly_negative_on_neg {
        if let Some(&x) = grid.iter().find(|&&x| x < 0.0 && u(x) >= 0.0) {
            return fail("strictly_negative_on_neg", x);
        }
    }
    if flags.left_continuous_at_0 && (left_limit - u(0.0)).abs() > 1e-9 * u(0.0).abs().max(1.0) {
        return fail("left_continuous_at_0", 0.0);
    }
    Ok(())
}

impl UtilityFn {
    pub fn piecewise(name: impl Into<String>, pieces: Vec<Piece>, flags: UtilityFlags) -> Result<Self> {
        let f = PiecewiseFn::new(pieces)?;
        if f.pieces.iter().any(|p| matches!(p.form, Form::PosInfinity)) {
            return Err(Error::InvalidFunction("a utility function cannot take the value +inf".into()));
        }
        if matches!(f.pieces[f.pieces.len() - 1].form, Form::NegInfinity) {
            return Err(Error::InvalidFunction("a utility function must be finite for large x".into()));
        }
        let tails = f.tails();
        Self::build(name.into(), Repr::Piecewise(f), tails, flags)
    }

    /// A user callback with declared tail behaviour. Flags are spot-checked as for pieces.
    pub fn callback(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        tails: Tails,
        flags: UtilityFlags,
    ) -> Result<Self> {
        Self::build(name.into(), Repr::Callback(Arc::new(f)), tails, flags)
    }

    fn build(name: String, repr: Repr, tails: Tails, flags: UtilityFlags) -> Result<Self> {
        let u = UtilityFn { name, repr, tails, flags };
        if u.tails.slope_plus().is_infinite() {
            return Err(Error::InvalidFunction("superlinear growth at +inf: limsup u(x)/x must be finite".into()));
        }
        let left_limit = match &u.repr {
            Repr::Piecewise(f) => f.left_limit_at_0(),
            Repr::Callback(f) => f(-1e-300),
        };
        verify_flags(&|x| u.eval(x), left_limit, &flags)?;
        Ok(u)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> &UtilityFlags {
        &self.flags
    }

    pub fn tails(&self) -> &Tails {
        &self.tails
    }

    pub fn pieces(&self) -> Option<&[Piece]> {
        match &self.repr {
            Repr::Piecewise(f) => Some(f.pieces()),
            Repr::Callback(_) => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Piecewise(f) => f.eval(x),
            Repr::Callback(f) => f(x),
        }
    }

    /// True when `u(x) = −∞` by definition rather than by overflow.
    pub fn is_neg_infinite_at(&self, x: f64) -> bool {
        match &self.repr {
            Repr::Piecewise(f) => f.is_neg_infinite_at(x),
            Repr::Callback(f) => f(x) == f64::NEG_INFINITY,
        }
    }

    pub fn is_continuous(&self) -> bool {
        match &self.repr {
            Repr::Piecewise(f) => f.is_continuous(),
            Repr::Callback(_) => false,
        }
    }

    /// `u^{-1}(y) = inf{x : u(x) ≥ y}`.
    pub fn generalized_inverse(&self, y: f64) -> ExtReal {
        match &self.repr {
            Repr::Piecewise(f) => f.generalized_inverse(y),
            Repr::Callback(f) => {
                if y == f64::NEG_INFINITY {
                    return ExtReal::NegInf;
                }
                let pred = |x: f64| f(x) >= y;
                match solve::bracket(&pred, -1.0, 1.0, solve::BRACKET_LIMIT_FACTOR) {
                    Bracket::Found { lo, hi } => ExtReal::Finite(solve::bisect(&pred, lo, hi)),
                    Bracket::TrueEverywhere => ExtReal::NegInf,
                    Bracket::FalseEverywhere => ExtReal::PosInf,
                }
            }
        }
    }

    /// Serializable description (pieces, or the callback name).
    pub fn describe(&self) -> serde_json::Value {
        match &self.repr {
            Repr::Piecewise(f) => serde_json::json!({"name": self.name, "pieces": f.pieces, "flags": self.flags}),
            Repr::Callback(_) => serde_json::json!({"name": self.name, "callback": true, "tails": self.tails, "flags": self.flags}),
        }
    }

    // ---- presets ----

    /// `u(x) = 1 − e^{−γx}`.
    pub fn exponential(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Parameter(format!("risk aversion {gamma} must be positive")));
        }
        let flags = UtilityFlags {
            increasing: true,
            normalized: true,
            concave: true,
            concave_on_pos: true,
            neg_star_shaped: true,
            neg_star_shaped_on_pos: true,
            below_identity: gamma == 1.0,
            strictly_negative_on_neg: true,
            left_continuous_at_0: true,
        };
        Self::piecewise(
            format!("exp:{gamma}"),
            vec![Piece::new(f64::NEG_INFINITY, f64::INFINITY, Form::Exponential { a: 1.0, rate: gamma, b: 0.0 })],
            flags,
        )
    }

    pub fn linear() -> Self {
        let flags = UtilityFlags {
            increasing: true,
            normalized: true,
            concave: true,
            concave_on_pos: true,
            neg_star_shaped: true,
            neg_star_shaped_on_pos: true,
            below_identity: true,
            strictly_negative_on_neg: true,
            left_continuous_at_0: true,
        };
        Self::piecewise("linear", vec![Piece::new(f64::NEG_INFINITY, f64::INFINITY, Form::Linear { a: 1.0, b: 0.0 })], flags)
            .expect("identity is a valid utility")
    }

    /// S-shaped power utility: `x^α` for `x ≥ 0`, `−(−x)^β` for `x < 0`.
    pub fn power_s(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0) {
            return Err(Error::Parameter(format!("power-S exponents ({alpha}, {beta}) must lie in (0,1]")));
        }
        let flags = UtilityFlags {
            increasing: true,
            normalized: true,
            concave_on_pos: true,
            neg_star_shaped_on_pos: true,
            strictly_negative_on_neg: true,
            left_continuous_at_0: true,
            ..Default::default()
        };
        Self::piecewise(
            format!("power-s:{alpha},{beta}"),
            vec![
                Piece::new(f64::NEG_INFINITY, 0.0, Form::Power { coef: 1.0, exponent: beta, offset: 0.0 }),
                Piece::new(0.0, f64::INFINITY, Form::Power { coef: 1.0, exponent: alpha, offset: 0.0 }),
            ],
            flags,
        )
    }

    pub fn sqrt_s() -> Self {
        let mut u = Self::power_s(0.5, 0.5).expect("valid exponents");
        u.name = "sqrt-s".into();
        u
    }

    /// `x^α` above 1, `x` on `[0,1]`, `βx` below 0, with `0 < α < 1 ≤ β`.
    pub fn oce_remark(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0 && beta >= 1.0 && beta.is_finite()) {
            return Err(Error::Parameter(format!("need 0 < α < 1 ≤ β, got α = {alpha}, β = {beta}")));
        }
        let flags = UtilityFlags {
            increasing: true,
            normalized: true,
            concave: true,
            concave_on_pos: true,
            neg_star_shaped: true,
            neg_star_shaped_on_pos: true,
            below_identity: true,
            strictly_negative_on_neg: true,
            left_continuous_at_0: true,
        };
        Self::piecewise(
            format!("oce-remark:{alpha},{beta}"),
            vec![
                Piece::new(f64::NEG_INFINITY, 0.0, Form::Linear { a: beta, b: 0.0 }),
                Piece::new(0.0, 1.0, Form::Linear { a: 1.0, b: 0.0 }),
                Piece::new(1.0, f64::INFINITY, Form::Power { coef: 1.0, exponent: alpha, offset: 0.0 }),
            ],
            flags,
        )
    }

    /// `1 − e^{−x}` on `[0, ∞)` and `0` below: star-shaped but blind to losses.
    pub fn truncated_exponential() -> Self {
        let flags = UtilityFlags {
            increasing: true,
            normalized: true,
            concave_on_pos: true,
            neg_star_shaped: true,
            neg_star_shaped_on_pos: true,
            ..Default::default()
        };
        Self::piecewise(
            "truncated-exp",
            vec![
                Piece::new(f64::NEG_INFINITY, 0.0, Form::Constant { value: 0.0 }),
                Piece::new(0.0, f64::INFINITY, Form::Exponential { a: 1.0, rate: 1.0, b: 0.0 }),
            ],
            flags,
        )
        .expect("valid pieces")
    }

    /// `x/2` on `[0,∞)`, `2x` on `[−1,0)`, `−x² − 1` below −1: a concave utility whose
    /// gain tail stays linear.
    pub fn linear_gain_quadratic_loss() -> Self {
        let flags = UtilityFlags {
            increasing: true,
            normalized: true,
            concave: true,
            concave_on_pos: true,
            neg_star_shaped: true,
            neg_star_shaped_on_pos: true,
            below_identity: true,
            strictly_negative_on_neg: true,
            left_continuous_at_0: true,
        };
        Self::piecewise(
            "linear-gain-quadratic-loss",
            vec![
                Piece::new(f64::NEG_INFINITY, -1.0, Form::Power { coef: 1.0, exponent: 2.0, offset: -1.0 }),
                Piece::new(-1.0, 0.0, Form::Linear { a: 2.0, b: 0.0 }),
                Piece::new(0.0, f64::INFINITY, Form::Linear { a: 0.5, b: 0.0 }),
            ],
            flags,
        )
        .expect("valid pieces")
    }

    /// Parses a utility preset: `exp:γ`, `power-s:α,β`, `sqrt-s`, `linear`,
    /// `oce-remark[:α,β]`, `truncated-exp`, `linear-gain-quadratic-loss`.
    pub fn preset(name: &str) -> Result<Self> {
        let (head, args) = name.split_once(':').unwrap_or((name, ""));
        let nums = |n: usize| -> Result<Vec<f64>> {
            let v: std::result::Result<Vec<f64>, _> =
                args.split(',').filter(|s| !s.is_empty()).map(|s| s.trim().parse::<f64>()).collect();
            let v = v.map_err(|_| Error::Parameter(format!("bad numeric arguments in utility preset `{name}`")))?;
            if v.len() != n {
                return Err(Error::Parameter(format!("utility preset `{head}` takes {n} argument(s)")));
            }
            Ok(v)
        };
        match head {
            "exp" => Self::exponential(nums(1)?[0]),
            "power-s" => {
                let v = nums(2)?;
                Self::power_s(v[0], v[1])
            }
            "sqrt-s" => Ok(Self::sqrt_s()),
            "linear" => Ok(Self::linear()),
            "oce-remark" => {
                if args.is_empty() {
                    Self::oce_remark(0.5, 2.0)
                } else {
                    let v = nums(2)?;
                    Self::oce_remark(v[0], v[1])
                }
            }
            "truncated-exp" => Ok(Self::truncated_exponential()),
            "linear-gain-quadratic-loss" => Ok(Self::linear_gain_quadratic_loss()),
            _ => Err(Error::Parameter(format!("unknown utility preset `{name}`"))),
        }
    }
}

/// Declared properties of a loss function `ℓ : ℝ → (−∞, ∞]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossFlags {
    pub increasing: bool,
    pub normalized: bool,
    pub convex: bool,
    pub positive_on_pos: bool,
    pub pos_star_shaped_on_neg: bool,
}

/// A loss function, stored through its mirror utility `u(x) = −ℓ(−x)`.
#[derive(Debug, Clone)]
pub struct LossFn {
    name: String,
    pieces: Vec<Piece>,
    flags: LossFlags,
    mirror: UtilityFn,
}

impl LossFn {
    pub fn piecewise(name: impl Into<String>, pieces: Vec<Piece>, flags: LossFlags) -> Result<Self> {
        let name = name.into();
        let f = PiecewiseFn::new(pieces.clone())?;
        if f.pieces.iter().any(|p| matches!(p.form, Form::NegInfinity)) {
            return Err(Error::InvalidFunction("a loss function cannot take the value -inf".into()));
        }
        let uflags = UtilityFlags {
            increasing: flags.increasing,
            normalized: flags.normalized,
            concave: flags.convex,
            neg_star_shaped_on_pos: flags.pos_star_shaped_on_neg,
            strictly_negative_on_neg: flags.positive_on_pos,
            ..Default::default()
        };
        let mirror = UtilityFn::piecewise(format!("mirror of {name}"), f.mirrored().pieces, uflags)
            .map_err(|e| Error::InvalidFunction(format!("loss function `{name}`: {e}")))?;
        Ok(LossFn { name, pieces, flags, mirror })
    }

    /// `ℓ(x) = e^{γx} − 1`, giving the entropic risk measure.
    pub fn exponential(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Parameter(format!("risk aversion {gamma} must be positive")));
        }
        Self::piecewise(
            format!("exp-loss:{gamma}"),
            vec![Piece::new(f64::NEG_INFINITY, f64::INFINITY, Form::Exponential { a: -1.0, rate: -gamma, b: 0.0 })],
            LossFlags { increasing: true, normalized: true, convex: true, positive_on_pos: true, pos_star_shaped_on_neg: true },
        )
    }

    /// `ℓ(x) = x`, giving `E[−X]`.
    pub fn linear() -> Self {
        Self::piecewise(
            "linear-loss",
            vec![Piece::new(f64::NEG_INFINITY, f64::INFINITY, Form::Linear { a: 1.0, b: 0.0 })],
            LossFlags { increasing: true, normalized: true, convex: true, positive_on_pos: true, pos_star_shaped_on_neg: true },
        )
        .expect("identity is a valid loss")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> &LossFlags {
        &self.flags
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn eval(&self, x: f64) -> f64 {
        -self.mirror.eval(-x)
    }

    /// The utility `u(x) = −ℓ(−x)`.
    pub fn mirror(&self) -> &UtilityFn {
        &self.mirror
    }

    /// `limsup_{x→∞} ℓ(x)/ℓ(−x)`, equal to the loss/gain ratio of the mirror utility.
    pub fn tail_ratio(&self) -> f64 {
        self.mirror.tails().loss_gain_ratio()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piece_validation() {
        let lin = Form::Linear { a: 1.0, b: 0.0 };
        assert!(PiecewiseFn::new(vec![Piece::new(0.0, f64::INFINITY, lin.clone())]).is_err());
        assert!(PiecewiseFn::new(vec![
            Piece::new(f64::NEG_INFINITY, 0.0, lin.clone()),
            Piece::new(1.0, f64::INFINITY, lin.clone())
        ])
        .is_err());
        // Jump down at 0.
        assert!(PiecewiseFn::new(vec![
            Piece::new(f64::NEG_INFINITY, 0.0, Form::Constant { value: 1.0 }),
            Piece::new(0.0, f64::INFINITY, lin.clone())
        ])
        .is_err());
        assert!(PiecewiseFn::new(vec![Piece::new(f64::NEG_INFINITY, f64::INFINITY, Form::Linear { a: -1.0, b: 0.0 })]).is_err());
    }

    #[test]
    fn declared_flags_are_spot_checked() {
        let pieces = vec![Piece::new(f64::NEG_INFINITY, f64::INFINITY, Form::Exponential { a: 1.0, rate: 2.0, b: 0.0 })];
        let claim = UtilityFlags { below_identity: true, ..Default::default() };
        assert!(UtilityFn::piecewise("bad", pieces.clone(), claim).is_err());
        let claim = UtilityFlags { concave: true, increasing: true, ..Default::default() };
        assert!(UtilityFn::piecewise("ok", pieces, claim).is_ok());
        let convex = vec![Piece::new(f64::NEG_INFINITY, f64::INFINITY, Form::Exponential { a: -1.0, rate: -0.1, b: 0.0 })];
        assert!(UtilityFn::piecewise("superlinear", convex, UtilityFlags::default()).is_err());
    }

    #[test]
    fn breakpoint_ownership() {
        // Jump at 0 owned by the left piece.
        let f = PiecewiseFn::new(vec![
            Piece::new(f64::NEG_INFINITY, 0.0, Form::Constant { value: -1.0 }),
            Piece { from: 0.0, to: f64::INFINITY, form: Form::Constant { value: 0.0 }, include_from: false },
        ])
        .unwrap();
        assert_eq!(f.eval(0.0), -1.0);
        assert_eq!(f.eval(1e-300), 0.0);
        let m = f.mirrored();
        // mirror: x ↦ −f(−x); at 0 the value is −f(0) = 1, owned by the right piece.
        assert_eq!(m.eval(0.0), 1.0);
        assert_eq!(m.eval(-1e-300), 0.0);
    }

    #[test]
    fn generalized_inverse_handles_flats_and_jumps() {
        let u = UtilityFn::truncated_exponential();
        assert_eq!(u.generalized_inverse(0.0), ExtReal::NegInf);
        let x = u.generalized_inverse(0.5).finite().unwrap();
        assert!((x - 2f64.ln()).abs() < 1e-12);
        assert_eq!(u.generalized_inverse(1.0), ExtReal::PosInf);
        let s = UtilityFn::power_s(0.3, 0.7).unwrap();
        for &x in &[-5.0, -0.2, 0.0, 0.4, 9.0] {
            let back = s.generalized_inverse(s.eval(x)).finite().unwrap();
            assert!((back - x).abs() < 1e-9, "{x} -> {back}");
        }
    }

    #[test]
    fn tail_ratios() {
        let r = |a, b| UtilityFn::power_s(a, b).unwrap().tails().loss_gain_ratio();
        assert_eq!(r(0.3, 0.5), f64::NEG_INFINITY);
        assert_eq!(r(0.5, 0.5), -1.0);
        assert_eq!(r(0.5, 0.3), 0.0);
        assert_eq!(UtilityFn::exponential(1.0).unwrap().tails().loss_gain_ratio(), f64::NEG_INFINITY);
        assert_eq!(UtilityFn::linear().tails().loss_gain_ratio(), -1.0);
        assert_eq!(UtilityFn::truncated_exponential().tails().loss_gain_ratio(), 0.0);
        let rem = UtilityFn::oce_remark(0.5, 2.0).unwrap();
        assert_eq!(rem.tails().slope_minus(), 2.0);
        assert_eq!(rem.tails().slope_plus(), 0.0);
        assert_eq!(rem.tails().loss_gain_ratio(), f64::NEG_INFINITY);
        let q = UtilityFn::linear_gain_quadratic_loss();
        assert_eq!(q.tails().slope_minus(), f64::INFINITY);
        assert_eq!(q.tails().slope_plus(), 0.5);
    }

    #[test]
    fn loss_mirror() {
        let l = LossFn::exponential(0.7).unwrap();
        for &x in &[-3.0, -0.1, 0.0, 0.5, 4.0] {
            assert!((l.eval(x) - ((0.7 * x).exp() - 1.0)).abs() < 1e-12);
        }
        assert_eq!(l.tail_ratio(), f64::NEG_INFINITY);
        assert_eq!(LossFn::linear().tail_ratio(), -1.0);
    }

    #[test]
    fn presets_parse() {
        for p in ["exp:1", "power-s:0.3,0.5", "sqrt-s", "linear", "oce-remark", "oce-remark:0.4,3", "truncated-exp"] {
            UtilityFn::preset(p).unwrap();
        }
        assert!(UtilityFn::preset("power-s:0.3").is_err());
        assert!(UtilityFn::preset("nope").is_err());
    }
}
