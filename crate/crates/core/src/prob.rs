//! Finite probability spaces, positions on them, and the quantile / tail
//! primitives (VaR, ES, worst case) every functional is built from.

use crate::error::{Error, Result};
use serde::Serialize;
use std::sync::Arc;

/// Tolerance used when validating that weights sum to one and when comparing
/// cumulative probability mass against a level.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSpace {
    probs: Vec<f64>,
}

impl FiniteSpace {
    pub fn new(probs: Vec<f64>) -> Result<Arc<Self>> {
        if probs.is_empty() {
            return Err(Error::InvalidSpace("at least one atom is required".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::InvalidSpace(format!("atom {i}: probability {p} is not strictly positive")));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidSpace(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Arc::new(FiniteSpace { probs }))
    }

    pub fn uniform(n: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(Error::InvalidSpace("at least one atom is required".into()));
        }
        // Distribute the rounding residue on the last atom so the sum is exactly representable.
        let mut probs = vec![1.0 / n as f64; n];
        let head: f64 = probs[..n - 1].iter().sum();
        probs[n - 1] = 1.0 - head;
        FiniteSpace::new(probs)
    }

    /// Two-atom space `{A, A^c}` with `P(A) = p`.
    pub fn binary(p: f64) -> Result<Arc<Self>> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidSpace(format!("P(A) = {p} must lie in (0,1)")));
        }
        FiniteSpace::new(vec![p, 1.0 - p])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, mask: &EventMask) -> f64 {
        self.probs.iter().zip(mask.members()).filter(|(_, &m)| m).map(|(p, _)| p).sum()
    }
}

/// An event, one membership flag per atom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventMask {
    members: Vec<bool>,
}

impl EventMask {
    pub fn new(space: &FiniteSpace, members: Vec<bool>) -> Result<Self> {
        if members.len() != space.len() {
            return Err(Error::InvalidPosition(format!(
                "event has {} flags but the space has {} atoms",
                members.len(),
                space.len()
            )));
        }
        Ok(EventMask { members })
    }

    pub fn from_indices(space: &FiniteSpace, idx: &[usize]) -> Result<Self> {
        let mut members = vec![false; space.len()];
        for &i in idx {
            if i >= space.len() {
                return Err(Error::InvalidPosition(format!("atom index {i} out of range")));
            }
            members[i] = true;
        }
        Ok(EventMask { members })
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn complement(&self) -> Self {
        EventMask { members: self.members.iter().map(|m| !m).collect() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// One piece of the closed form of `α ↦ ES_α(X)`: on `(lo, hi]` we have
/// `ES_α(X) = v + c/α` with `c ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsPiece {
    pub lo: f64,
    pub hi: f64,
    pub v: f64,
    pub c: f64,
}

impl EsPiece {
    pub fn at(&self, alpha: f64) -> f64 {
        if self.c == 0.0 {
            self.v
        } else {
            self.v + self.c / alpha
        }
    }
}

/// A random variable on a finite space.
#[derive(Debug, Clone)]
pub struct Position {
    space: Arc<FiniteSpace>,
    x: Vec<f64>,
}

impl PartialEq for Position {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other) && self.x == other.x
    }
}

impl Position {
    pub fn new(space: Arc<FiniteSpace>, outcomes: Vec<f64>) -> Result<Self> {
        if outcomes.len() != space.len() {
            return Err(Error::InvalidPosition(format!(
                "{} outcomes for a space with {} atoms",
                outcomes.len(),
                space.len()
            )));
        }
        if let Some(i) = outcomes.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPosition(format!("atom {i}: outcome {} is not finite", outcomes[i])));
        }
        Ok(Position { space, x: outcomes })
    }

    /// Builds the space and the position in one go from `(p, x)` pairs.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let space = FiniteSpace::new(atoms.iter().map(|a| a.0).collect())?;
        Position::new(space, atoms.iter().map(|a| a.1).collect())
    }

    pub fn constant(space: Arc<FiniteSpace>, c: f64) -> Result<Self> {
        let n = space.len();
        Position::new(space, vec![c; n])
    }

    pub fn indicator(space: Arc<FiniteSpace>, a: &EventMask) -> Result<Self> {
        let x = a.members().iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        Position::new(space, x)
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.x
    }

    pub fn probs(&self) -> &[f64] {
        self.space.probs()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn same_space(&self, other: &Position) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space.probs == other.space.probs
    }

    /// Iterator over `(p_i, x_i)`.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.space.probs.iter().copied().zip(self.x.iter().copied())
    }

    pub fn expectation(&self) -> f64 {
        self.atoms().map(|(p, x)| p * x).sum()
    }

    /// `ess sup(-X)`, the worst-case loss.
    pub fn ess_sup_neg(&self) -> f64 {
        self.x.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(-v))
    }

    pub fn min(&self) -> f64 {
        self.x.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.x.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn prob_negative(&self) -> f64 {
        self.atoms().filter(|&(_, x)| x < 0.0).map(|(p, _)| p).sum()
    }

    pub fn has_losses(&self) -> bool {
        self.x.iter().any(|&v| v < 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.x.iter().all(|&v| v == self.x[0])
    }

    /// Outcomes sorted ascending with their probabilities; equal outcomes merged.
    pub fn sorted_atoms(&self) -> Vec<(f64, f64)> {
        let mut atoms: Vec<(f64, f64)> = self.x.iter().copied().zip(self.space.probs.iter().copied()).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        merged
    }

    /// Value at Risk, `inf{m : P(X+m<0) ≤ α}`: the negated upper α-quantile.
    pub fn var(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!("VaR level {alpha} must lie in (0,1)")));
        }
        Ok(self.var_unchecked(alpha))
    }

    /// `VaR_0 := ess sup(-X)`.
    pub fn var0(&self) -> f64 {
        self.ess_sup_neg()
    }

    /// VaR at a level in `[0,1)`, using `var0` at zero.
    pub fn var_level(&self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 {
            Ok(self.var0())
        } else {
            self.var(alpha)
        }
    }

    pub(crate) fn var_unchecked(&self, alpha: f64) -> f64 {
        let mut cum = 0.0;
        let atoms = self.sorted_atoms();
        for &(x, p) in &atoms {
            cum += p;
            if cum > alpha + PROB_TOL {
                return -x;
            }
        }
        // Only reachable when rounding leaves the total mass within tolerance of α.
        -atoms.last().map(|a| a.0).unwrap_or(0.0)
    }

    /// Expected Shortfall `(1/α)∫_0^α VaR_β dβ`; `ES_1 = E[-X]`.
    pub fn es(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Parameter(format!("ES level {alpha} must lie in (0,1]")));
        }
        if alpha == 1.0 {
            return Ok(-self.expectation());
        }
        let mut remaining = alpha;
        let mut acc = 0.0;
        for (x, p) in self.sorted_atoms() {
            let w = p.min(remaining);
            acc += w * -x;
            remaining -= w;
            if remaining <= 0.0 {
                break;
            }
        }
        Ok(acc / alpha)
    }

    /// Closed form of `α ↦ ES_α(X)` as pieces over the cumulative distribution.
    /// The first piece starts at 0 with `c = 0`, so its value there is `ess sup(-X)`.
    pub fn es_pieces(&self) -> Vec<EsPiece> {
        let atoms = self.sorted_atoms();
        let mut pieces = Vec::with_capacity(atoms.len());
        let mut lo = 0.0;
        let mut mass_below = 0.0; // Σ_{j<k} p_j
        let mut first_moment_below = 0.0; // Σ_{j<k} p_j x_j
        for (k, &(x, p)) in atoms.iter().enumerate() {
            let hi = if k + 1 == atoms.len() { 1.0 } else { lo + p };
            let c = (mass_below * x - first_moment_below).max(0.0);
            pieces.push(EsPiece { lo, hi, v: -x, c });
            mass_below += p;
            first_moment_below += p * x;
            lo = hi;
        }
        pieces
    }

    /// `λX + m`.
    pub fn scale_add(&self, lambda: f64, m: f64) -> Position {
        Position { space: self.space.clone(), x: self.x.iter().map(|v| lambda * v + m).collect() }
    }

    pub fn scale(&self, lambda: f64) -> Position {
        Position { space: self.space.clone(), x: self.x.iter().map(|v| lambda * v).collect() }
    }

    pub fn shift(&self, m: f64) -> Position {
        Position { space: self.space.clone(), x: self.x.iter().map(|v| v + m).collect() }
    }

    pub fn add(&self, other: &Position) -> Result<Position> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn zip_with(&self, other: &Position, f: impl Fn(f64, f64) -> f64) -> Result<Position> {
        if !self.same_space(other) {
            return Err(Error::SpaceMismatch);
        }
        Ok(Position { space: self.space.clone(), x: self.x.iter().zip(&other.x).map(|(&a, &b)| f(a, b)).collect() })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Position {
        Position { space: self.space.clone(), x: self.x.iter().map(|&v| f(v)).collect() }
    }

    /// `X·1_A`.
    pub fn restrict(&self, a: &EventMask) -> Result<Position> {
        if a.len() != self.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(Position {
            space: self.space.clone(),
            x: self.x.iter().zip(a.members()).map(|(&v, &m)| if m { v } else { 0.0 }).collect(),
        })
    }

    /// `X - λ·1_A`.
    pub fn minus_indicator(&self, lambda: f64, a: &EventMask) -> Result<Position> {
        if a.len() != self.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(Position {
            space: self.space.clone(),
            x: self.x.iter().zip(a.members()).map(|(&v, &m)| if m { v - lambda } else { v }).collect(),
        })
    }

    pub fn le(&self, other: &Position) -> bool {
        self.same_space(other) && self.x.iter().zip(&other.x).all(|(a, b)| a <= b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(atoms: &[(f64, f64)]) -> Position {
        Position::from_atoms(atoms).unwrap()
    }

    #[test]
    fn space_validation() {
        assert!(FiniteSpace::new(vec![]).is_err());
        assert!(FiniteSpace::new(vec![0.5, 0.0, 0.5]).is_err());
        assert!(FiniteSpace::new(vec![0.5, 0.4]).is_err());
        assert!(FiniteSpace::new(vec![1.0]).is_ok());
        assert!(FiniteSpace::uniform(7).is_ok());
    }

    #[test]
    fn expectation_and_worst_case() {
        let y = pos(&[(0.5, 1.0), (0.5, -1.0 / 3.0)]);
        assert!((y.expectation() - 1.0 / 3.0).abs() < 1e-15);
        let x = Position::new(FiniteSpace::uniform(3).unwrap(), vec![-1.0, 5.0, 0.0]).unwrap();
        assert_eq!(x.ess_sup_neg(), 1.0);
    }

    #[test]
    fn var_boundary_uses_upper_quantile() {
        // P(A) = α exactly: the loss atom does not exceed the level.
        let x = pos(&[(0.1, -1.0), (0.9, 0.0)]);
        assert_eq!(x.var(0.1).unwrap(), 0.0);
        assert_eq!(x.var(0.09).unwrap(), 1.0);
    }

    #[test]
    fn var_rejects_bad_levels() {
        let x = pos(&[(1.0, 0.0)]);
        assert!(x.var(0.0).is_err());
        assert!(x.var(1.0).is_err());
        assert!(x.es(0.0).is_err());
        assert!(x.es(1.5).is_err());
    }

    #[test]
    fn es_pieces_reproduce_es() {
        let x = pos(&[(0.2, -2.0), (0.3, -1.0), (0.5, 3.0)]);
        for &a in &[0.05, 0.2, 0.3, 0.5, 0.77, 1.0] {
            let piece = x.es_pieces().into_iter().find(|p| a > p.lo && a <= p.hi).unwrap();
            assert!((piece.at(a) - x.es(a).unwrap()).abs() < 1e-12, "alpha {a}");
        }
    }

    #[test]
    fn restrict_and_indicator() {
        let s = FiniteSpace::new(vec![0.3, 0.7]).unwrap();
        let a = EventMask::from_indices(&s, &[0]).unwrap();
        let ind = Position::indicator(s.clone(), &a).unwrap();
        assert!((ind.expectation() - 0.3).abs() < 1e-15);
        let x = Position::new(s, vec![4.0, 5.0]).unwrap();
        assert_eq!(x.restrict(&a).unwrap().outcomes(), &[4.0, 0.0]);
        assert_eq!(x.minus_indicator(2.0, &a.complement()).unwrap().outcomes(), &[4.0, 3.0]);
    }
}
