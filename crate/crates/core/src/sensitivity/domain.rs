//! Domains of positions on which sensitivity is studied.

use crate::prob::Position;
use serde::{Serialize, Serializer};
use std::fmt;
use std::sync::Arc;

pub type DomainPredicate = Arc<dyn Fn(&Position) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum DomainSpec {
    /// All positions.
    Full,
    /// `X < 0` almost surely.
    SureLosses,
    /// `X ≤ 0`, `X ≠ 0`.
    PureLosses,
    /// `E[X] ≤ 0`, `X ≠ 0`.
    ExpectedLosses,
    Custom { name: String, contains: DomainPredicate, is_cone: bool, cash_stable: bool },
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for DomainSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// Tolerance for `E[X] ≤ 0` membership, absorbing summation rounding.
const EXPECTATION_TOL: f64 = 1e-12;

impl DomainSpec {
    pub fn name(&self) -> String {
        match self {
            DomainSpec::Full => "full".into(),
            DomainSpec::SureLosses => "sure".into(),
            DomainSpec::PureLosses => "pure".into(),
            DomainSpec::ExpectedLosses => "expected".into(),
            DomainSpec::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    pub fn parse(s: &str) -> Option<DomainSpec> {
        match s {
            "full" => Some(DomainSpec::Full),
            "sure" | "sure-losses" => Some(DomainSpec::SureLosses),
            "pure" | "pure-losses" => Some(DomainSpec::PureLosses),
            "expected" | "expected-losses" => Some(DomainSpec::ExpectedLosses),
            _ => None,
        }
    }

    pub fn is_cone(&self) -> bool {
        match self {
            DomainSpec::Custom { is_cone, .. } => *is_cone,
            _ => true,
        }
    }

    /// `S + ℝ ⊂ S`.
    pub fn cash_stable(&self) -> bool {
        match self {
            DomainSpec::Full => true,
            DomainSpec::Custom { cash_stable, .. } => *cash_stable,
            _ => false,
        }
    }

    pub fn contains(&self, x: &Position) -> bool {
        let nonzero = x.outcomes().iter().any(|&v| v != 0.0);
        match self {
            DomainSpec::Full => true,
            DomainSpec::SureLosses => x.outcomes().iter().all(|&v| v < 0.0),
            DomainSpec::PureLosses => nonzero && x.outcomes().iter().all(|&v| v <= 0.0),
            DomainSpec::ExpectedLosses => nonzero && x.expectation() <= EXPECTATION_TOL * x.sup_norm().max(1.0),
            DomainSpec::Custom { contains, .. } => contains(x),
        }
    }

    /// Whether every position of `self` also lies in `other` (for the built-in tags).
    pub fn is_subset_of(&self, other: &DomainSpec) -> bool {
        use DomainSpec::*;
        match (self, other) {
            (_, Full) => true,
            (SureLosses, SureLosses | PureLosses | ExpectedLosses) => true,
            (PureLosses, PureLosses | ExpectedLosses) => true,
            (ExpectedLosses, ExpectedLosses) => true,
            _ => false,
        }
    }
}
