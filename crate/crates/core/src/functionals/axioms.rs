//! Randomized falsification of the axioms a functional declares.
//!
//! Every property is tested, declared or not; a violation only counts against the
//! specification when the property was declared. Finding no violation proves nothing.

use super::FunctionalSpec;
use crate::ext::ExtReal;
use crate::io::position_json;
use crate::prob::Position;
use crate::sampling::Sampler;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

pub const AXIOM_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Monotone,
    Normalized,
    CashAdditive,
    PosHomogeneous,
    StarShaped,
    Convex,
}

pub const ALL_AXIOMS: [Axiom; 6] =
    [Axiom::Monotone, Axiom::Normalized, Axiom::CashAdditive, Axiom::PosHomogeneous, Axiom::StarShaped, Axiom::Convex];

#[derive(Debug, Clone, Serialize)]
pub struct AxiomWitness {
    pub x: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Left- and right-hand side of the violated relation, in the risk view.
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    #[serde(skip)]
    pub position: Option<Position>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub declared: bool,
    pub holds: bool,
    pub cases: usize,
    pub skipped: usize,
    /// Largest relative violation seen (0 when none).
    pub max_deviation: f64,
    pub witness: Option<AxiomWitness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub functional: String,
    pub seed: u64,
    pub trials: usize,
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn get(&self, a: Axiom) -> &AxiomResult {
        self.results.iter().find(|r| r.axiom == a).expect("every axiom is reported")
    }

    /// Declared axioms that were falsified.
    pub fn violations(&self) -> Vec<&AxiomResult> {
        self.results.iter().filter(|r| r.declared && !r.holds).collect()
    }
}

/// One test case of a relation `lhs ⋈ rhs` in the risk view.
struct Case {
    lhs: ExtReal,
    rhs: ExtReal,
    witness: AxiomWitness,
}

enum Relation {
    Eq,
    /// `lhs ≤ rhs`
    Le,
}

fn deviation(rel: &Relation, lhs: ExtReal, rhs: ExtReal) -> f64 {
    match (lhs, rhs) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => {
            let scale = a.abs().max(b.abs()).max(1.0);
            match rel {
                Relation::Eq => (a - b).abs() / scale,
                Relation::Le => (a - b).max(0.0) / scale,
            }
        }
        _ => {
            let ok = match rel {
                Relation::Eq => lhs == rhs,
                Relation::Le => lhs <= rhs,
            };
            if ok {
                0.0
            } else {
                f64::INFINITY
            }
        }
    }
}

fn declared(spec: &FunctionalSpec, a: Axiom) -> bool {
    let f = spec.flags();
    match a {
        Axiom::Monotone => f.monotone,
        Axiom::Normalized => f.normalized,
        Axiom::CashAdditive => f.cash_additive,
        Axiom::PosHomogeneous => f.pos_homogeneous,
        Axiom::StarShaped => f.star_shaped,
        Axiom::Convex => f.convex,
    }
}

fn witness(x: &Position) -> AxiomWitness {
    AxiomWitness {
        x: position_json(x),
        y: None,
        lambda: None,
        m: None,
        t: None,
        lhs: ExtReal::ZERO,
        rhs: ExtReal::ZERO,
        position: Some(x.clone()),
    }
}

/// Builds the test case of axiom `a` from a base position and random parameters.
fn case(spec: &FunctionalSpec, a: Axiom, x: &Position, y: &Position, lambda: f64, m: f64, t: f64) -> crate::error::Result<Case> {
    let r = |p: &Position| spec.risk(p);
    let mut w = witness(x);
    let (lhs, rhs) = match a {
        Axiom::Monotone => {
            // Y = X + |Z| ≥ X must not be riskier.
            let bigger = x.zip_with(y, |a, b| a + b.abs())?;
            w.y = Some(position_json(&bigger));
            (r(&bigger)?, r(x)?)
        }
        Axiom::Normalized => {
            let zero = x.scale(0.0);
            (r(&zero)?, ExtReal::ZERO)
        }
        Axiom::CashAdditive => {
            w.m = Some(m);
            (r(&x.shift(m))?, r(x)?.add(-m))
        }
        Axiom::PosHomogeneous => {
            w.lambda = Some(lambda);
            (r(&x.scale(lambda))?, r(x)?.scale(lambda))
        }
        Axiom::StarShaped => {
            // r(λX) ≥ λ r(X) for λ > 1.
            w.lambda = Some(lambda);
            (r(x)?.scale(lambda), r(&x.scale(lambda))?)
        }
        Axiom::Convex => {
            let mix = x.zip_with(y, |a, b| t * a + (1.0 - t) * b)?;
            w.y = Some(position_json(y));
            w.t = Some(t);
            let rhs = match (r(x)?, r(y)?) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(t * a + (1.0 - t) * b),
                (a, b) => a.max(b),
            };
            (r(&mix)?, rhs)
        }
    };
    w.lhs = lhs;
    w.rhs = rhs;
    Ok(Case { lhs, rhs, witness: w })
}

fn relation(a: Axiom) -> Relation {
    match a {
        Axiom::Normalized | Axiom::CashAdditive | Axiom::PosHomogeneous => Relation::Eq,
        _ => Relation::Le,
    }
}

/// Tests every axiom on `trials` random cases (atom counts 1–8, outcomes in [−10, 10],
/// λ ∈ (1, 20), m ∈ [−5, 5], mixture weights in (0, 1)). Witness hints of custom
/// functionals are tried first with λ = 2 and m = 1.
pub fn axiom_check(spec: &FunctionalSpec, trials: usize, seed: u64) -> AxiomReport {
    let mut sampler = Sampler::new(seed).with_atoms(1, 8);
    if let Some(space) = spec.fixed_space() {
        sampler = sampler.on_space(space.clone());
    }
    let hints: Vec<Position> = match spec.variant() {
        super::Variant::Custom(c) => c.witness_hints.clone(),
        _ => Vec::new(),
    };
    let results = ALL_AXIOMS
        .iter()
        .map(|&a| {
            let rel = relation(a);
            let hint_cases = hints.iter().map(|h| case(spec, a, h, &h.scale(-1.0), 2.0, 1.0, 0.5));
            let random_cases: Vec<_> = (0..trials as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sampler.rng(i);
                    let x = sampler.draw(&mut rng);
                    let z = Position::new(x.space().clone(), (0..x.len()).map(|_| rng.random_range(-10.0..=10.0)).collect())
                        .expect("finite outcomes");
                    let lambda = rng.random_range(1.0..20.0);
                    let m = rng.random_range(-5.0..=5.0);
                    let t = rng.random_range(0.0..1.0);
                    case(spec, a, &x, &z, lambda, m, t)
                })
                .collect();
            let mut res = AxiomResult { axiom: a, declared: declared(spec, a), holds: true, cases: 0, skipped: 0, max_deviation: 0.0, witness: None };
            for c in hint_cases.chain(random_cases) {
                match c {
                    Err(_) => res.skipped += 1,
                    Ok(c) => {
                        res.cases += 1;
                        let d = deviation(&rel, c.lhs, c.rhs);
                        res.max_deviation = res.max_deviation.max(d);
                        if d > AXIOM_REL_TOL && res.holds {
                            res.holds = false;
                            res.witness = Some(c.witness);
                        }
                    }
                }
            }
            res
        })
        .collect();
    AxiomReport { functional: spec.label(), seed, trials, results }
}
