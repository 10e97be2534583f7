#![allow(dead_code)]

use losssense::Position;
use proptest::prelude::*;

/// Positions with `min..=max` atoms, weights bounded away from zero, outcomes in [-10, 10].
pub fn position(min: usize, max: usize) -> impl Strategy<Value = Position> {
    prop::collection::vec((0.05f64..1.0, -10f64..10.0), min..=max).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.0).sum();
        let atoms: Vec<(f64, f64)> = atoms.iter().map(|&(w, v)| (w / total, v)).collect();
        Position::from_atoms(&atoms).unwrap()
    })
}

pub fn nonconstant(min: usize, max: usize) -> impl Strategy<Value = Position> {
    position(min.max(2), max).prop_filter("nonconstant", |x| !x.is_constant())
}

pub fn with_losses(min: usize, max: usize) -> impl Strategy<Value = Position> {
    position(min, max).prop_filter("carries a loss", |x| x.has_losses())
}

/// Six atoms with masses on the 0.01 lattice and outcomes on the 0.01 lattice: every
/// quantile jump then lands on a cell boundary of the fine midpoint grids used as oracles.
pub fn lattice_position() -> impl Strategy<Value = Position> {
    (prop::collection::btree_set(1u32..100, 5), prop::collection::vec(-1000i32..=1000, 6)).prop_map(|(cuts, vals)| {
        let mut edges = vec![0u32];
        edges.extend(cuts);
        edges.push(100);
        let atoms: Vec<(f64, f64)> = edges.windows(2).zip(vals).map(|(w, v)| ((w[1] - w[0]) as f64 / 100.0, v as f64 / 100.0)).collect();
        Position::from_atoms(&atoms).unwrap()
    })
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
