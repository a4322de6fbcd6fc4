//! Peeling (BP) decoder on the erasure channel.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use super::graph::TannerGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelResult {
    /// erased variables BP could not recover; a stopping set
    pub residual: FixedBitSet,
    pub decoded: usize,
}

/// Runs BP until no check sees exactly one erased neighbour.
pub fn peel_bp(graph: &TannerGraph, erased: &FixedBitSet) -> PeelResult {
    peel_reduced(graph, &graph.reduced_checks(), erased)
}

pub(crate) fn peel_reduced(graph: &TannerGraph, checks: &[Vec<usize>], erased: &FixedBitSet) -> PeelResult {
    let var_checks = var_side(checks, graph.n);
    let mut residual = FixedBitSet::with_capacity(graph.n);
    residual.union_with(erased);
    let mut unknown: Vec<usize> = checks
        .iter()
        .map(|vars| vars.iter().filter(|&&v| residual.contains(v)).count())
        .collect();
    let mut queue: VecDeque<usize> = (0..checks.len()).filter(|&c| unknown[c] == 1).collect();
    let mut decoded = 0;
    while let Some(c) = queue.pop_front() {
        if unknown[c] != 1 {
            continue;
        }
        let Some(&v) = checks[c].iter().find(|&&v| residual.contains(v)) else {
            continue;
        };
        residual.set(v, false);
        decoded += 1;
        for &c2 in &var_checks[v] {
            unknown[c2] -= 1;
            if unknown[c2] == 1 {
                queue.push_back(c2);
            }
        }
    }
    PeelResult { residual, decoded }
}

/// Per-variable check lists matching reduced check neighbourhoods.
pub(crate) fn var_side(checks: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for (c, vars) in checks.iter().enumerate() {
        for &v in vars {
            adj[v].push(c);
        }
    }
    adj
}

/// Checks adjacent to at least one residual variable.
pub fn residual_checks(checks: &[Vec<usize>], residual: &FixedBitSet) -> Vec<usize> {
    (0..checks.len())
        .filter(|&c| checks[c].iter().any(|&v| residual.contains(v)))
        .collect()
}
