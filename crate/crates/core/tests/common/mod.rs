#![allow(dead_code)]

use maxwell_core::{DDPair, Poly};
use proptest::prelude::*;

/// Edge distribution as (node degree, edge fraction) pairs.
pub type Degrees = Vec<(usize, f64)>;

pub fn pair_from(lambda: &[(usize, f64)], rho: &[(usize, f64)]) -> DDPair {
    DDPair::from_degrees(lambda, rho).expect("valid test ensemble")
}

pub fn poly_from(terms: &[(usize, f64)]) -> Poly {
    Poly::from_terms(terms.iter().map(|&(d, c)| (d - 1, c)))
}

/// Σ c x^(d−1), written out without the library's polynomial type.
pub fn edge_eval(terms: &[(usize, f64)], x: f64) -> f64 {
    terms.iter().map(|&(d, c)| c * x.powi(d as i32 - 1)).sum()
}

pub fn edge_eval_derivative(terms: &[(usize, f64)], x: f64) -> f64 {
    terms
        .iter()
        .filter(|&&(d, _)| d >= 2)
        .map(|&(d, c)| c * (d as f64 - 1.0) * x.powi(d as i32 - 2))
        .sum()
}

/// ∫₀¹ Σ c x^(d−1) = Σ c / d
pub fn edge_integral(terms: &[(usize, f64)]) -> f64 {
    terms.iter().map(|&(d, c)| c / d as f64).sum()
}

/// Λ(x) = Σ (c/d) x^d / Σ c/d
pub fn node_eval(terms: &[(usize, f64)], x: f64) -> f64 {
    terms.iter().map(|&(d, c)| c / d as f64 * x.powi(d as i32)).sum::<f64>() / edge_integral(terms)
}

/// Plain DE from x = 1 for a fixed number of rounds.
pub fn naive_de(lambda: &[(usize, f64)], rho: &[(usize, f64)], eps: f64, rounds: usize) -> f64 {
    let mut x = 1.0;
    for _ in 0..rounds {
        x = eps * edge_eval(lambda, 1.0 - edge_eval(rho, 1.0 - x));
    }
    x
}

/// ε(x) computed directly.
pub fn naive_epsilon(lambda: &[(usize, f64)], rho: &[(usize, f64)], x: f64) -> f64 {
    x / edge_eval(lambda, 1.0 - edge_eval(rho, 1.0 - x))
}

/// BP threshold by scanning ε(x) on a fine grid, stability limit included.
pub fn naive_bp_threshold(lambda: &[(usize, f64)], rho: &[(usize, f64)]) -> f64 {
    let l2: f64 = lambda.iter().filter(|t| t.0 == 2).map(|t| t.1).sum();
    let rho_prime_one = edge_eval_derivative(rho, 1.0);
    let stab = if l2 > 0.0 { 1.0 / (l2 * rho_prime_one) } else { f64::INFINITY };
    let n = 200_000;
    (1..=n)
        .map(|i| naive_epsilon(lambda, rho, i as f64 / n as f64))
        .fold(stab, f64::min)
}

/// Composite Simpson on a uniform grid.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels * 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

fn normalized(raw: Vec<(usize, f64)>) -> Degrees {
    let mut merged: Vec<(usize, f64)> = Vec::new();
    for (d, w) in raw {
        match merged.iter_mut().find(|t| t.0 == d) {
            Some(t) => t.1 += w,
            None => merged.push((d, w)),
        }
    }
    merged.sort_by_key(|t| t.0);
    let s: f64 = merged.iter().map(|t| t.1).sum();
    merged.into_iter().map(|(d, w)| (d, w / s)).collect()
}

/// Random irregular pairs with variable degrees in 2..=12 and check degrees
/// in 3..=14, with design rate kept positive.
pub fn arb_ensemble() -> impl Strategy<Value = (Degrees, Degrees)> {
    let lam = prop::collection::vec((2usize..=12, 0.05f64..1.0), 1..=3);
    let rho = prop::collection::vec((3usize..=14, 0.05f64..1.0), 1..=2);
    (lam, rho)
        .prop_map(|(l, r)| (normalized(l), normalized(r)))
        .prop_filter("positive design rate", |(l, r)| edge_integral(r) < edge_integral(l) * 0.9)
}
