//! Exhaustive oracles for small codes: list decoding and exact EXIT
//! polynomials in rational arithmetic.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::Poly;

use super::gf2;
use super::graph::TannerGraph;

/// Largest list dimension `brute_force_list` will enumerate.
pub const LIST_DIMENSION_LIMIT: usize = 25;
/// Largest code dimension `exact_exit_polynomial` will enumerate.
pub const EXIT_DIMENSION_LIMIT: usize = 15;
/// Largest block length for the subset closure (2^(n−1) entries per bit).
pub const EXIT_LENGTH_LIMIT: usize = 24;

/// All codewords agreeing with the all-zero word on the received positions.
pub fn brute_force_list(graph: &TannerGraph, erased: &FixedBitSet) -> Result<Vec<FixedBitSet>> {
    let cols: Vec<usize> = erased.ones().filter(|&v| v < graph.n).collect();
    let rows: Vec<FixedBitSet> = graph
        .reduced_checks()
        .into_iter()
        .map(|vars| {
            let mut r = FixedBitSet::with_capacity(cols.len());
            for v in vars {
                if let Ok(j) = cols.binary_search(&v) {
                    r.toggle(j);
                }
            }
            r
        })
        .collect();
    let basis = gf2::null_space(&rows, cols.len());
    if basis.len() > LIST_DIMENSION_LIMIT {
        return Err(Error::OracleBound(format!(
            "list dimension {} exceeds {LIST_DIMENSION_LIMIT}",
            basis.len()
        )));
    }
    Ok(span(&basis, graph.n, |j| cols[j]))
}

fn span(basis: &[FixedBitSet], n: usize, col: impl Fn(usize) -> usize) -> Vec<FixedBitSet> {
    let lifted: Vec<FixedBitSet> = basis
        .iter()
        .map(|b| {
            let mut w = FixedBitSet::with_capacity(n);
            for j in b.ones() {
                w.insert(col(j));
            }
            w
        })
        .collect();
    let mut words = Vec::with_capacity(1 << lifted.len());
    for mask in 0u64..(1u64 << lifted.len()) {
        let mut w = FixedBitSet::with_capacity(n);
        for (i, b) in lifted.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w.symmetric_difference_with(b);
            }
        }
        words.push(w);
    }
    words
}

/// Exact per-bit EXIT functions. Bit i's function is
/// Σ_s counts[i][s] ε^s (1−ε)^(n−1−s).
#[derive(Debug, Clone, PartialEq)]
pub struct ExactExit {
    pub n: usize,
    pub k: usize,
    pub counts: Vec<Vec<u64>>,
    /// monomial coefficients of the bit average
    pub average: Vec<BigRational>,
    /// ∫₀¹ of the bit average
    pub integral: BigRational,
}

impl ExactExit {
    /// Whether the integral equals k/n exactly.
    pub fn area_identity_holds(&self) -> bool {
        self.integral == BigRational::new(BigInt::from(self.k), BigInt::from(self.n))
    }

    pub fn average_poly(&self) -> Poly {
        Poly::new(self.average.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn bit_value(&self, i: usize, epsilon: f64) -> f64 {
        let rest = self.n - 1;
        self.counts[i]
            .iter()
            .enumerate()
            .map(|(s, &c)| c as f64 * epsilon.powi(s as i32) * (1.0 - epsilon).powi((rest - s) as i32))
            .sum()
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut b = BigInt::from(1u32);
    for i in 0..k {
        b = b * (n - i) / (i + 1);
    }
    b
}

pub fn exact_exit_polynomial(graph: &TannerGraph) -> Result<ExactExit> {
    let n = graph.n;
    if n == 0 {
        return Err(Error::InvalidParameter("empty code".into()));
    }
    let basis = gf2::null_space(&graph.parity_rows(), n);
    let k = basis.len();
    if k > EXIT_DIMENSION_LIMIT || n > EXIT_LENGTH_LIMIT {
        return Err(Error::OracleBound(format!(
            "exact EXIT needs k ≤ {EXIT_DIMENSION_LIMIT} and n ≤ {EXIT_LENGTH_LIMIT}, got k = {k}, n = {n}"
        )));
    }
    let words = span(&basis, n, |j| j);
    let rest = n - 1;
    let mut counts = vec![vec![0u64; n]; n];
    let mut hit = vec![false; 1usize << rest];
    for i in 0..n {
        hit.iter_mut().for_each(|h| *h = false);
        // squeeze bit i out of the index
        let squeeze = |w: &FixedBitSet| -> usize {
            w.ones()
                .filter(|&j| j != i)
                .fold(0usize, |acc, j| acc | 1 << if j < i { j } else { j - 1 })
        };
        for w in words.iter().filter(|w| w.contains(i)) {
            hit[squeeze(w)] = true;
        }
        // upward closure: S is bad when it contains some codeword support
        for b in 0..rest {
            for s in 0..hit.len() {
                if s >> b & 1 == 1 && hit[s ^ (1 << b)] {
                    hit[s] = true;
                }
            }
        }
        for (s, &h) in hit.iter().enumerate() {
            if h {
                counts[i][s.count_ones() as usize] += 1;
            }
        }
    }

    let mut per_size = vec![BigInt::zero(); n];
    for row in &counts {
        for (s, &c) in row.iter().enumerate() {
            per_size[s] += BigInt::from(c);
        }
    }
    let nn = BigInt::from(n);
    let mut average = vec![BigRational::zero(); n];
    let mut integral = BigRational::zero();
    for (s, total) in per_size.iter().enumerate() {
        if total.is_zero() {
            continue;
        }
        // ε^s (1−ε)^(rest−s) = Σ_j C(rest−s, j) (−1)^j ε^(s+j)
        for j in 0..=(rest - s) {
            let mut term = binomial(rest - s, j) * total;
            if j % 2 == 1 {
                term = -term;
            }
            average[s + j] += BigRational::new(term, nn.clone());
        }
        integral += BigRational::new(total.clone(), &nn * &nn * binomial(rest, s));
    }
    Ok(ExactExit {
        n,
        k,
        counts,
        average,
        integral,
    })
}
