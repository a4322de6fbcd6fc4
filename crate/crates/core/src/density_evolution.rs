//! BP density evolution on the erasure channel: fixed points, the elementary
//! thresholds and the three-valued recursion used by the Maxwell decoder.

use crate::ensemble::DDPair;
use crate::error::{Error, Result};
use crate::roots::{bisect, golden_min, sign_change_roots};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
/// Grid used for scans of ε(x) and its derivative.
pub const DEFAULT_GRID: usize = 10_000;
/// Per-step decrease below which the iteration is considered stalled.
const STALL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DEFixedPoint {
    pub epsilon: f64,
    /// variable-to-check erased fraction
    pub x: f64,
    /// check-to-variable erased fraction
    pub y: f64,
}

/// ε(x) together with its stationary points on (0, 1), which split [0, 1]
/// into pieces where ε is monotone.
#[derive(Debug, Clone)]
pub struct EpsilonProfile<'a> {
    pair: &'a DDPair,
    critical: Vec<f64>,
}

impl<'a> EpsilonProfile<'a> {
    pub fn new(pair: &'a DDPair, grid: usize) -> Self {
        let critical = critical_points(pair, grid);
        Self { pair, critical }
    }

    pub fn pair(&self) -> &'a DDPair {
        self.pair
    }

    /// Stationary points of ε(x) in (0, 1), increasing.
    pub fn critical_points(&self) -> &[f64] {
        &self.critical
    }

    pub fn epsilon(&self, x: f64) -> f64 {
        self.pair.epsilon_at(x)
    }

    /// Boundaries `0 = b₀ < b₁ < … < 1` of the monotone pieces.
    pub fn piece_boundaries(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.critical.len() + 2);
        b.push(0.0);
        b.extend_from_slice(&self.critical);
        b.push(1.0);
        b
    }

    /// Largest x ∈ [0, 1] with ε(x) ≤ ε, i.e. the largest DE fixed point.
    pub fn largest_fixed_point(&self, epsilon: f64) -> f64 {
        if epsilon >= 1.0 {
            return 1.0;
        }
        let b = self.piece_boundaries();
        for w in b.windows(2).rev() {
            let (lo, hi) = (w[0], w[1]);
            let (e_lo, e_hi) = (self.epsilon(lo), self.epsilon(hi));
            if e_hi <= epsilon {
                return hi;
            }
            if e_lo <= epsilon {
                // increasing piece crossing the level
                return bisect(|x| self.epsilon(x) - epsilon, lo, hi, 1e-16);
            }
        }
        0.0
    }

    pub fn fixed_point(&self, epsilon: f64) -> DEFixedPoint {
        let x = self.largest_fixed_point(epsilon);
        DEFixedPoint {
            epsilon,
            x,
            y: self.pair.y(x),
        }
    }
}

/// Sign changes of ε'(x) on (0, 1), refined by bisection to 1e-12 or better.
pub fn critical_points(pair: &DDPair, grid: usize) -> Vec<f64> {
    sign_change_roots(|x| pair.epsilon_slope_numerator(x), 0.0, 1.0, grid, 1e-15)
}

/// Largest fixed point of x ← ελ(y(x)) by iteration from x = 1, finished
/// with an exact solve on the monotone pieces of ε(x).
pub fn de_fixed_point(pair: &DDPair, epsilon: f64, tol: f64, max_iter: usize) -> Result<DEFixedPoint> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "channel parameter {epsilon} outside [0, 1]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let lambda = pair.lambda();
    let mut x = 1.0f64;
    let mut converged = false;
    for _ in 0..max_iter {
        let next = epsilon * lambda.eval(pair.y(x));
        let step = x - next;
        x = next;
        if step.abs() < tol || step < STALL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "density evolution",
            iterations: max_iter,
            last: x,
        });
    }
    let profile = EpsilonProfile::new(pair, DEFAULT_GRID);
    let refined = profile.largest_fixed_point(epsilon);
    // iteration from above never crosses the largest fixed point
    let x = if refined <= x + 1e-9 { refined } else { x };
    let x = if x < tol { 0.0 } else { x };
    Ok(DEFixedPoint {
        epsilon,
        x,
        y: pair.y(x),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpThreshold {
    pub epsilon: f64,
    /// location of the minimum of ε(x); 0 when the stability limit wins
    pub x: f64,
}

/// inf over x ∈ (0, 1] of ε(x), including the x → 0 limit.
pub fn bp_threshold(pair: &DDPair, tol: f64) -> BpThreshold {
    let n = DEFAULT_GRID;
    let mut best_i = n;
    let mut best = pair.epsilon_at(1.0);
    for i in 1..n {
        let e = pair.epsilon_at(i as f64 / n as f64);
        if e < best {
            best = e;
            best_i = i;
        }
    }
    let lo = (best_i - 1) as f64 / n as f64;
    let hi = ((best_i + 1).min(n)) as f64 / n as f64;
    let (mut x, mut e) = golden_min(|x| pair.epsilon_at(x), lo.max(1e-300), hi, tol.max(1e-14));
    if best < e {
        x = best_i as f64 / n as f64;
        e = best;
    }
    let stab = pair.stability_limit();
    if stab <= e {
        BpThreshold { epsilon: stab, x: 0.0 }
    } else {
        BpThreshold { epsilon: e, x }
    }
}

/// 1/(λ'(0)·y'(0)); +∞ when λ'(0) = 0.
pub fn stability_threshold(pair: &DDPair) -> f64 {
    pair.stability_limit()
}

pub fn shannon_threshold(pair: &DDPair) -> f64 {
    1.0 - pair.design_rate()
}

/// Message fractions of the three-valued recursion: known (0), erased (?)
/// and expressed through guesses (g).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeValuedState {
    pub left: [f64; 3],
    pub right: [f64; 3],
    pub epsilon: f64,
    pub gamma: f64,
    pub iterations: usize,
}

impl ThreeValuedState {
    pub fn erased(&self) -> f64 {
        self.left[1]
    }

    pub fn guessed(&self) -> f64 {
        self.left[2]
    }
}

/// Iterates the check/variable updates with a fraction `gamma` of the erased
/// bits replaced by guesses, starting from all-erased messages.
pub fn three_valued_de(pair: &DDPair, epsilon: f64, gamma: f64, tol: f64) -> Result<ThreeValuedState> {
    for (name, v) in [("channel parameter", epsilon), ("guess fraction", gamma)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} {v} outside [0, 1]")));
        }
    }
    let lambda = pair.lambda();
    let (mut a_q, mut a_g) = (1.0f64, 0.0f64);
    let mut right = [0.0; 3];
    for it in 1..=DEFAULT_MAX_ITER {
        let b_q = pair.y(a_q);
        let b_nonzero = pair.y(a_q + a_g);
        let b_g = (b_nonzero - b_q).max(0.0);
        right = [1.0 - b_nonzero, b_q, b_g];

        let next_q = (1.0 - gamma) * epsilon * lambda.eval(b_q);
        let next_nonzero = epsilon * lambda.eval(b_q + b_g);
        let next_g = (next_nonzero - next_q).max(0.0);

        let moved = (next_q - a_q).abs().max((next_g - a_g).abs());
        a_q = next_q;
        a_g = next_g;
        if moved < tol {
            return Ok(ThreeValuedState {
                left: [1.0 - a_q - a_g, a_q, a_g],
                right,
                epsilon,
                gamma,
                iterations: it,
            });
        }
    }
    let _ = right;
    Err(Error::NonConvergence {
        what: "three-valued density evolution",
        iterations: DEFAULT_MAX_ITER,
        last: a_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_36_fixed_point() {
        let p = DDPair::regular(3, 6).unwrap();
        let fp = de_fixed_point(&p, 0.46, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((fp.x - 0.3789).abs() < 1e-4);
        assert!((fp.y - 0.9076).abs() < 1e-4);
        let low = de_fixed_point(&p, 0.40, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(low.x, 0.0);
        let one = de_fixed_point(&p, 1.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!((one.x, one.y), (1.0, 1.0));
    }

    #[test]
    fn regular_36_threshold() {
        let p = DDPair::regular(3, 6).unwrap();
        let t = bp_threshold(&p, 1e-12);
        assert!((t.epsilon - 0.4294).abs() < 1e-4);
        assert!((t.x - 0.2606).abs() < 1e-3);
    }

    #[test]
    fn cycle_ensemble_is_stability_limited() {
        let p = DDPair::regular(2, 4).unwrap();
        let t = bp_threshold(&p, 1e-12);
        assert!((t.epsilon - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(t.x, 0.0);
    }
}
