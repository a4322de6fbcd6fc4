//! BP with guessing: undetermined bits become free GF(2) unknowns and
//! every closed check that does not cancel adds a parity condition on them.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::gf2::IncrementalBasis;
use super::graph::TannerGraph;
use super::peel::{peel_reduced, residual_checks, var_side};

/// XOR of a constant and a set of guess indices, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GuessExpr {
    constant: bool,
    support: Vec<u32>,
}

impl GuessExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn guess(index: u32) -> Self {
        Self {
            constant: false,
            support: vec![index],
        }
    }

    /// Canonical form of an arbitrary index list; repeated indices cancel.
    pub fn from_parts(constant: bool, mut support: Vec<u32>) -> Self {
        support.sort_unstable();
        let mut out: Vec<u32> = Vec::with_capacity(support.len());
        for i in support {
            if out.last() == Some(&i) {
                out.pop();
            } else {
                out.push(i);
            }
        }
        Self { constant, support: out }
    }

    pub fn constant(&self) -> bool {
        self.constant
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        !self.constant && self.support.is_empty()
    }

    pub fn xor_with(&mut self, other: &GuessExpr) {
        self.constant ^= other.constant;
        if other.support.is_empty() {
            return;
        }
        let (a, b) = (&self.support, &other.support);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        self.support = out;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Strategy {
    /// one uniformly chosen undetermined bit per stall
    Sequential,
    /// every undetermined bit independently with probability Δγ/(1−γ)
    Rounds { delta_gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Decode,
    Guess,
    Condition,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Decode => "decode",
            EventKind::Guess => "guess",
            EventKind::Condition => "condition",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Event {
    pub time: usize,
    pub kind: EventKind,
    pub bit: usize,
    /// condition events only: whether the rank went up
    pub independent: bool,
    pub entropy: usize,
    pub determined: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrajectorySample {
    pub determined: usize,
    pub entropy: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxwellRun {
    pub n: usize,
    pub events: Vec<Event>,
    #[serde(skip)]
    pub conditions: Vec<GuessExpr>,
    pub trajectory: Vec<TrajectorySample>,
    pub guesses: usize,
    pub rank: usize,
    pub final_entropy: usize,
    pub guessed_bits: Vec<usize>,
    /// checks whose guessed inputs cancelled completely
    pub cancellations: usize,
}

impl MaxwellRun {
    pub fn peak_entropy(&self) -> usize {
        self.trajectory.iter().map(|t| t.entropy).max().unwrap_or(0)
    }
}

struct Decoder<'a> {
    checks: &'a [Vec<usize>],
    var_checks: Vec<Vec<usize>>,
    values: Vec<Option<GuessExpr>>,
    unknown: Vec<usize>,
    queue: VecDeque<usize>,
    undetermined: Vec<usize>,
    position: Vec<usize>,
    basis: IncrementalBasis,
    run: MaxwellRun,
    determined: usize,
}

impl Decoder<'_> {
    fn entropy(&self) -> usize {
        self.run.guesses - self.run.rank
    }

    fn log(&mut self, kind: EventKind, bit: usize, independent: bool) {
        let entropy = self.entropy();
        self.run.events.push(Event {
            time: self.run.events.len(),
            kind,
            bit,
            independent,
            entropy,
            determined: self.determined,
        });
        self.run.trajectory.push(TrajectorySample {
            determined: self.determined,
            entropy,
        });
    }

    fn assign(&mut self, v: usize, expr: GuessExpr, source: Option<usize>, kind: EventKind) {
        self.values[v] = Some(expr);
        let pos = self.position[v];
        self.undetermined.swap_remove(pos);
        if let Some(&moved) = self.undetermined.get(pos) {
            self.position[moved] = pos;
        }
        self.determined += 1;
        self.log(kind, v, false);
        for k in 0..self.var_checks[v].len() {
            let c = self.var_checks[v][k];
            self.unknown[c] -= 1;
            match self.unknown[c] {
                1 => self.queue.push_back(c),
                0 if source != Some(c) => self.close(c, v),
                _ => {}
            }
        }
    }

    fn close(&mut self, c: usize, v: usize) {
        let mut parity = GuessExpr::zero();
        let mut any_guess = false;
        for &u in &self.checks[c] {
            let e = self.values[u].as_ref().expect("closed check has no unknowns");
            any_guess |= !e.support.is_empty();
            parity.xor_with(e);
        }
        if parity.is_zero() {
            if any_guess {
                self.run.cancellations += 1;
            }
            return;
        }
        let independent = self.basis.insert(&parity.support);
        if independent {
            self.run.rank += 1;
        }
        self.run.conditions.push(parity);
        self.log(EventKind::Condition, v, independent);
    }

    fn propagate(&mut self) {
        while let Some(c) = self.queue.pop_front() {
            if self.unknown[c] != 1 {
                continue;
            }
            let mut expr = GuessExpr::zero();
            let mut target = None;
            for &u in &self.checks[c] {
                match &self.values[u] {
                    Some(e) => expr.xor_with(e),
                    None => target = Some(u),
                }
            }
            let v = target.expect("one unknown left");
            self.assign(v, expr, Some(c), EventKind::Decode);
        }
    }

    fn guess(&mut self, v: usize) {
        let g = self.run.guesses as u32;
        self.run.guesses += 1;
        self.run.guessed_bits.push(v);
        self.assign(v, GuessExpr::guess(g), None, EventKind::Guess);
    }
}

/// Decodes the all-zero codeword sent with the bits in `erased` lost.
pub fn maxwell_decode(graph: &TannerGraph, erased: &FixedBitSet, strategy: Strategy, seed: u64) -> MaxwellRun {
    let checks = graph.reduced_checks();
    let n = graph.n;
    let values: Vec<Option<GuessExpr>> = (0..n)
        .map(|v| if erased.contains(v) { None } else { Some(GuessExpr::zero()) })
        .collect();
    let undetermined: Vec<usize> = (0..n).filter(|&v| values[v].is_none()).collect();
    let mut position = vec![usize::MAX; n];
    for (i, &v) in undetermined.iter().enumerate() {
        position[v] = i;
    }
    let unknown: Vec<usize> = checks
        .iter()
        .map(|vars| vars.iter().filter(|&&v| values[v].is_none()).count())
        .collect();
    let queue = (0..checks.len()).filter(|&c| unknown[c] == 1).collect();
    let determined = n - undetermined.len();
    let mut d = Decoder {
        var_checks: var_side(&checks, n),
        checks: &checks,
        values,
        unknown,
        queue,
        undetermined,
        position,
        basis: IncrementalBasis::new(),
        run: MaxwellRun {
            n,
            events: Vec::new(),
            conditions: Vec::new(),
            trajectory: vec![TrajectorySample { determined, entropy: 0 }],
            guesses: 0,
            rank: 0,
            final_entropy: 0,
            guessed_bits: Vec::new(),
            cancellations: 0,
        },
        determined,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gamma = 0.0f64;
    loop {
        d.propagate();
        if d.undetermined.is_empty() {
            break;
        }
        match strategy {
            Strategy::Sequential => {
                let v = d.undetermined[rng.gen_range(0..d.undetermined.len())];
                d.guess(v);
            }
            Strategy::Rounds { delta_gamma } => {
                let step = delta_gamma.clamp(f64::MIN_POSITIVE, 1.0);
                let marked = loop {
                    let p = if gamma + step >= 1.0 { 1.0 } else { step / (1.0 - gamma) };
                    gamma = (gamma + step).min(1.0);
                    let marked: Vec<usize> =
                        d.undetermined.iter().copied().filter(|_| rng.gen_bool(p.min(1.0))).collect();
                    if !marked.is_empty() {
                        break marked;
                    }
                };
                for v in marked {
                    if d.values[v].is_none() {
                        d.guess(v);
                    }
                }
            }
        }
    }
    d.run.final_entropy = d.entropy();
    d.run
}

/// Local count of independent guesses from the final three-valued message
/// state on the residual graph: G − Σ(incoming-g − 1) + Σ over all-g
/// checks of (degree − 1). A lower bound in general, exact on trees.
pub fn guess_count_lower_bound(graph: &TannerGraph, erased: &FixedBitSet, run: &MaxwellRun) -> i64 {
    let checks = graph.reduced_checks();
    let residual = peel_reduced(graph, &checks, erased).residual;
    let res_checks: Vec<Vec<usize>> = residual_checks(&checks, &residual)
        .into_iter()
        .map(|c| checks[c].iter().copied().filter(|&v| residual.contains(v)).collect())
        .collect();
    let var_checks = var_side(&res_checks, graph.n);
    let mut guessed = FixedBitSet::with_capacity(graph.n);
    for &v in &run.guessed_bits {
        guessed.insert(v);
    }

    // check-to-variable messages, true meaning g
    let mut to_var: Vec<Vec<bool>> = res_checks.iter().map(|vars| vec![false; vars.len()]).collect();
    let incoming_g = |to_var: &Vec<Vec<bool>>, v: usize, skip: Option<usize>| -> bool {
        guessed.contains(v)
            || var_checks[v].iter().any(|&c| {
                Some(c) != skip && to_var[c][res_checks[c].iter().position(|&u| u == v).unwrap()]
            })
    };
    loop {
        let mut changed = false;
        for c in 0..res_checks.len() {
            let from: Vec<bool> = res_checks[c]
                .iter()
                .map(|&v| incoming_g(&to_var, v, Some(c)))
                .collect();
            for j in 0..from.len() {
                let all_other = from.iter().enumerate().all(|(k, &g)| k == j || g);
                if all_other && !to_var[c][j] {
                    to_var[c][j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut bound = run.guesses as i64;
    for v in residual.ones() {
        let lg = guessed.contains(v) as i64
            + var_checks[v]
                .iter()
                .filter(|&&c| to_var[c][res_checks[c].iter().position(|&u| u == v).unwrap()])
                .count() as i64;
        bound -= lg - 1;
    }
    for (c, vars) in res_checks.iter().enumerate() {
        let all_g = vars.iter().all(|&v| incoming_g(&to_var, v, Some(c)));
        if all_g {
            bound += vars.len() as i64 - 1;
        }
    }
    bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_cancels() {
        let mut a = GuessExpr::from_parts(false, vec![3, 1, 1, 2]);
        assert_eq!(a.support(), &[2, 3]);
        a.xor_with(&GuessExpr::from_parts(true, vec![2, 5]));
        assert_eq!(a.support(), &[3, 5]);
        assert!(a.constant());
    }

    #[test]
    fn double_edge_pair_bound_is_strict() {
        let g = TannerGraph::from_checks(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        let mut erased = FixedBitSet::with_capacity(2);
        erased.insert_range(..);
        let run = maxwell_decode(&g, &erased, Strategy::Sequential, 1);
        assert_eq!(run.final_entropy, 1);
        assert_eq!(guess_count_lower_bound(&g, &erased, &run), 0);
    }
}
