//! Many-trial runs and their aggregate statistics.

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::DDPair;
use crate::error::{Error, Result};

use super::graph::sample_graph;
use super::maxwell::{maxwell_decode, MaxwellRun, Strategy};

/// Seeds for one trial: graph, channel and guess streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub graph: u64,
    pub channel: u64,
    pub strategy: u64,
}

pub fn trial_seeds(master: u64, index: u64) -> TrialSeeds {
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ index);
    TrialSeeds {
        graph: rng.gen(),
        channel: rng.gen(),
        strategy: rng.gen(),
    }
}

pub fn erasure_pattern(n: usize, epsilon: f64, seed: u64) -> FixedBitSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut erased = FixedBitSet::with_capacity(n);
    for v in 0..n {
        if rng.gen_bool(epsilon.clamp(0.0, 1.0)) {
            erased.insert(v);
        }
    }
    erased
}

/// One fresh graph and channel realization per trial, decoded in parallel.
/// Results are ordered by trial index.
pub fn run_trials(
    pair: &DDPair,
    n: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
    strategy: Strategy,
) -> Result<Vec<MaxwellRun>> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("channel parameter {epsilon} outside [0, 1]")));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = trial_seeds(seed, i);
            let graph = sample_graph(pair, n, s.graph)?;
            let erased = erasure_pattern(n, epsilon, s.channel);
            Ok(maxwell_decode(&graph, &erased, strategy, s.strategy))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatsBin {
    pub bin: usize,
    pub determined_frac: f64,
    pub mean: f64,
    pub q05: f64,
    pub q95: f64,
}

/// Entropy at fraction `t` of determined bits: the last trajectory value
/// reached with no more than `t·n` bits determined, 0 before the start.
pub fn entropy_at(run: &MaxwellRun, t: f64) -> f64 {
    let limit = t * run.n as f64;
    let k = run.trajectory.partition_point(|p| p.determined as f64 <= limit);
    if k == 0 {
        0.0
    } else {
        run.trajectory[k - 1].entropy as f64
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean and 5%/95% quantiles of entropy/n per bin of determined fraction,
/// binning [start, 1] where start is the earliest starting point of any run.
pub fn trajectory_stats(runs: &[MaxwellRun], bins: usize) -> Result<Vec<StatsBin>> {
    if runs.len() < 2 {
        return Err(Error::InvalidParameter("trajectory statistics need at least two runs".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    let n = runs[0].n;
    if runs.iter().any(|r| r.n != n) {
        return Err(Error::InvalidParameter("runs have different block lengths".into()));
    }
    let start = runs
        .iter()
        .map(|r| r.trajectory.first().map_or(0, |p| p.determined))
        .min()
        .unwrap_or(0) as f64
        / n as f64;
    let width = (1.0 - start) / bins as f64;
    Ok((0..bins)
        .map(|b| {
            let t = start + (b as f64 + 0.5) * width;
            let mut vals: Vec<f64> = runs.iter().map(|r| entropy_at(r, t) / n as f64).collect();
            vals.sort_by(f64::total_cmp);
            StatsBin {
                bin: b,
                determined_frac: t,
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                q05: quantile(&vals, 0.05),
                q95: quantile(&vals, 0.95),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Concentration {
    pub mean: f64,
    pub std_dev: f64,
    /// final entropy / n per trial
    pub samples: Vec<f64>,
}

/// Spread of final entropy / n over independent graph and channel draws.
pub fn entropy_concentration(pair: &DDPair, n: usize, epsilon: f64, trials: usize, seed: u64) -> Result<Concentration> {
    if trials < 30 {
        return Err(Error::InvalidParameter(format!("need at least 30 trials, got {trials}")));
    }
    let runs = run_trials(pair, n, epsilon, trials, seed, Strategy::Sequential)?;
    let samples: Vec<f64> = runs.iter().map(|r| r.final_entropy as f64 / n as f64).collect();
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    Ok(Concentration {
        mean,
        std_dev: var.sqrt(),
        samples,
    })
}
