use std::path::Path;

use maxwell_core::counting::{check_tightness, conditional_entropy, psi, residual_ensemble};
use maxwell_core::density_evolution::{bp_threshold, shannon_threshold, stability_threshold};
use maxwell_core::ensemble::load_ensemble;
use maxwell_core::exit_maxwell::{
    bp_area, bp_curve, compute_partition, ebp_area, ebp_curve, first_upper_bound, map_exit_curve, map_threshold,
    maxwell_trajectory, ExitCurve,
};
use maxwell_core::finite_sim::stats::TrialSeeds;
use maxwell_core::finite_sim::{
    exact_exit_polynomial, hamming, repetition, run_trials, single_parity_check, trajectory_stats, Strategy,
    TannerGraph,
};
use maxwell_core::{DDPair, Error, Poly, Result};
use serde_json::json;

use crate::output::{emit, fmt12, Table};
use crate::{Command, Common, Kind, StrategyArg};

fn need_ensemble(c: &Common) -> Result<DDPair> {
    let path = c
        .ensemble
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("--ensemble is required".into()))?;
    load_ensemble(path).map_err(|e| match e {
        Error::Json(j) => Error::Parse(format!("{}: {j}", path.display())),
        Error::Io(io) => Error::InvalidParameter(format!("{}: {io}", path.display())),
        other => other,
    })
}

fn check_epsilon(e: f64) -> Result<()> {
    if (0.0..=1.0).contains(&e) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("--epsilon {e} outside [0, 1]")))
    }
}

fn check_common(c: &Common) -> Result<()> {
    if !(c.tol > 0.0 && c.tol < 1.0) {
        return Err(Error::InvalidParameter(format!("--tol {} must lie in (0, 1)", c.tol)));
    }
    if c.grid < 10 {
        return Err(Error::InvalidParameter(format!("--grid {} below 10", c.grid)));
    }
    Ok(())
}

fn write<S: serde::Serialize>(table: &Table, sidecar: Option<&S>, out: Option<&Path>) -> Result<()> {
    emit(table, sidecar, out).map_err(Error::Io)
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Thresholds(c) => thresholds(&c),
        Command::Curve { common, kind } => curve(&common, kind),
        Command::Partition(c) => partition(&c),
        Command::Trajectory { common, epsilon } => trajectory(&common, epsilon),
        Command::Psi { common, epsilon } => psi_scan(&common, epsilon),
        Command::EntropySweep { common, points } => entropy_sweep(&common, points),
        Command::Simulate {
            common,
            epsilon,
            n,
            trials,
            seed,
            strategy,
            delta_gamma,
            bins,
            log_dir,
        } => {
            check_common(&common)?;
            check_epsilon(epsilon)?;
            if n == 0 || trials < 2 {
                return Err(Error::InvalidParameter("need --n ≥ 1 and --trials ≥ 2".into()));
            }
            let strategy = match strategy {
                StrategyArg::Sequential => Strategy::Sequential,
                StrategyArg::Rounds if delta_gamma > 0.0 && delta_gamma <= 1.0 => Strategy::Rounds { delta_gamma },
                StrategyArg::Rounds => {
                    return Err(Error::InvalidParameter(format!("--delta-gamma {delta_gamma} outside (0, 1]")))
                }
            };
            let pair = need_ensemble(&common)?;
            let sim = SimulateArgs {
                epsilon,
                n,
                trials,
                seed,
                strategy,
                bins,
            };
            simulate(&common, &pair, &sim, log_dir.as_deref())
        }
        Command::ExactExit { common, graph, code } => exact_exit(&common, graph.as_deref(), code.as_deref()),
        Command::Gldpc { common, hamming } => gldpc(&common, hamming),
    }
}

fn thresholds(c: &Common) -> Result<()> {
    check_common(c)?;
    let pair = need_ensemble(c)?;
    let bp = bp_threshold(&pair, c.tol);
    let stab = stability_threshold(&pair);
    let sh = shannon_threshold(&pair);
    let upper = first_upper_bound(&pair, c.tol)?;
    let map = map_threshold(&pair, c.tol)?;
    let mut t = Table::new(&["bp", "stability", "shannon", "map_upper", "map", "map_tight", "design_rate"]);
    t.push(vec![
        fmt12(bp.epsilon),
        fmt12(stab),
        fmt12(sh),
        fmt12(upper),
        fmt12(map.epsilon),
        map.tight.to_string(),
        fmt12(pair.design_rate()),
    ]);
    let meta = json!({ "bp_x": bp.x, "map": map });
    write(&t, Some(&meta), c.out.as_deref())
}

fn curve_table(curve: &ExitCurve) -> Table {
    let mut t = Table::new(&["x", "epsilon", "h"]);
    for s in &curve.samples {
        t.push_f64(&[s.x, s.epsilon, s.h]);
    }
    t
}

fn curve(c: &Common, kind: Kind) -> Result<()> {
    check_common(c)?;
    let pair = need_ensemble(c)?;
    match kind {
        Kind::Bp => {
            let curve = bp_curve(&pair, c.grid)?;
            let partition = compute_partition(&pair, c.grid.max(1000))?;
            let area = bp_area(&pair, &partition);
            let meta = json!({ "partition": partition, "area": area });
            write(&curve_table(&curve), Some(&meta), c.out.as_deref())
        }
        Kind::Ebp => {
            let curve = ebp_curve(&pair, c.grid)?;
            let meta = json!({ "area": ebp_area(&pair), "design_rate": pair.design_rate() });
            write(&curve_table(&curve), Some(&meta), c.out.as_deref())
        }
        Kind::Map => {
            let map = map_exit_curve(&pair, c.grid)?;
            let meta = json!({
                "jumps": map.jumps,
                "segments": map.segments,
                "area": map.area(),
                "design_rate": pair.design_rate(),
            });
            write(&curve_table(&map.curve), Some(&meta), c.out.as_deref())
        }
    }
}

fn partition(c: &Common) -> Result<()> {
    check_common(c)?;
    let pair = need_ensemble(c)?;
    let p = compute_partition(&pair, c.grid.max(1000))?;
    let mut t = Table::new(&["i", "x_low", "x_high", "jump_epsilon"]);
    for (i, (&(lo, hi), &e)) in p.intervals.iter().zip(&p.jump_epsilons).enumerate() {
        t.push(vec![(i + 1).to_string(), fmt12(lo), fmt12(hi), fmt12(e)]);
    }
    write(&t, Some(&p), c.out.as_deref())
}

fn trajectory(c: &Common, epsilon: f64) -> Result<()> {
    check_common(c)?;
    check_epsilon(epsilon)?;
    let pair = need_ensemble(c)?;
    let points = maxwell_trajectory(&pair, epsilon, c.grid)?;
    let mut t = Table::new(&["gamma", "determined_fraction", "entropy"]);
    for p in &points {
        t.push_f64(&[p.gamma, p.determined_fraction, p.entropy]);
    }
    write(&t, Some(&points), c.out.as_deref())
}

fn psi_scan(c: &Common, epsilon: f64) -> Result<()> {
    check_common(c)?;
    check_epsilon(epsilon)?;
    let pair = need_ensemble(c)?;
    let report = check_tightness(&pair, epsilon, c.grid)?;
    let mut t = Table::new(&["u", "v", "psi"]);
    let res = residual_ensemble(&pair, epsilon)?;
    if !res.is_empty() {
        let ddp = res.normalized()?;
        for i in 0..=c.grid {
            let p = psi(&ddp, i as f64 / c.grid as f64);
            t.push_f64(&[p.u, p.v, p.value]);
        }
    }
    write(&t, Some(&report), c.out.as_deref())
}

fn entropy_sweep(c: &Common, points: usize) -> Result<()> {
    check_common(c)?;
    if points == 0 {
        return Err(Error::InvalidParameter("--points must be positive".into()));
    }
    let pair = need_ensemble(c)?;
    let mut t = Table::new(&["epsilon", "entropy", "certified"]);
    for i in 1..=points {
        let e = i as f64 / points as f64;
        let h = conditional_entropy(&pair, e)?;
        t.push(vec![fmt12(e), fmt12(h.value), h.certified.to_string()]);
    }
    write(&t, None::<&()>, c.out.as_deref())
}

struct SimulateArgs {
    epsilon: f64,
    n: usize,
    trials: usize,
    seed: u64,
    strategy: Strategy,
    bins: usize,
}

fn trial_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MAXWELL_THREADS") {
        let k: usize = v
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("MAXWELL_THREADS={v:?} is not a count")))?;
        b = b.num_threads(k.max(1));
    }
    b.build().map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn simulate(c: &Common, pair: &DDPair, a: &SimulateArgs, log_dir: Option<&Path>) -> Result<()> {
    let runs = trial_pool()?.install(|| run_trials(pair, a.n, a.epsilon, a.trials, a.seed, a.strategy))?;
    let stats = trajectory_stats(&runs, a.bins)?;
    if let Some(dir) = log_dir {
        std::fs::create_dir_all(dir)?;
        for (i, run) in runs.iter().enumerate() {
            let mut t = Table::new(&["time", "kind", "bit", "entropy", "determined"]);
            for e in &run.events {
                t.push(vec![
                    e.time.to_string(),
                    e.kind.as_str().to_string(),
                    e.bit.to_string(),
                    e.entropy.to_string(),
                    e.determined.to_string(),
                ]);
            }
            write(&t, None::<&()>, Some(&dir.join(format!("run_{i:05}.csv"))))?;
        }
    }
    let mut t = Table::new(&["bin", "determined_frac", "mean", "q05", "q95"]);
    for b in &stats {
        t.push(vec![b.bin.to_string(), fmt12(b.determined_frac), fmt12(b.mean), fmt12(b.q05), fmt12(b.q95)]);
    }
    let finals: Vec<f64> = runs.iter().map(|r| r.final_entropy as f64 / a.n as f64).collect();
    let mean = finals.iter().sum::<f64>() / finals.len() as f64;
    let sd = (finals.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (finals.len() - 1) as f64).sqrt();
    let seeds: Vec<TrialSeeds> = (0..a.trials as u64)
        .map(|i| maxwell_core::finite_sim::stats::trial_seeds(a.seed, i))
        .collect();
    let meta = json!({
        "n": a.n,
        "epsilon": a.epsilon,
        "trials": a.trials,
        "seed": a.seed,
        "strategy": a.strategy,
        "final_entropy_mean": mean,
        "final_entropy_std": sd,
        "final_entropy_zero_fraction": finals.iter().filter(|&&f| f == 0.0).count() as f64 / finals.len() as f64,
        "peak_mean_entropy": stats.iter().map(|b| b.mean).fold(0.0, f64::max),
        "graph_seeds": seeds.iter().map(|s| s.graph).collect::<Vec<_>>(),
    });
    write(&t, Some(&meta), c.out.as_deref())
}

fn parse_code(spec: &str) -> Result<TannerGraph> {
    let bad = || Error::Parse(format!("--code {spec:?}: expected spc:N, rep:N or hamming:P"));
    let (name, arg) = spec.split_once(':').ok_or_else(bad)?;
    let k: usize = arg.trim().parse().map_err(|_| bad())?;
    match name.trim() {
        "spc" if k >= 2 => Ok(single_parity_check(k)),
        "rep" if k >= 2 => Ok(repetition(k)),
        "hamming" => hamming(k),
        _ => Err(bad()),
    }
}

fn exact_exit(c: &Common, graph: Option<&Path>, code: Option<&str>) -> Result<()> {
    let g = match (graph, code) {
        (Some(path), _) => TannerGraph::parse_adjacency_text(&std::fs::read_to_string(path)?)?,
        (None, Some(spec)) => parse_code(spec)?,
        (None, None) => return Err(Error::InvalidParameter("give --graph or --code".into())),
    };
    let e = exact_exit_polynomial(&g)?;
    let approx = e.average_poly();
    let mut t = Table::new(&["power", "coefficient", "exact"]);
    for (k, coef) in e.average.iter().enumerate() {
        t.push(vec![k.to_string(), fmt12(approx.coeff(k)), coef.to_string()]);
    }
    let meta = json!({
        "n": e.n,
        "k": e.k,
        "integral": e.integral.to_string(),
        "rate": format!("{}/{}", e.k, e.n),
        "area_identity": e.area_identity_holds(),
        "counts": e.counts,
    });
    if c.out.is_none() {
        eprintln!(
            "integral {} vs k/n = {}/{}: {}",
            e.integral,
            e.k,
            e.n,
            if e.area_identity_holds() { "pass" } else { "FAIL" }
        );
    }
    write(&t, Some(&meta), c.out.as_deref())
}

fn gldpc(c: &Common, hamming_p: Option<usize>) -> Result<()> {
    check_common(c)?;
    let pair = match hamming_p {
        Some(p) => {
            let lambda = match &c.ensemble {
                Some(path) => load_ensemble(path)?.lambda().clone(),
                None => Poly::monomial(1.0, 1),
            };
            let exit = exact_exit_polynomial(&hamming(p)?)?;
            DDPair::generalized(lambda, exit.average_poly())?
        }
        None => need_ensemble(c)?,
    };
    let bp = bp_threshold(&pair, c.tol).epsilon;
    let upper = first_upper_bound(&pair, c.tol)?;
    let mut t = Table::new(&["bp", "map_upper", "shannon", "design_rate"]);
    t.push_f64(&[bp, upper, shannon_threshold(&pair), pair.design_rate()]);
    let meta = json!({ "right_exit": pair.check_exit().coeffs() });
    write(&t, Some(&meta), c.out.as_deref())
}
