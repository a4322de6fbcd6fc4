//! Tanner graphs: configuration-model sampling, fixture codes and a plain
//! adjacency-list interchange format.

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensemble::DDPair;
use crate::error::{Error, Result};

use super::gf2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    pub n: usize,
    pub m: usize,
    pub var_adj: Vec<Vec<usize>>,
    pub chk_adj: Vec<Vec<usize>>,
    pub seed: u64,
}

impl TannerGraph {
    /// Builds the graph from per-check variable lists.
    pub fn from_checks(n: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let mut var_adj = vec![Vec::new(); n];
        for (c, vars) in checks.iter().enumerate() {
            for &v in vars {
                if v >= n {
                    return Err(Error::InvalidParameter(format!(
                        "check {c} references variable {v} but n = {n}"
                    )));
                }
                var_adj[v].push(c);
            }
        }
        Ok(Self {
            n,
            m: checks.len(),
            var_adj,
            chk_adj: checks,
            seed: 0,
        })
    }

    /// Builds the graph from per-variable check lists.
    pub fn from_vars(m: usize, var_adj: Vec<Vec<usize>>) -> Result<Self> {
        let mut chk_adj = vec![Vec::new(); m];
        for (v, checks) in var_adj.iter().enumerate() {
            for &c in checks {
                if c >= m {
                    return Err(Error::InvalidParameter(format!(
                        "variable {v} references check {c} but m = {m}"
                    )));
                }
                chk_adj[c].push(v);
            }
        }
        Ok(Self {
            n: var_adj.len(),
            m,
            var_adj,
            chk_adj,
            seed: 0,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.var_adj.iter().map(Vec::len).sum()
    }

    /// Number of surplus parallel edges.
    pub fn multi_edge_count(&self) -> usize {
        self.chk_adj
            .iter()
            .map(|vars| {
                let mut s = vars.clone();
                s.sort_unstable();
                s.windows(2).filter(|w| w[0] == w[1]).count()
            })
            .sum()
    }

    pub fn is_simple(&self) -> bool {
        self.multi_edge_count() == 0
    }

    /// True when the bipartite graph (parallel edges counted) has no cycle.
    pub fn is_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n + self.m).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        for (c, vars) in self.chk_adj.iter().enumerate() {
            for &v in vars {
                let (a, b) = (find(&mut parent, v), find(&mut parent, self.n + c));
                if a == b {
                    return false;
                }
                parent[a] = b;
            }
        }
        true
    }

    /// Check neighbourhoods with parallel edges cancelled in pairs, which is
    /// what the parity constraints see.
    pub fn reduced_checks(&self) -> Vec<Vec<usize>> {
        self.chk_adj
            .iter()
            .map(|vars| {
                let mut s = vars.clone();
                s.sort_unstable();
                let mut out: Vec<usize> = Vec::with_capacity(s.len());
                for v in s {
                    if out.last() == Some(&v) {
                        out.pop();
                    } else {
                        out.push(v);
                    }
                }
                out
            })
            .collect()
    }

    /// Rows of the parity-check matrix over GF(2).
    pub fn parity_rows(&self) -> Vec<FixedBitSet> {
        self.reduced_checks()
            .into_iter()
            .map(|vars| {
                let mut row = FixedBitSet::with_capacity(self.n);
                for v in vars {
                    row.insert(v);
                }
                row
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        gf2::rank(&self.parity_rows())
    }

    /// n − rank
    pub fn dimension(&self) -> usize {
        self.n - self.rank()
    }

    /// `v <index>: <checks>` per line.
    pub fn to_adjacency_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# n={} m={}", self.n, self.m);
        for (v, checks) in self.var_adj.iter().enumerate() {
            let list: Vec<String> = checks.iter().map(usize::to_string).collect();
            let _ = writeln!(s, "v {v}: {}", list.join(" "));
        }
        s
    }

    pub fn parse_adjacency_text(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut declared_m = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(m) = rest.split_whitespace().find_map(|t| t.strip_prefix("m=")) {
                    declared_m = m.parse::<usize>().ok();
                }
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: {line:?}", lineno + 1));
            let rest = line.strip_prefix('v').ok_or_else(|| bad("expected `v <index>:`"))?;
            let (idx, checks) = rest.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let idx = idx.trim().parse::<usize>().map_err(|_| bad("bad variable index"))?;
            let checks = checks
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| bad("bad check index")))
                .collect::<Result<Vec<_>>>()?;
            rows.push((idx, checks));
        }
        let n = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let mut var_adj = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        for (idx, checks) in rows {
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::Parse(format!("variable {idx} listed twice")));
            }
            var_adj[idx] = checks;
        }
        let m_used = var_adj.iter().flatten().map(|&c| c + 1).max().unwrap_or(0);
        if let Some(m) = declared_m.filter(|&m| m < m_used) {
            return Err(Error::Parse(format!("check index {} exceeds declared m={m}", m_used - 1)));
        }
        let m = declared_m.unwrap_or(m_used);
        Self::from_vars(m, var_adj)
    }
}

/// Splits `total` into integer counts proportional to `weights`, giving the
/// leftover units to the largest fractional parts.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// `(degree, count)` for each degree with a nonzero node fraction.
fn node_counts(node_dist: &[f64], total: usize) -> Vec<(usize, usize)> {
    let degrees: Vec<usize> = (0..node_dist.len()).filter(|&d| node_dist[d] > 0.0).collect();
    let weights: Vec<f64> = degrees.iter().map(|&d| node_dist[d]).collect();
    degrees
        .into_iter()
        .zip(largest_remainder(total, &weights))
        .collect()
}

/// Configuration-model sample of LDPC(λ, ρ, n). Parallel edges are kept.
pub fn sample_graph(pair: &DDPair, n: usize, seed: u64) -> Result<TannerGraph> {
    let gamma = pair.gamma_node().ok_or(Error::RequiresCheckDistribution)?;
    let lambda = pair.lambda_node();
    let max_deg = lambda.degree().unwrap_or(0).max(gamma.degree().unwrap_or(0));
    if n < max_deg {
        return Err(Error::InvalidParameter(format!(
            "block length {n} below the maximum degree {max_deg}"
        )));
    }
    let m = (n as f64 * pair.avg_var_degree() / gamma.derivative().eval(1.0)).round() as usize;
    if m == 0 {
        return Err(Error::InvalidParameter(format!("block length {n} gives no checks")));
    }
    let var_counts = node_counts(lambda.coeffs(), n);
    let chk_counts = node_counts(gamma.coeffs(), m);

    let mut var_deg: Vec<usize> = var_counts.iter().flat_map(|&(d, c)| std::iter::repeat_n(d, c)).collect();
    let mut chk_deg: Vec<usize> = chk_counts.iter().flat_map(|&(d, c)| std::iter::repeat_n(d, c)).collect();
    var_deg.truncate(n);
    chk_deg.truncate(m);

    let e_var: usize = var_deg.iter().sum();
    let e_chk: usize = chk_deg.iter().sum();
    if e_var != e_chk {
        // put the whole socket surplus on the highest-degree check
        let idx = chk_deg.len() - 1;
        let adjusted = chk_deg[idx] as i64 + e_var as i64 - e_chk as i64;
        if adjusted < 1 {
            return Err(Error::InvalidParameter(format!(
                "socket counts {e_var} (variables) and {e_chk} (checks) cannot be reconciled"
            )));
        }
        log::warn!(
            "socket mismatch {e_var} vs {e_chk}: check {idx} degree {} -> {adjusted}",
            chk_deg[idx]
        );
        chk_deg[idx] = adjusted as usize;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sockets: Vec<usize> = chk_deg
        .iter()
        .enumerate()
        .flat_map(|(c, &d)| std::iter::repeat_n(c, d))
        .collect();
    sockets.shuffle(&mut rng);

    let mut var_adj = Vec::with_capacity(n);
    let mut next = 0;
    for &d in &var_deg {
        var_adj.push(sockets[next..next + d].to_vec());
        next += d;
    }
    let mut g = TannerGraph::from_vars(m, var_adj)?;
    g.seed = seed;
    Ok(g)
}

/// Resamples until the graph has no parallel edges.
pub fn sample_simple_graph(pair: &DDPair, n: usize, seed: u64, attempts: usize) -> Result<TannerGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts.max(1) {
        let g = sample_graph(pair, n, rng.gen())?;
        if g.is_simple() {
            return Ok(g);
        }
    }
    Err(Error::NonConvergence {
        what: "simple graph resampling",
        iterations: attempts,
        last: f64::NAN,
    })
}

/// Uniformly grown random bipartite tree with the given node counts.
pub fn random_tree(n_vars: usize, n_checks: usize, seed: u64) -> Result<TannerGraph> {
    if n_vars == 0 || n_checks == 0 {
        return Err(Error::InvalidParameter("a tree needs at least one node of each kind".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // nodes as (is_check, index); variable 0 is the root
    let mut pending: Vec<(bool, usize)> = (1..n_vars)
        .map(|v| (false, v))
        .chain((1..n_checks).map(|c| (true, c)))
        .collect();
    pending.shuffle(&mut rng);
    pending.insert(0, (true, 0));

    let mut var_adj = vec![Vec::new(); n_vars];
    let (mut vars_in, mut checks_in) = (vec![0usize], Vec::new());
    for (is_check, idx) in pending {
        if is_check {
            let v = vars_in[rng.gen_range(0..vars_in.len())];
            var_adj[v].push(idx);
            checks_in.push(idx);
        } else {
            let c = checks_in[rng.gen_range(0..checks_in.len())];
            var_adj[idx].push(c);
            vars_in.push(idx);
        }
    }
    let mut g = TannerGraph::from_vars(n_checks, var_adj)?;
    g.seed = seed;
    Ok(g)
}

/// Single parity check on `n` bits.
pub fn single_parity_check(n: usize) -> TannerGraph {
    TannerGraph::from_checks(n, vec![(0..n).collect()]).expect("indices in range")
}

/// Length-`n` repetition code as a chain of pairwise checks.
pub fn repetition(n: usize) -> TannerGraph {
    TannerGraph::from_checks(n, (1..n).map(|i| vec![i - 1, i]).collect()).expect("indices in range")
}

/// Hamming code of length 2^p − 1: the columns of the check matrix are the
/// nonzero p-bit vectors.
pub fn hamming(p: usize) -> Result<TannerGraph> {
    if !(2..=10).contains(&p) {
        return Err(Error::InvalidParameter(format!("Hamming parameter {p} outside 2..=10")));
    }
    let n = (1usize << p) - 1;
    let checks = (0..p)
        .map(|bit| (0..n).filter(|&j| ((j + 1) >> bit) & 1 == 1).collect())
        .collect();
    TannerGraph::from_checks(n, checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn largest_remainder_sums() {
        assert_eq!(largest_remainder(10, &[0.33, 0.33, 0.34]), vec![3, 3, 4]);
        assert_eq!(largest_remainder(7, &[1.0]).iter().sum::<usize>(), 7);
    }

    #[test]
    fn adjacency_round_trip() {
        let g = hamming(3).unwrap();
        let back = TannerGraph::parse_adjacency_text(&g.to_adjacency_text()).unwrap();
        assert_eq!(back.var_adj, g.var_adj);
        assert_eq!(back.m, g.m);
    }

    #[test]
    fn hamming_dimensions() {
        assert_eq!(hamming(3).unwrap().dimension(), 4);
        assert_eq!(hamming(4).unwrap().dimension(), 11);
    }
}
