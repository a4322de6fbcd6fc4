//! EXIT curves of the erasure channel: the branch partition of ε(x), BP, EBP
//! and MAP curves, the trial entropy, MAP threshold bounds, area identities
//! and the asymptotic entropy trajectory of the Maxwell decoder.

use serde::Serialize;

use crate::density_evolution::{bp_threshold, EpsilonProfile, DEFAULT_GRID};
use crate::ensemble::DDPair;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quad::{integrate, integrate_split};
use crate::roots::{bisect, sign_change_roots};

/// |P| below this at a local extremum counts as a tangent root.
const TANGENCY: f64 = 1e-10;

/// ε(x) = x/λ(y(x)); the stability limit at x = 0.
pub fn epsilon_of_x(pair: &DDPair, x: f64) -> f64 {
    pair.epsilon_at(x)
}

/// Intervals of x on which ε(x) increases, lowest first. The last interval
/// ends at x = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPartition {
    pub intervals: Vec<(f64, f64)>,
    /// ε(x_low) for each interval
    pub jump_epsilons: Vec<f64>,
}

impl BranchPartition {
    /// Number of intervals.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Index of the interval containing `x` (closed on both ends).
    pub fn locate(&self, x: f64) -> Option<usize> {
        self.intervals
            .iter()
            .rposition(|&(lo, hi)| x >= lo && x <= hi)
    }
}

/// Backward construction from x = 1: take the largest stationary point of ε
/// below the current upper end, then the largest x below it at the same ε,
/// and repeat.
pub fn compute_partition(pair: &DDPair, grid_size: usize) -> Result<BranchPartition> {
    if grid_size < 1000 {
        return Err(Error::InvalidParameter(format!(
            "partition grid {grid_size} is below the minimum of 1000"
        )));
    }
    let profile = EpsilonProfile::new(pair, grid_size);
    partition_from_profile(&profile, grid_size)
}

fn partition_from_profile(profile: &EpsilonProfile<'_>, grid_size: usize) -> Result<BranchPartition> {
    let pair = profile.pair();
    let crit = profile.critical_points();
    // stationary points must alternate between minima and maxima
    let kinds: Vec<bool> = crit
        .iter()
        .map(|&c| {
            let h = 1e-9f64.max(c * 1e-9);
            pair.epsilon_slope_numerator((c + h).min(1.0)) > 0.0
        })
        .collect();
    if kinds.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::GridTooCoarse {
            what: "the derivative of the channel parameter",
            grid: grid_size,
        });
    }
    let boundaries = profile.piece_boundaries();

    let mut intervals = Vec::new();
    let mut x_high = 1.0;
    loop {
        let x_low = match crit.iter().rposition(|&c| c < x_high) {
            Some(k) => {
                if !kinds[k] {
                    return Err(Error::GridTooCoarse {
                        what: "the derivative of the channel parameter",
                        grid: grid_size,
                    });
                }
                crit[k]
            }
            None => 0.0,
        };
        if x_high > x_low {
            intervals.push((x_low, x_high));
        }
        if x_low == 0.0 {
            break;
        }
        let target = pair.epsilon_at(x_low);
        let mut next = None;
        for w in boundaries.windows(2).rev() {
            let (lo, hi) = (w[0], w[1]);
            if hi > x_low {
                continue;
            }
            let (e_lo, e_hi) = (pair.epsilon_at(lo), pair.epsilon_at(hi));
            if e_lo <= target && target <= e_hi && hi < x_low {
                next = Some(bisect(|x| pair.epsilon_at(x) - target, lo, hi, 1e-16));
                break;
            }
        }
        match next {
            Some(x) => x_high = x,
            None => break,
        }
    }
    intervals.reverse();
    let jump_epsilons = intervals.iter().map(|&(lo, _)| pair.epsilon_at(lo)).collect();
    Ok(BranchPartition {
        intervals,
        jump_epsilons,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Bp,
    Ebp,
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitSample {
    pub epsilon: f64,
    pub h: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitCurve {
    pub kind: CurveKind,
    pub samples: Vec<ExitSample>,
}

fn sample_at(pair: &DDPair, x: f64) -> ExitSample {
    ExitSample {
        epsilon: pair.epsilon_at(x),
        h: pair.lambda_node().eval(pair.y(x)),
        x,
    }
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(1);
    (0..=n).map(move |k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
}

/// EBP curve sampled uniformly in x, with partition boundaries and
/// stationary points added.
pub fn ebp_curve(pair: &DDPair, grid_size: usize) -> Result<ExitCurve> {
    let partition = compute_partition(pair, grid_size.max(1000))?;
    let profile = EpsilonProfile::new(pair, grid_size.max(1000));
    let mut xs: Vec<f64> = linspace(0.0, 1.0, grid_size).collect();
    for &(lo, hi) in &partition.intervals {
        xs.push(lo);
        xs.push(hi);
    }
    xs.extend_from_slice(profile.critical_points());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    Ok(ExitCurve {
        kind: CurveKind::Ebp,
        samples: xs.into_iter().map(|x| sample_at(pair, x)).collect(),
    })
}

/// h^BP(ε) = Λ(y(x)) at the largest DE fixed point x.
pub fn bp_exit(pair: &DDPair, epsilon: f64) -> f64 {
    let profile = EpsilonProfile::new(pair, DEFAULT_GRID);
    bp_exit_with(&profile, epsilon)
}

/// h^BP at each of `epsilons`, sharing one ε(x) profile.
pub fn bp_exit_many(pair: &DDPair, epsilons: &[f64]) -> Vec<f64> {
    let profile = EpsilonProfile::new(pair, DEFAULT_GRID);
    epsilons.iter().map(|&e| bp_exit_with(&profile, e)).collect()
}

fn bp_exit_with(profile: &EpsilonProfile<'_>, epsilon: f64) -> f64 {
    let pair = profile.pair();
    pair.lambda_node().eval(pair.y(profile.largest_fixed_point(epsilon)))
}

/// BP curve: zero below the threshold, then the partition branches.
pub fn bp_curve(pair: &DDPair, grid_size: usize) -> Result<ExitCurve> {
    let partition = compute_partition(pair, grid_size.max(1000))?;
    let mut samples = vec![ExitSample {
        epsilon: 0.0,
        h: 0.0,
        x: 0.0,
    }];
    let first = partition.intervals[0];
    if first.0 > 0.0 {
        samples.push(ExitSample {
            epsilon: pair.epsilon_at(first.0) * (1.0 - 1e-12),
            h: 0.0,
            x: 0.0,
        });
    }
    let last = partition.len() - 1;
    for (i, &(lo, hi)) in partition.intervals.iter().enumerate() {
        let steps = ((hi - lo) * grid_size as f64).ceil().max(2.0) as usize;
        for k in 0..steps {
            let x = lo + (hi - lo) * k as f64 / steps as f64;
            if x == 0.0 && samples.len() == 1 {
                continue;
            }
            samples.push(sample_at(pair, x));
        }
        if i == last {
            samples.push(sample_at(pair, 1.0));
        }
    }
    Ok(ExitCurve {
        kind: CurveKind::Bp,
        samples,
    })
}

/// P_ε(x, y).
pub fn trial_entropy(pair: &DDPair, epsilon: f64, x: f64, y: f64) -> f64 {
    pair.trial_entropy(epsilon, x, y)
}

/// P_ε(x, y) through the check-node degree distribution,
/// Λ'(1)x(1−y) − (Λ'(1)/Γ'(1))[1−Γ(1−x)] + εΛ(y). LDPC ensembles only.
pub fn trial_entropy_check_form(pair: &DDPair, epsilon: f64, x: f64, y: f64) -> Result<f64> {
    let gamma = pair.gamma_node().ok_or(Error::RequiresCheckDistribution)?;
    let a = pair.avg_var_degree();
    let g = pair.avg_check_degree().ok_or(Error::RequiresCheckDistribution)?;
    Ok(a * x * (1.0 - y) - a / g * (1.0 - gamma.eval(1.0 - x)) + epsilon * pair.lambda_node().eval(y))
}

/// P(x) = P_{ε(x)}(x, y(x)).
pub fn trial_entropy_along_curve(pair: &DDPair, x: f64) -> f64 {
    pair.trial_entropy_along_curve(x)
}

/// P(x) as an explicit polynomial when the variable side is regular, where
/// ε(x)Λ(y(x)) reduces to x·y(x).
pub fn trial_entropy_poly(pair: &DDPair) -> Option<Poly> {
    let lambda = pair.lambda();
    if lambda.lowest_power() != lambda.degree() {
        return None;
    }
    let y = pair.check_exit();
    let x = Poly::monomial(1.0, 1);
    let a = pair.avg_var_degree();
    let one_minus_y = &Poly::one() - y;
    let first = (&x * &one_minus_y).scale(a);
    let second = one_minus_y.antiderivative().scale(a);
    Some(&(&first - &second) + &(&x * y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapBoundSource {
    /// smallest ε(x*) over positive roots of P
    TrialEntropyRoot,
    /// the upper bound met the BP threshold, which pins the value
    BpSandwich,
    /// P has no positive root
    NoRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRoot {
    pub x: f64,
    pub epsilon: f64,
    /// no x' ∈ (x, 1] with ε(x') = ε(x)
    pub isolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapThreshold {
    pub epsilon: f64,
    pub x_star: f64,
    /// true when the value is proven rather than conjectural
    pub tight: bool,
    pub source: MapBoundSource,
    pub roots: Vec<TrialRoot>,
    /// points where P touches zero without changing sign
    pub tangencies: Vec<f64>,
    /// smallest ε(x*) over isolated roots, the proven upper bound
    pub proven_bound: Option<f64>,
}

fn isolated_root(profile: &EpsilonProfile<'_>, x: f64) -> bool {
    let pair = profile.pair();
    let e = pair.epsilon_at(x);
    if x >= 1.0 {
        return true;
    }
    if pair.epsilon_slope_numerator(x) < 0.0 {
        return false;
    }
    profile
        .critical_points()
        .iter()
        .filter(|&&c| c > x)
        .all(|&c| pair.epsilon_at(c) > e + 1e-12)
}

/// MAP threshold from the positive roots of P(x), capped by the relation
/// chain ε^BP ≤ ε^MAP ≤ min(ε^Sh, ε^Stab).
pub fn map_threshold(pair: &DDPair, tol: f64) -> Result<MapThreshold> {
    let profile = EpsilonProfile::new(pair, DEFAULT_GRID);
    let p = |x: f64| pair.trial_entropy_along_curve(x);
    let tol = tol.max(1e-16);
    let xs: Vec<f64> = sign_change_roots(p, 0.0, 1.0, DEFAULT_GRID, tol);
    let mut roots: Vec<TrialRoot> = xs
        .into_iter()
        .map(|x| TrialRoot {
            x,
            epsilon: pair.epsilon_at(x),
            isolated: isolated_root(&profile, x),
        })
        .collect();
    if pair.design_rate().abs() < 1e-15 {
        roots.push(TrialRoot {
            x: 1.0,
            epsilon: 1.0,
            isolated: true,
        });
    }

    // tangencies: local extrema of P on the grid with |P| tiny
    let n = DEFAULT_GRID;
    let mut tangencies = Vec::new();
    let vals: Vec<f64> = (0..=n).map(|i| p(i as f64 / n as f64)).collect();
    for i in 1..n {
        let (a, b, c) = (vals[i - 1], vals[i], vals[i + 1]);
        let extremum = (b <= a && b <= c) || (b >= a && b >= c);
        if extremum && b.abs() < TANGENCY && a.signum() == c.signum() && a != 0.0 {
            tangencies.push(i as f64 / n as f64);
        }
    }

    let bp = bp_threshold(pair, 1e-14);
    let cap = pair.stability_limit().min(1.0 - pair.design_rate());
    let proven_bound = roots
        .iter()
        .filter(|r| r.isolated)
        .map(|r| r.epsilon)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))));

    let best = roots
        .iter()
        .copied()
        .min_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let mut out = match best {
        Some(r) => MapThreshold {
            epsilon: r.epsilon,
            x_star: r.x,
            tight: r.isolated,
            source: MapBoundSource::TrialEntropyRoot,
            roots: roots.clone(),
            tangencies: tangencies.clone(),
            proven_bound,
        },
        None => MapThreshold {
            epsilon: bp.epsilon,
            x_star: bp.x,
            tight: false,
            source: MapBoundSource::NoRoot,
            roots: Vec::new(),
            tangencies: tangencies.clone(),
            proven_bound,
        },
    };
    let upper = proven_bound.unwrap_or(f64::INFINITY).min(cap);
    let upper = if out.source == MapBoundSource::NoRoot {
        upper.min(first_upper_bound(pair, tol)?)
    } else {
        upper
    };
    if upper <= bp.epsilon + 1e-12 {
        out.epsilon = bp.epsilon;
        out.x_star = bp.x;
        out.tight = true;
        out.source = MapBoundSource::BpSandwich;
    } else if out.epsilon > cap {
        out.epsilon = cap;
        out.tight = false;
    }
    Ok(out)
}

/// A discontinuity of the MAP curve: at `epsilon` the curve drops from `x_plus`
/// to `x_minus` (0 for the threshold itself).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapJump {
    pub epsilon: f64,
    pub x_minus: f64,
    pub x_plus: f64,
    /// location justified only by the local balance, not by a proven bound
    pub conjectural: bool,
}

/// A stretch of the MAP curve lying on the EBP curve for x in `[x_low, x_high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapSegment {
    pub x_low: f64,
    pub x_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapExitCurve {
    pub curve: ExitCurve,
    /// ordered by decreasing ε; the last one is the threshold
    pub jumps: Vec<MapJump>,
    /// ordered by decreasing ε
    pub segments: Vec<MapSegment>,
    #[serde(skip)]
    pair: DDPair,
}

impl MapExitCurve {
    pub fn threshold(&self) -> f64 {
        self.jumps.last().map_or(0.0, |j| j.epsilon)
    }

    /// h^MAP(ε).
    pub fn value(&self, epsilon: f64) -> f64 {
        let pair = &self.pair;
        for s in &self.segments {
            let (e_lo, e_hi) = (pair.epsilon_at(s.x_low), pair.epsilon_at(s.x_high));
            if epsilon >= e_lo && epsilon <= e_hi {
                let x = if epsilon >= e_hi {
                    s.x_high
                } else {
                    bisect(|x| pair.epsilon_at(x) - epsilon, s.x_low, s.x_high, 1e-16)
                };
                return pair.lambda_node().eval(pair.y(x));
            }
        }
        0.0
    }

    /// ∫ h^MAP dε from the segment endpoints.
    pub fn area(&self) -> f64 {
        let pair = &self.pair;
        self.segments
            .iter()
            .map(|s| pair.trial_entropy_along_curve(s.x_high) - pair.trial_entropy_along_curve(s.x_low))
            .sum()
    }
}

/// x on the increasing piece `[lo, hi]` with ε(x) = ε.
fn x_on_piece(pair: &DDPair, lo: f64, hi: f64, epsilon: f64) -> f64 {
    if epsilon >= pair.epsilon_at(hi) {
        return hi;
    }
    if epsilon <= pair.epsilon_at(lo) {
        return lo;
    }
    bisect(|x| pair.epsilon_at(x) - epsilon, lo, hi, 1e-16)
}

/// Maxwell construction: follow increasing EBP pieces downward in ε,
/// switching to a lower piece where the trial entropies balance and to the
/// trivial branch where the trial entropy reaches zero.
pub fn map_exit_curve(pair: &DDPair, grid_size: usize) -> Result<MapExitCurve> {
    let grid = grid_size.max(1000);
    let profile = EpsilonProfile::new(pair, grid);
    let bounds = profile.piece_boundaries();
    let pieces: Vec<(f64, f64)> = bounds
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(lo, hi)| pair.epsilon_slope_numerator(0.5 * (lo + hi)) > 0.0)
        .collect();
    if pieces.is_empty() || pieces.last().unwrap().1 != 1.0 {
        return Err(Error::GridTooCoarse {
            what: "the increasing branches of the channel parameter",
            grid,
        });
    }
    let p_eps = |e: f64, x: f64| pair.trial_entropy(e, x, pair.y(x));
    let p_curve = |x: f64| pair.trial_entropy_along_curve(x);

    let mut cur = pieces.len() - 1;
    let mut eps_hi = 1.0f64;
    let mut jumps = Vec::new();
    let mut segments = Vec::new();
    loop {
        let (a, b) = pieces[cur];
        let x_hi = x_on_piece(pair, a, b, eps_hi);
        let e_top = pair.epsilon_at(x_hi);
        let e_bottom = pair.epsilon_at(a);

        // where the current branch's trial entropy reaches zero
        let zero = if a == 0.0 {
            Some((0.0, e_bottom))
        } else if p_curve(a) >= 0.0 {
            None
        } else if p_curve(x_hi) <= 0.0 {
            Some((x_hi, e_top))
        } else {
            let x0 = bisect(p_curve, a, x_hi, 1e-16);
            Some((x0, pair.epsilon_at(x0)))
        };

        // first lower branch to take over as ε decreases
        let mut best: Option<(usize, f64)> = None;
        for j in 0..cur {
            let (aj, bj) = pieces[j];
            let lo = e_bottom.max(pair.epsilon_at(aj));
            let hi = e_top.min(pair.epsilon_at(bj));
            if !(lo < hi) {
                continue;
            }
            let f = |e: f64| p_eps(e, x_on_piece(pair, a, b, e)) - p_eps(e, x_on_piece(pair, aj, bj, e));
            let (f_lo, f_hi) = (f(lo), f(hi));
            if f_lo > 0.0 {
                continue;
            }
            if f_hi < -1e-12 {
                return Err(Error::BalanceNotBracketed { upper: cur, lower: j });
            }
            let e = bisect(f, lo, hi, 1e-15);
            if best.is_none_or(|(_, eb)| e > eb) {
                best = Some((j, e));
            }
        }

        match (zero, best) {
            (Some((x0, e0)), b) if b.is_none_or(|(_, eb)| e0 >= eb) => {
                segments.push(MapSegment {
                    x_low: x0,
                    x_high: x_hi,
                });
                jumps.push(MapJump {
                    epsilon: e0,
                    x_minus: 0.0,
                    x_plus: x0,
                    conjectural: false,
                });
                break;
            }
            (_, Some((j, e))) => {
                let x_plus = x_on_piece(pair, a, b, e);
                let x_minus = x_on_piece(pair, pieces[j].0, pieces[j].1, e);
                segments.push(MapSegment {
                    x_low: x_plus,
                    x_high: x_hi,
                });
                jumps.push(MapJump {
                    epsilon: e,
                    x_minus,
                    x_plus,
                    conjectural: true,
                });
                cur = j;
                eps_hi = e;
            }
            _ => {
                return Err(Error::BalanceNotBracketed {
                    upper: cur,
                    lower: cur,
                })
            }
        }
    }

    // the final drop to zero is proven when the root-based bound is tight
    let tight = map_threshold(pair, 1e-15).map(|m| m.tight).unwrap_or(false);
    if let Some(last) = jumps.last_mut() {
        last.conjectural = !tight;
    }

    let mut samples = vec![ExitSample {
        epsilon: 0.0,
        h: 0.0,
        x: 0.0,
    }];
    if let Some(last) = jumps.last() {
        if last.x_plus > 0.0 {
            samples.push(ExitSample {
                epsilon: last.epsilon * (1.0 - 1e-12),
                h: 0.0,
                x: 0.0,
            });
        }
    }
    for s in segments.iter().rev() {
        let steps = ((s.x_high - s.x_low) * grid_size as f64).ceil().max(2.0) as usize;
        for k in 0..=steps {
            let x = s.x_low + (s.x_high - s.x_low) * k as f64 / steps as f64;
            if x == 0.0 {
                continue;
            }
            // the lower end of an upper segment shares ε with the jump
            samples.push(sample_at(pair, x));
        }
    }
    samples.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon).then(a.h.total_cmp(&b.h)));
    samples.dedup_by(|a, b| a.epsilon == b.epsilon && a.h == b.h);
    Ok(MapExitCurve {
        curve: ExitCurve {
            kind: CurveKind::Map,
            samples,
        },
        jumps,
        segments,
        pair: pair.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EbpArea {
    /// quadrature of h^EBP dε(x) over x ∈ [0, 1]
    pub numeric: f64,
    /// P(1) − P(0)
    pub closed_form: f64,
}

/// Signed area under the EBP curve, by quadrature and in closed form.
pub fn ebp_area(pair: &DDPair) -> EbpArea {
    let profile = EpsilonProfile::new(pair, DEFAULT_GRID);
    let integrand = |x: f64| {
        let y = pair.y(x);
        let lam = pair.lambda().eval(y);
        if lam <= 0.0 {
            return 0.0;
        }
        pair.lambda_node().eval(y) * pair.epsilon_slope_numerator(x) / (lam * lam)
    };
    let numeric = integrate_split(integrand, 0.0, 1.0, profile.critical_points(), 400);
    let closed_form = pair.trial_entropy_along_curve(1.0) - pair.trial_entropy_along_curve(0.0);
    EbpArea {
        numeric,
        closed_form,
    }
}

/// ∫ h^BP dε along an increasing stretch `[xa, xb]`, by integration by parts.
pub fn branch_integral(pair: &DDPair, xa: f64, xb: f64) -> f64 {
    let lam_int = |x: f64| pair.lambda().integral_zero_to(pair.y(x));
    let (ea, eb) = (pair.epsilon_at(xa), pair.epsilon_at(xb));
    let (ta, tb) = (
        if xa == 0.0 { 0.0 } else { ea * lam_int(xa) },
        if xb == 0.0 { 0.0 } else { eb * lam_int(xb) },
    );
    (tb - ta - xb * pair.y(xb) + xa * pair.y(xa) + pair.check_exit_integral(xa, xb))
        / pair.lambda_integral()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BpArea {
    /// ∫₀¹ h^BP dε, branch-wise closed form
    pub area: f64,
    /// one entry per partition interval
    pub deficits: Vec<f64>,
    /// independent quadrature of the same integral
    pub quadrature: f64,
}

/// Area under the BP curve and the per-jump deficits.
pub fn bp_area(pair: &DDPair, partition: &BranchPartition) -> BpArea {
    let area = partition
        .intervals
        .iter()
        .map(|&(lo, hi)| branch_integral(pair, lo, hi))
        .sum();
    let mut deficits = Vec::with_capacity(partition.len());
    let mut prev_high = 0.0;
    for (i, &(lo, hi)) in partition.intervals.iter().enumerate() {
        let eps_i = partition.jump_epsilons[i];
        let a = lo * pair.y(lo) - prev_high * pair.y(prev_high);
        let b = if lo == prev_high {
            0.0
        } else {
            eps_i * pair.lambda().integral(pair.y(prev_high), pair.y(lo))
        };
        let c = pair.check_exit_integral(prev_high, lo);
        deficits.push(a - b - c);
        prev_high = hi;
    }
    let integrand = |x: f64| {
        let y = pair.y(x);
        let lam = pair.lambda().eval(y);
        if lam <= 0.0 {
            return 0.0;
        }
        pair.lambda_node().eval(y) * pair.epsilon_slope_numerator(x) / (lam * lam)
    };
    let quadrature = partition
        .intervals
        .iter()
        .map(|&(lo, hi)| integrate_split(integrand, lo, hi, &[], 200))
        .sum();
    BpArea {
        area,
        deficits,
        quadrature,
    }
}

/// ∫_ε̄¹ h^BP dε in closed form.
fn bp_tail(pair: &DDPair, partition: &BranchPartition, eps_bar: f64) -> f64 {
    let mut total = 0.0;
    for (i, &(lo, hi)) in partition.intervals.iter().enumerate() {
        let e_lo = partition.jump_epsilons[i];
        let e_hi = pair.epsilon_at(hi);
        if eps_bar >= e_hi {
            continue;
        }
        let start = if eps_bar <= e_lo {
            lo
        } else {
            x_on_piece(pair, lo, hi, eps_bar)
        };
        total += pair.trial_entropy_along_curve(hi) - pair.trial_entropy_along_curve(start);
    }
    total
}

/// The unique ε̄ ∈ [ε^BP, 1] with ∫_ε̄¹ h^BP dε = r.
pub fn first_upper_bound(pair: &DDPair, tol: f64) -> Result<f64> {
    let partition = compute_partition(pair, DEFAULT_GRID)?;
    let r = pair.design_rate();
    let bp = bp_threshold(pair, 1e-14).epsilon;
    // a continuous transition leaves the tail flat at r near ε^BP, so
    // quadrature noise alone must not push the root above it
    if bp_tail(pair, &partition, bp) <= r + 1e-10 {
        return Ok(bp);
    }
    Ok(bisect(
        |e| bp_tail(pair, &partition, e) - r,
        bp,
        1.0,
        tol.max(1e-16),
    ))
}

/// GLDPC thresholds with the check side given by its EXIT function.
pub fn gldpc_map_bound(lambda: &Poly, y: &Poly, tol: f64) -> Result<(f64, f64)> {
    let pair = DDPair::generalized(lambda.clone(), y.clone())?;
    let bp = bp_threshold(&pair, tol).epsilon;
    let bar = first_upper_bound(&pair, tol)?;
    Ok((bp, bar))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapAreas {
    /// area between the inverted variable curve and y(x), over ∫λ
    pub total_gap: f64,
    /// (1/∫λ)ΣD_i
    pub map_bp_gap: f64,
}

/// Area of the region between the variable curve y = λ⁻¹(x/ε^BP) (capped
/// at 1) and the check curve y(x), both integrated numerically. The part
/// under the variable curve is taken in its parametric form x = ε^BP·λ(t),
/// which avoids the infinite slope of λ⁻¹ at 0.
pub fn component_gap_areas(pair: &DDPair) -> Result<GapAreas> {
    let bp = bp_threshold(pair, 1e-14).epsilon.min(1.0);
    let dlambda = pair.lambda().derivative();
    let under_variable = integrate(|t| t * bp * dlambda.eval(t), 0.0, 1.0, 200) + (1.0 - bp);
    let under_check = integrate(|x| pair.y(x), 0.0, 1.0, 200);
    let d = under_variable - under_check;
    let partition = compute_partition(pair, DEFAULT_GRID)?;
    let deficits = bp_area(pair, &partition).deficits;
    Ok(GapAreas {
        total_gap: d / pair.lambda_integral(),
        map_bp_gap: deficits.iter().sum::<f64>() / pair.lambda_integral(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub gamma: f64,
    pub determined_fraction: f64,
    /// entropy per bit, clamped at zero
    pub entropy: f64,
    pub guesses: f64,
    pub confirmations: f64,
    /// effective channel parameter seen by the erased messages
    pub effective_epsilon: f64,
    pub x: f64,
}

/// Asymptotic Maxwell-decoder trajectory at channel parameter `epsilon`,
/// walking the largest-fixed-point path from x(ε) down to 0.
pub fn maxwell_trajectory(pair: &DDPair, epsilon: f64, grid_size: usize) -> Result<Vec<TrajectoryPoint>> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "channel parameter {epsilon} outside [0, 1]"
        )));
    }
    let start = TrajectoryPoint {
        gamma: 0.0,
        determined_fraction: 1.0,
        entropy: 0.0,
        guesses: 0.0,
        confirmations: 0.0,
        effective_epsilon: epsilon,
        x: 0.0,
    };
    let bp = bp_threshold(pair, 1e-14).epsilon;
    if epsilon <= bp {
        return Ok(vec![start]);
    }
    let grid = grid_size.max(10);
    let partition = compute_partition(pair, DEFAULT_GRID)?;
    let profile = EpsilonProfile::new(pair, DEFAULT_GRID);
    let x_start = profile.largest_fixed_point(epsilon);
    let p_start = pair.trial_entropy(epsilon, x_start, pair.y(x_start));

    let mut i = partition.locate(x_start).unwrap_or(partition.len() - 1);
    let mut points = Vec::new();
    let mut guesses = 0.0;
    let mut confirmations = 0.0;
    let mut p_prev = p_start;
    let mut push = |x: f64, eff: f64, on_branch: bool, points: &mut Vec<TrajectoryPoint>| {
        let p_now = pair.trial_entropy(eff, x, pair.y(x));
        if on_branch {
            guesses += p_prev - p_now;
        } else {
            confirmations += p_now - p_prev;
        }
        p_prev = p_now;
        let raw = p_start - p_now;
        points.push(TrajectoryPoint {
            gamma: 1.0 - eff / epsilon,
            determined_fraction: 1.0 - eff * pair.lambda_node().eval(pair.y(x)),
            entropy: raw.max(0.0),
            guesses,
            confirmations,
            effective_epsilon: eff,
            x,
        });
    };

    let mut x_top = x_start;
    loop {
        let (lo, _) = partition.intervals[i];
        let steps = ((x_top - lo) * grid as f64).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let x = x_top - (x_top - lo) * k as f64 / steps as f64;
            let eff = if x == 0.0 { pair.stability_limit() } else { pair.epsilon_at(x) };
            push(x, eff.min(epsilon), true, &mut points);
        }
        if lo == 0.0 {
            break;
        }
        let eff = partition.jump_epsilons[i];
        let bottom = if i == 0 { 0.0 } else { partition.intervals[i - 1].1 };
        let steps = ((lo - bottom) * grid as f64).ceil().max(1.0) as usize;
        for k in 1..=steps {
            let x = lo - (lo - bottom) * k as f64 / steps as f64;
            push(x, eff, false, &mut points);
        }
        if i == 0 {
            break;
        }
        i -= 1;
        x_top = partition.intervals[i].1;
    }
    let last = *points.last().unwrap();
    points.push(TrajectoryPoint {
        gamma: 1.0,
        determined_fraction: 1.0,
        effective_epsilon: 0.0,
        x: 0.0,
        ..last
    });
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_36_partition() {
        let p = DDPair::regular(3, 6).unwrap();
        let part = compute_partition(&p, 10_000).unwrap();
        assert_eq!(part.len(), 1);
        assert!((part.intervals[0].0 - 0.2606).abs() < 1e-3);
        assert!((part.jump_epsilons[0] - 0.4294).abs() < 1e-4);
    }

    #[test]
    fn regular_36_trial_poly() {
        let p = DDPair::regular(3, 6).unwrap();
        let poly = trial_entropy_poly(&p).unwrap();
        let want = [0.0, 0.0, -2.5, 10.0, -12.5, 7.0, -1.5];
        for (k, w) in want.iter().enumerate() {
            assert!((poly.coeff(k) - w).abs() < 1e-10, "x^{k}: {}", poly.coeff(k));
        }
    }

    #[test]
    fn cycle_code_has_no_jump() {
        let p = DDPair::regular(2, 4).unwrap();
        let part = compute_partition(&p, 10_000).unwrap();
        assert_eq!(part.intervals, vec![(0.0, 1.0)]);
        let area = bp_area(&p, &part);
        assert!((area.area - 0.5).abs() < 1e-12);
        assert!(area.deficits.iter().all(|d| d.abs() < 1e-12));
    }
}
