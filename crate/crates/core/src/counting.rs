//! Residual ensembles after peeling, the weight-enumerator exponent Ψ, and
//! certification of the asymptotic conditional entropy.

use std::f64::consts::LN_2;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::Serialize;

use crate::density_evolution::{de_fixed_point, DEFixedPoint, DEFAULT_GRID, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::ensemble::DDPair;
use crate::error::{Error, Result};
use crate::exit_maxwell::compute_partition;
use crate::poly::Poly;
use crate::roots::{bisect, golden_min};

/// Distance from a partition jump below which ε counts as exceptional.
pub const EXCEPTIONAL_GAP: f64 = 1e-9;

/// Degree distributions of the graph left after peeling at ε, normalized to
/// the original numbers of variable and check nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEnsemble {
    pub lambda_node_res: Poly,
    pub gamma_node_res: Poly,
    pub epsilon: f64,
    pub fixed_point: DEFixedPoint,
}

impl ResidualEnsemble {
    pub fn is_empty(&self) -> bool {
        self.lambda_node_res.sum_coeffs() < 1e-14 || self.gamma_node_res.sum_coeffs() < 1e-14
    }

    /// Proper node-perspective distributions of the residual graph.
    pub fn normalized(&self) -> Result<NormalizedDdp> {
        if self.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "residual graph at {} is empty",
                self.epsilon
            )));
        }
        NormalizedDdp::new(
            self.lambda_node_res.scale(1.0 / self.lambda_node_res.sum_coeffs()),
            self.gamma_node_res.scale(1.0 / self.gamma_node_res.sum_coeffs()),
        )
    }
}

pub fn residual_ensemble(pair: &DDPair, epsilon: f64) -> Result<ResidualEnsemble> {
    let gamma = pair.gamma_node().ok_or(Error::RequiresCheckDistribution)?;
    let fixed_point = de_fixed_point(pair, epsilon, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    Ok(residual_at(pair, gamma, fixed_point))
}

fn residual_at(pair: &DDPair, gamma: &Poly, fixed_point: DEFixedPoint) -> ResidualEnsemble {
    let DEFixedPoint { epsilon, x, y } = fixed_point;
    let lambda_node_res = pair.lambda_node().scale_argument(y).scale(epsilon);
    let shifted = gamma.affine_substitute(1.0 - x, x);
    // drop the degree-0 and degree-1 terms
    let mut coeffs = shifted.coeffs().to_vec();
    for c in coeffs.iter_mut().take(2) {
        *c = 0.0;
    }
    ResidualEnsemble {
        lambda_node_res,
        gamma_node_res: Poly::new(coeffs),
        epsilon,
        fixed_point,
    }
}

/// A proper node-perspective degree distribution pair (Λ(1) = Γ(1) = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedDdp {
    lambda_node: Poly,
    gamma_node: Poly,
    lambda_edge: Poly,
    var_degree: f64,
    check_degree: f64,
}

impl NormalizedDdp {
    pub fn new(lambda_node: Poly, gamma_node: Poly) -> Result<Self> {
        let var_degree = lambda_node.derivative().eval(1.0);
        let check_degree = gamma_node.derivative().eval(1.0);
        if !(var_degree > 0.0 && check_degree > 0.0) {
            return Err(Error::InvalidDistribution(
                "node distribution with zero average degree".into(),
            ));
        }
        let lambda_edge = lambda_node.derivative().scale(1.0 / var_degree);
        Ok(Self {
            lambda_node,
            gamma_node,
            lambda_edge,
            var_degree,
            check_degree,
        })
    }

    pub fn from_pair(pair: &DDPair) -> Result<Self> {
        let gamma = pair.gamma_node().ok_or(Error::RequiresCheckDistribution)?;
        Self::new(pair.lambda_node().clone(), gamma.clone())
    }

    pub fn lambda_node(&self) -> &Poly {
        &self.lambda_node
    }

    pub fn gamma_node(&self) -> &Poly {
        &self.gamma_node
    }

    /// 1 − Λ'(1)/Γ'(1)
    pub fn design_rate(&self) -> f64 {
        1.0 - self.var_degree / self.check_degree
    }
}

/// Value with first and second derivative, for exact Ψ''.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Jet {
    v: f64,
    d1: f64,
    d2: f64,
}

impl Jet {
    fn constant(v: f64) -> Self {
        Self { v, d1: 0.0, d2: 0.0 }
    }

    fn variable(v: f64) -> Self {
        Self { v, d1: 1.0, d2: 0.0 }
    }

    fn ln(self) -> Self {
        Self {
            v: self.v.ln(),
            d1: self.d1 / self.v,
            d2: self.d2 / self.v - (self.d1 / self.v).powi(2),
        }
    }

    fn powi(self, n: u32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        let nf = n as f64;
        let p1 = self.v.powi(n as i32 - 1);
        let p2 = if n >= 2 { self.v.powi(n as i32 - 2) } else { 0.0 };
        Self {
            v: p1 * self.v,
            d1: nf * p1 * self.d1,
            d2: nf * (nf - 1.0) * p2 * self.d1 * self.d1 + nf * p1 * self.d2,
        }
    }

    fn scale(self, s: f64) -> Self {
        Self {
            v: self.v * s,
            d1: self.d1 * s,
            d2: self.d2 * s,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv_v = 1.0 / o.v;
        let inv = Jet {
            v: inv_v,
            d1: -o.d1 * inv_v * inv_v,
            d2: (2.0 * o.d1 * o.d1 * inv_v - o.d2) * inv_v * inv_v,
        };
        self * inv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiEvaluation {
    pub u: f64,
    pub v: f64,
    pub value: f64,
}

fn psi_jet(ddp: &NormalizedDdp, u: Jet) -> (Jet, Jet) {
    let one = Jet::constant(1.0);
    let two = Jet::constant(2.0);
    let mut num = Jet::constant(0.0);
    let mut den = Jet::constant(0.0);
    for (k, &c) in ddp.lambda_edge.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let l = (k + 1) as u32;
        let denom = one + u.powi(l);
        num = num + (u.powi(l - 1) / denom).scale(c);
        den = den + (one / denom).scale(c);
    }
    let v = num / den;

    let a = ddp.var_degree;
    let first = ((one + u * v) / ((one + u) * (one + v))).ln().scale(-a);
    let mut second = Jet::constant(0.0);
    for (l, &c) in ddp.lambda_node.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let l = l as u32;
        let term = ((one + u.powi(l)) / (two * (one + u).powi(l))).ln();
        second = second + term.scale(c);
    }
    let w = (one - v) / (one + v);
    let mut third = Jet::constant(0.0);
    for (r, &c) in ddp.gamma_node.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        third = third + (one + w.powi(r as u32)).ln().scale(c);
    }
    let third = third.scale(a / ddp.check_degree);
    ((first + second + third).scale(1.0 / LN_2), v)
}

/// Ψ(u) with v taken from the stationarity ratio of the variable side.
pub fn psi(ddp: &NormalizedDdp, u: f64) -> PsiEvaluation {
    let (value, v) = psi_jet(ddp, Jet::constant(u.max(0.0)));
    PsiEvaluation {
        u,
        v: v.v,
        value: value.v,
    }
}

/// Ψ'(u), exact.
pub fn psi_derivative(ddp: &NormalizedDdp, u: f64) -> f64 {
    psi_jet(ddp, Jet::variable(u)).0.d1
}

/// Ψ''(u), exact.
pub fn psi_second_derivative(ddp: &NormalizedDdp, u: f64) -> f64 {
    psi_jet(ddp, Jet::variable(u)).0.d2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Violated,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondaryMaximum {
    pub u: f64,
    pub psi: f64,
    /// ∂Ψ(u)/∂ε at this u, by central difference in ε
    pub d_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub epsilon: f64,
    pub verdict: Verdict,
    /// location and value of the largest Ψ away from u = 1
    pub max_u: f64,
    pub max_value: f64,
    pub psi_dd_at_one: f64,
    /// central-difference estimate of Ψ''(1)
    pub psi_dd_at_one_fd: f64,
    pub secondary_maxima: Vec<SecondaryMaximum>,
    /// nothing survives peeling; the conditional entropy is trivially zero
    pub empty_residual: bool,
}

fn secondary_maxima(ddp: &NormalizedDdp, grid: usize) -> (Vec<(f64, f64)>, f64) {
    let n = grid.max(10);
    let vals: Vec<f64> = (0..=n).map(|i| psi(ddp, i as f64 / n as f64).value).collect();
    let worst_grid = vals[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut maxima = Vec::new();
    if vals[0] >= vals[1] {
        maxima.push((0.0, vals[0]));
    }
    for i in 1..n {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            let lo = (i - 1) as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            let (u, neg) = golden_min(|u| -psi(ddp, u).value, lo, hi, 1e-12);
            if (1.0 - u) > 0.5 / n as f64 {
                maxima.push((u, -neg));
            }
        }
    }
    (maxima, worst_grid)
}

/// Checks that Ψ of the residual ensemble at ε peaks only at u = 1 with
/// negative curvature there.
pub fn check_tightness(pair: &DDPair, epsilon: f64, grid_size: usize) -> Result<TightnessReport> {
    let gamma = pair.gamma_node().ok_or(Error::RequiresCheckDistribution)?;
    let partition = compute_partition(pair, DEFAULT_GRID)?;
    if let Some(j) = partition
        .jump_epsilons
        .iter()
        .find(|&&j| (j - epsilon).abs() <= EXCEPTIONAL_GAP)
    {
        return Err(Error::InvalidParameter(format!(
            "{epsilon} is within {EXCEPTIONAL_GAP} of the discontinuity at {j}; nudge it"
        )));
    }
    let res = residual_ensemble(pair, epsilon)?;
    if res.is_empty() {
        return Ok(TightnessReport {
            epsilon,
            verdict: Verdict::Certified,
            max_u: 0.0,
            max_value: f64::NEG_INFINITY,
            psi_dd_at_one: f64::NAN,
            psi_dd_at_one_fd: f64::NAN,
            secondary_maxima: Vec::new(),
            empty_residual: true,
        });
    }
    let ddp = res.normalized()?;
    let (maxima, worst_grid) = secondary_maxima(&ddp, grid_size);
    let dd = psi_second_derivative(&ddp, 1.0);
    let h = 1e-5;
    let dd_fd = (psi(&ddp, 1.0 + h).value - 2.0 * psi(&ddp, 1.0).value + psi(&ddp, 1.0 - h).value) / (h * h);

    let (max_u, max_value) = maxima
        .iter()
        .copied()
        .fold((0.0, f64::NEG_INFINITY), |b, m| if m.1 > b.1 { m } else { b });

    let d_eps = 1e-6;
    let neighbour = |e: f64| -> Option<NormalizedDdp> {
        let fp = de_fixed_point(pair, e, DEFAULT_TOL, DEFAULT_MAX_ITER).ok()?;
        residual_at(pair, gamma, fp).normalized().ok()
    };
    let (up, down) = (neighbour(epsilon + d_eps), neighbour(epsilon - d_eps));
    let secondary_maxima = maxima
        .iter()
        .map(|&(u, v)| SecondaryMaximum {
            u,
            psi: v,
            d_epsilon: match (&up, &down) {
                (Some(a), Some(b)) => (psi(a, u).value - psi(b, u).value) / (2.0 * d_eps),
                _ => f64::NAN,
            },
        })
        .collect();

    let top = max_value.max(worst_grid);
    let verdict = if top > 1e-9 {
        Verdict::Violated
    } else if max_value >= -1e-9 {
        Verdict::Marginal
    } else if worst_grid < -1e-12 && dd < 0.0 {
        Verdict::Certified
    } else if dd >= 0.0 {
        Verdict::Violated
    } else {
        Verdict::Marginal
    };
    Ok(TightnessReport {
        epsilon,
        verdict,
        max_u,
        max_value,
        psi_dd_at_one: dd,
        psi_dd_at_one_fd: dd_fd,
        secondary_maxima,
        empty_residual: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalEntropy {
    pub value: f64,
    pub certified: bool,
}

/// max(0, P_ε(x, y)) at the DE fixed point, with the certification verdict.
pub fn conditional_entropy(pair: &DDPair, epsilon: f64) -> Result<ConditionalEntropy> {
    let fp = de_fixed_point(pair, epsilon, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let value = pair.trial_entropy(epsilon, fp.x, fp.y).max(0.0);
    let certified = if pair.is_generalized() {
        false
    } else {
        match check_tightness(pair, epsilon, DEFAULT_GRID) {
            Ok(r) => r.verdict == Verdict::Certified,
            Err(Error::InvalidParameter(_)) => false,
            Err(e) => return Err(e),
        }
    };
    Ok(ConditionalEntropy { value, certified })
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn binary_entropy(e: f64) -> f64 {
    if e <= 0.0 || e >= 1.0 {
        return 0.0;
    }
    -(e * e.log2() + (1.0 - e) * (1.0 - e).log2())
}

/// ln q_r(v) with q_r(v) = ((1+v)^r + (1−v)^r)/2, stable for large v.
fn ln_even_weight(r: usize, v: f64) -> f64 {
    let w = (1.0 - v) / (1.0 + v);
    r as f64 * v.ln_1p() + ((1.0 + w.powi(r as i32)) / 2.0).ln()
}

/// v q_r'(v) / (r q_r(v))
fn even_weight_fraction(r: usize, v: f64) -> f64 {
    let w = (1.0 - v) / (1.0 + v);
    let ri = r as i32;
    v * (1.0 - w.powi(ri - 1)) / ((1.0 + v) * (1.0 + w.powi(ri)))
}

const LOG_RANGE: f64 = 60.0;

/// (1/n) log₂ of the expected number of codewords touching a fraction `e`
/// of the edges; minimized separately over u and v, each by bisection on
/// its stationarity relation in log scale.
pub fn growth_rate_ddp(ddp: &NormalizedDdp, e: f64, tol: f64) -> Result<f64> {
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::InvalidParameter(format!("edge fraction {e} not in (0, 1)")));
    }
    let a = ddp.var_degree;
    let lam = ddp.lambda_edge.coeffs();
    let u_eq = |t: f64| -> f64 {
        lam.iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(k, &c)| c * sigmoid((k + 1) as f64 * t))
            .sum::<f64>()
            - e
    };
    let t = bisect(u_eq, -LOG_RANGE, LOG_RANGE, tol.max(1e-15));
    if u_eq(t).abs() > 1e-6 {
        return Err(Error::NonConvergence {
            what: "variable-side stationarity",
            iterations: 200,
            last: t,
        });
    }
    let gamma = ddp.gamma_node.coeffs();
    let g = ddp.check_degree;
    let v_eq = |s: f64| -> f64 {
        let v = s.exp();
        gamma
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(r, &c)| c * r as f64 / g * even_weight_fraction(r, v))
            .sum::<f64>()
            - e
    };
    if v_eq(LOG_RANGE) < 0.0 {
        // more edges than even-weight check patterns can absorb
        return Ok(f64::NEG_INFINITY);
    }
    let s = bisect(v_eq, -LOG_RANGE, LOG_RANGE, tol.max(1e-15));

    let var_part: f64 = ddp
        .lambda_node
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(l, &c)| c * softplus(l as f64 * t))
        .sum::<f64>()
        - a * e * t;
    let check_part: f64 = gamma
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(r, &c)| c * ln_even_weight(r, s.exp()))
        .sum::<f64>()
        * (a / g)
        - a * e * s;
    Ok((var_part + check_part) / LN_2 - a * binary_entropy(e))
}

pub fn growth_rate(pair: &DDPair, e: f64, tol: f64) -> Result<f64> {
    growth_rate_ddp(&NormalizedDdp::from_pair(pair)?, e, tol)
}
