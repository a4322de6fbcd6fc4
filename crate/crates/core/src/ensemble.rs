//! Degree-distribution pairs and their derived node-perspective forms.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Coefficient sums within this distance of 1 are silently renormalized.
pub const NORMALIZE_SLACK: f64 = 1e-9;

/// Λ(x) = ∫₀ˣλ / ∫₀¹λ
pub fn edge_to_node(edge: &Poly) -> Result<Poly> {
    let total = edge.integral_zero_to(1.0);
    if !(total > 0.0) {
        return Err(Error::InvalidDistribution(
            "edge distribution integrates to zero".into(),
        ));
    }
    Ok(edge.antiderivative().scale(1.0 / total))
}

/// λ(x) = Λ'(x) / Λ'(1)
pub fn node_to_edge(node: &Poly) -> Result<Poly> {
    let d = node.derivative();
    let total = d.eval(1.0);
    if !(total > 0.0) {
        return Err(Error::InvalidDistribution(
            "node distribution has zero average degree".into(),
        ));
    }
    Ok(d.scale(1.0 / total))
}

fn validate_edge_distribution(name: &str, p: Poly) -> Result<Poly> {
    if p.is_zero() {
        return Err(Error::InvalidDistribution(format!("{name} is empty")));
    }
    for (k, &c) in p.coeffs().iter().enumerate() {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "{name} coefficient of x^{k} is {c}"
            )));
        }
    }
    if p.coeff(0) != 0.0 {
        return Err(Error::InvalidDistribution(format!(
            "{name} has degree-1 nodes (nonzero constant term)"
        )));
    }
    let sum = p.sum_coeffs();
    if (sum - 1.0).abs() > NORMALIZE_SLACK {
        return Err(Error::InvalidDistribution(format!(
            "{name} coefficients sum to {sum}, not 1"
        )));
    }
    Ok(p.scale(1.0 / sum))
}

fn validate_right_exit(y: Poly) -> Result<Poly> {
    if y.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidDistribution(
            "right exit function has non-finite coefficients".into(),
        ));
    }
    if y.coeff(0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!(
            "right exit function has y(0) = {}",
            y.coeff(0)
        )));
    }
    let at_one = y.eval(1.0);
    if (at_one - 1.0).abs() > NORMALIZE_SLACK {
        return Err(Error::InvalidDistribution(format!(
            "right exit function has y(1) = {at_one}"
        )));
    }
    let dy = y.derivative();
    for i in 0..=1000 {
        let x = i as f64 / 1000.0;
        if dy.eval(x) < -1e-8 {
            return Err(Error::InvalidDistribution(format!(
                "right exit function decreases near x = {x}"
            )));
        }
    }
    Ok(y)
}

/// An LDPC ensemble given by edge-perspective degree distributions, or a
/// generalized ensemble whose check side is described only by its EXIT
/// function `y(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DDPair {
    lambda: Poly,
    rho: Option<Poly>,
    lambda_node: Poly,
    gamma_node: Option<Poly>,
    right_exit_override: Option<Poly>,
    check_exit: Poly,
}

impl DDPair {
    pub fn new(lambda: Poly, rho: Poly) -> Result<Self> {
        let lambda = validate_edge_distribution("lambda", lambda)?;
        let rho = validate_edge_distribution("rho", rho)?;
        let lambda_node = edge_to_node(&lambda)?;
        let gamma_node = edge_to_node(&rho)?;
        let one_minus_x = Poly::new(vec![1.0, -1.0]);
        let check_exit = &Poly::one() - &rho.compose(&one_minus_x);
        Ok(Self {
            lambda,
            rho: Some(rho),
            lambda_node,
            gamma_node: Some(gamma_node),
            right_exit_override: None,
            check_exit,
        })
    }

    /// Generalized ensemble: `y` replaces `1 − ρ(1 − x)` everywhere.
    pub fn generalized(lambda: Poly, y: Poly) -> Result<Self> {
        let lambda = validate_edge_distribution("lambda", lambda)?;
        let y = validate_right_exit(y)?;
        let lambda_node = edge_to_node(&lambda)?;
        Ok(Self {
            lambda,
            rho: None,
            lambda_node,
            gamma_node: None,
            right_exit_override: Some(y.clone()),
            check_exit: y,
        })
    }

    /// `(x^{l−1}, x^{r−1})`
    pub fn regular(l: usize, r: usize) -> Result<Self> {
        if l < 2 || r < 2 {
            return Err(Error::InvalidDistribution(format!(
                "regular degrees ({l}, {r}) need both at least 2"
            )));
        }
        Self::new(Poly::monomial(1.0, l - 1), Poly::monomial(1.0, r - 1))
    }

    /// From `(degree, edge fraction)` lists, degree `d` contributing `x^{d−1}`.
    pub fn from_degrees(lambda: &[(usize, f64)], rho: &[(usize, f64)]) -> Result<Self> {
        Self::new(degrees_to_poly("lambda", lambda)?, degrees_to_poly("rho", rho)?)
    }

    pub fn lambda(&self) -> &Poly {
        &self.lambda
    }

    pub fn rho(&self) -> Option<&Poly> {
        self.rho.as_ref()
    }

    pub fn lambda_node(&self) -> &Poly {
        &self.lambda_node
    }

    pub fn gamma_node(&self) -> Option<&Poly> {
        self.gamma_node.as_ref()
    }

    pub fn right_exit_override(&self) -> Option<&Poly> {
        self.right_exit_override.as_ref()
    }

    pub fn is_generalized(&self) -> bool {
        self.right_exit_override.is_some()
    }

    /// The check-side EXIT function `y(x)`.
    pub fn check_exit(&self) -> &Poly {
        &self.check_exit
    }

    // With a check distribution the EXIT function is evaluated as
    // 1 − ρ(1 − x): its expansion in x cancels badly at high degree.
    fn ldpc_rho(&self) -> Option<&Poly> {
        match &self.right_exit_override {
            None => self.rho.as_ref(),
            Some(_) => None,
        }
    }

    pub fn y(&self, x: f64) -> f64 {
        match self.ldpc_rho() {
            Some(rho) => {
                // Σ c_k (1 − (1−x)^k), each term through expm1 so that small x
                // keeps its relative precision
                let log_base = (-x).ln_1p();
                let mut y = 1.0 - rho.sum_coeffs();
                for (k, &c) in rho.coeffs().iter().enumerate().skip(1) {
                    if c != 0.0 {
                        y -= c * (k as f64 * log_base).exp_m1();
                    }
                }
                y
            }
            None => self.check_exit.eval(x),
        }
    }

    /// (y(x), y'(x))
    pub fn y_with_derivative(&self, x: f64) -> (f64, f64) {
        match self.ldpc_rho() {
            Some(rho) => (self.y(x), rho.derivative().eval(1.0 - x)),
            None => self.check_exit.eval_with_derivative(x),
        }
    }

    /// ∫ₐᵇ y(t) dt
    pub fn check_exit_integral(&self, a: f64, b: f64) -> f64 {
        match self.ldpc_rho() {
            Some(rho) => (b - a) - rho.integral(1.0 - b, 1.0 - a),
            None => self.check_exit.integral(a, b),
        }
    }

    /// ∫₀¹λ
    pub fn lambda_integral(&self) -> f64 {
        self.lambda.integral_zero_to(1.0)
    }

    /// Λ'(1), the average variable degree.
    pub fn avg_var_degree(&self) -> f64 {
        1.0 / self.lambda_integral()
    }

    /// Γ'(1), when a check distribution exists.
    pub fn avg_check_degree(&self) -> Option<f64> {
        self.rho.as_ref().map(|r| 1.0 / r.integral_zero_to(1.0))
    }

    pub fn design_rate(&self) -> f64 {
        match (&self.right_exit_override, &self.rho) {
            (None, Some(rho)) => 1.0 - rho.integral_zero_to(1.0) / self.lambda_integral(),
            _ => 1.0 - (1.0 - self.check_exit.integral_zero_to(1.0)) / self.lambda_integral(),
        }
    }

    /// ε(x) = x / λ(y(x)); at `x = 0` the stability limit.
    pub fn epsilon_at(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.stability_limit();
        }
        let denom = self.lambda.eval(self.y(x));
        if denom <= 0.0 {
            return self.stability_limit();
        }
        x / denom
    }

    /// Numerator of ε'(x): λ(y) − x·λ'(y)·y'(x). Same sign as ε'.
    pub fn epsilon_slope_numerator(&self, x: f64) -> f64 {
        let (y, dy) = self.y_with_derivative(x);
        let (l, dl) = self.lambda.eval_with_derivative(y);
        l - x * dl * dy
    }

    /// ε'(x) by the quotient rule.
    pub fn epsilon_slope(&self, x: f64) -> f64 {
        let l = self.lambda.eval(self.y(x));
        self.epsilon_slope_numerator(x) / (l * l)
    }

    /// lim_{x→0} ε(x) from leading coefficients: 1/(λ'(0)·y'(0)), or +∞.
    pub fn stability_limit(&self) -> f64 {
        let prod = self.lambda.coeff(1) * self.check_exit.coeff(1);
        if prod > 0.0 {
            1.0 / prod
        } else {
            f64::INFINITY
        }
    }

    /// P_ε(x, y) in the form valid for both modes:
    /// Λ'(1)[x(1−y) − ∫₀ˣ(1−y(t))dt] + εΛ(y).
    pub fn trial_entropy(&self, epsilon: f64, x: f64, y: f64) -> f64 {
        let a = self.avg_var_degree();
        let tail = x - self.check_exit_integral(0.0, x);
        a * (x * (1.0 - y) - tail) + epsilon * self.lambda_node.eval(y)
    }

    /// P(x) = P_{ε(x)}(x, y(x)) along the EBP curve; P(0) = 0.
    pub fn trial_entropy_along_curve(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let y = self.y(x);
        let lam = self.lambda.eval(y);
        let a = self.avg_var_degree();
        let tail = x - self.check_exit_integral(0.0, x);
        // ε(x)Λ(y) written as xΛ(y)/λ(y) to stay finite as x → 0
        let last = if lam > 0.0 {
            x * self.lambda_node.eval(y) / lam
        } else {
            0.0
        };
        a * (x * (1.0 - y) - tail) + last
    }

    pub fn to_spec(&self) -> EnsembleSpec {
        let lambda = self
            .lambda
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(k, &c)| ((k + 1).to_string(), c))
            .collect();
        let rho = self.rho.as_ref().map(|r| {
            r.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(k, &c)| ((k + 1).to_string(), c))
                .collect()
        });
        let right_exit = self.right_exit_override.as_ref().map(|y| {
            y.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(k, &c)| (k.to_string(), c))
                .collect()
        });
        EnsembleSpec {
            lambda,
            rho,
            right_exit,
        }
    }
}

fn degrees_to_poly(name: &str, terms: &[(usize, f64)]) -> Result<Poly> {
    let mut out = Vec::new();
    for &(d, c) in terms {
        if d < 2 {
            return Err(Error::InvalidDistribution(format!(
                "{name} lists degree {d}; minimum degree is 2"
            )));
        }
        out.push((d - 1, c));
    }
    Ok(Poly::from_terms(out))
}

/// On-disk ensemble description. `lambda`/`rho` keys are node degrees,
/// `right_exit` keys are powers of x.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EnsembleSpec {
    pub lambda: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_exit: Option<BTreeMap<String, f64>>,
}

fn parse_keyed(name: &str, map: &BTreeMap<String, f64>) -> Result<Vec<(usize, f64)>> {
    map.iter()
        .map(|(k, &v)| {
            k.trim()
                .parse::<usize>()
                .map(|d| (d, v))
                .map_err(|_| Error::Parse(format!("{name}: key {k:?} is not a nonnegative integer")))
        })
        .collect()
}

impl EnsembleSpec {
    pub fn into_pair(&self) -> Result<DDPair> {
        let lambda = degrees_to_poly("lambda", &parse_keyed("lambda", &self.lambda)?)?;
        match (&self.rho, &self.right_exit) {
            (_, Some(y)) => {
                let y = Poly::from_terms(parse_keyed("right_exit", y)?);
                DDPair::generalized(lambda, y)
            }
            (Some(rho), None) => {
                let rho = degrees_to_poly("rho", &parse_keyed("rho", rho)?)?;
                DDPair::new(lambda, rho)
            }
            (None, None) => Err(Error::Parse(
                "ensemble needs either \"rho\" or \"right_exit\"".into(),
            )),
        }
    }
}

pub fn parse_ensemble(text: &str) -> Result<DDPair> {
    let spec: EnsembleSpec = serde_json::from_str(text)?;
    spec.into_pair()
}

pub fn load_ensemble(path: &Path) -> Result<DDPair> {
    let text = std::fs::read_to_string(path)?;
    parse_ensemble(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_36_basics() {
        let p = DDPair::regular(3, 6).unwrap();
        assert!((p.design_rate() - 0.5).abs() < 1e-15);
        assert!((p.avg_var_degree() - 3.0).abs() < 1e-12);
        assert_eq!(p.stability_limit(), f64::INFINITY);
        assert!((p.epsilon_at(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degree_one_and_bad_sums() {
        assert!(DDPair::new(Poly::new(vec![0.1, 0.9]), Poly::monomial(1.0, 5)).is_err());
        assert!(DDPair::new(Poly::monomial(0.9, 2), Poly::monomial(1.0, 5)).is_err());
        let nearly = DDPair::new(Poly::monomial(1.0 + 5e-10, 2), Poly::monomial(1.0, 5)).unwrap();
        assert!((nearly.lambda().sum_coeffs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"lambda":{"2":0.3,"3":0.3,"14":0.4},"rho":{"7":1.0}}"#;
        let p = parse_ensemble(text).unwrap();
        assert!((p.design_rate() - 19.0 / 39.0).abs() < 1e-12);
        let back = p.to_spec().into_pair().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn json_generalized() {
        let text = r#"{"lambda":{"2":1.0},"right_exit":{"2":3,"3":4,"4":-15,"5":12,"6":-3}}"#;
        let p = parse_ensemble(text).unwrap();
        assert!(p.is_generalized());
        assert!((p.design_rate() - 1.0 / 7.0).abs() < 1e-12);
    }
}
