//! Composite Gauss-Legendre quadrature.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(16).unwrap()))
}

/// ∫ₐᵇ f with `panels` equal sub-intervals of a 16-point rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let r = rule();
    (0..panels)
        .map(|k| {
            let lo = a + h * k as f64;
            let hi = if k + 1 == panels { b } else { lo + h };
            r.integrate(lo, hi, &f)
        })
        .sum()
}

/// Integral over `[a, b]` split at the given interior breakpoints.
pub fn integrate_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], panels: usize) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2)
        .map(|w| {
            let share = ((w[1] - w[0]) / (b - a) * panels as f64).ceil() as usize;
            integrate(&f, w[0], w[1], share.max(4))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(9), 0.0, 1.0, 1);
        assert!((v - 0.1).abs() < 1e-15);
    }
}
