mod common;

use common::*;
use maxwell_core::counting::*;
use maxwell_core::density_evolution::{bp_threshold, DEFAULT_GRID};
use maxwell_core::exit_maxwell::map_threshold;
use maxwell_core::{DDPair, Error, Poly};
use proptest::prelude::*;

/// Node-perspective check polynomial Γ(x) = Σ (c/d) x^d / Σ c/d as a Poly.
fn check_node(rho: &[(usize, f64)]) -> Poly {
    let s = edge_integral(rho);
    Poly::from_terms(rho.iter().map(|&(d, c)| (d, c / d as f64 / s)))
}

fn var_node(lambda: &[(usize, f64)]) -> Poly {
    let s = edge_integral(lambda);
    Poly::from_terms(lambda.iter().map(|&(d, c)| (d, c / d as f64 / s)))
}

fn h2(e: f64) -> f64 {
    -(e * e.log2() + (1.0 - e) * (1.0 - e).log2())
}

fn ternary_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi))
}

/// Edge-weight growth rate written out directly: a convex minimization in
/// ln u and ln v, each solved by ternary search.
fn growth_oracle(lam_node: &Poly, gam_node: &Poly, e: f64) -> f64 {
    let a = lam_node.derivative().eval(1.0);
    let g = gam_node.derivative().eval(1.0);
    let var = |t: f64| {
        let u = t.exp();
        lam_node
            .coeffs()
            .iter()
            .enumerate()
            .map(|(l, c)| c * (1.0 + u.powi(l as i32)).ln())
            .sum::<f64>()
            - a * e * t
    };
    let chk = |s: f64| {
        let v = s.exp();
        gam_node
            .coeffs()
            .iter()
            .enumerate()
            .map(|(r, c)| {
                let q = ((1.0 + v).powi(r as i32) + (1.0 - v).powi(r as i32)) / 2.0;
                if *c == 0.0 { 0.0 } else { c * q.ln() }
            })
            .sum::<f64>()
            * (a / g)
            - a * e * s
    };
    (ternary_min(var, -20.0, 20.0) + ternary_min(chk, -20.0, 5.0)) / std::f64::consts::LN_2 - a * h2(e)
}

#[test]
fn psi_endpoints_regular() {
    for (l, r) in [(3, 6), (4, 8), (3, 4), (5, 10)] {
        let ddp = NormalizedDdp::from_pair(&DDPair::regular(l, r).unwrap()).unwrap();
        assert!(psi(&ddp, 1.0).value.abs() < 1e-12);
        assert!((psi(&ddp, 0.0).value + ddp.design_rate()).abs() < 1e-12, "({l},{r})");
    }
}

#[test]
fn psi_second_derivative_against_differences() {
    let p = pair_from(&[(2, 0.3), (3, 0.3), (14, 0.4)], &[(7, 1.0)]);
    let ddp = NormalizedDdp::from_pair(&p).unwrap();
    for &u in &[0.2, 0.5, 0.9, 1.0, 1.4] {
        let h = 1e-4;
        let d1 = (psi(&ddp, u + h).value - psi(&ddp, u - h).value) / (2.0 * h);
        let d2 = (psi(&ddp, u + h).value - 2.0 * psi(&ddp, u).value + psi(&ddp, u - h).value) / (h * h);
        assert!((psi_derivative(&ddp, u) - d1).abs() < 1e-6, "u {u}");
        assert!((psi_second_derivative(&ddp, u) - d2).abs() < 1e-3, "u {u}");
    }
}

#[test]
fn growth_rate_matches_direct_minimization() {
    let cases: [(&[(usize, f64)], &[(usize, f64)]); 3] = [
        (&[(3, 1.0)], &[(6, 1.0)]),
        (&[(2, 0.4), (7, 0.6)], &[(7, 1.0)]),
        (&[(3, 0.5), (4, 0.5)], &[(5, 0.3), (8, 0.7)]),
    ];
    for (lam, rho) in cases {
        let p = pair_from(lam, rho);
        let (ln, gn) = (var_node(lam), check_node(rho));
        for &e in &[0.05, 0.2, 0.35, 0.5, 0.65] {
            let got = growth_rate(&p, e, 1e-14).unwrap();
            let want = growth_oracle(&ln, &gn, e);
            assert!((got - want).abs() < 1e-8, "{lam:?} e {e}: {got} vs {want}");
        }
    }
}

#[test]
fn growth_rate_peaks_at_design_rate_for_3_6() {
    let p = DDPair::regular(3, 6).unwrap();
    assert!((growth_rate(&p, 0.5, 1e-14).unwrap() - 0.5).abs() < 1e-9);
    let best = (1..200)
        .map(|k| growth_rate(&p, k as f64 / 200.0, 1e-14).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((best - 0.5).abs() < 1e-9);
}

#[test]
fn residual_of_3_6_at_052() {
    let p = DDPair::regular(3, 6).unwrap();
    let h = conditional_entropy(&p, 0.52).unwrap();
    assert!(h.certified);
    assert!((h.value - 0.02755).abs() < 1e-4, "{}", h.value);
    let rep = check_tightness(&p, 0.52, DEFAULT_GRID).unwrap();
    assert_eq!(rep.verdict, Verdict::Certified);
    assert!((rep.psi_dd_at_one - rep.psi_dd_at_one_fd).abs() < 1e-3);
}

#[test]
fn below_bp_residual_is_empty() {
    let p = DDPair::regular(3, 6).unwrap();
    let res = residual_ensemble(&p, 0.4).unwrap();
    assert!(res.is_empty());
    assert!(res.normalized().is_err());
    let rep = check_tightness(&p, 0.4, DEFAULT_GRID).unwrap();
    assert!(rep.empty_residual);
    assert_eq!(rep.verdict, Verdict::Certified);
    let h = conditional_entropy(&p, 0.4).unwrap();
    assert_eq!(h.value, 0.0);
}

#[test]
fn certification_boundary_near_map() {
    let p = DDPair::regular(3, 6).unwrap();
    let map = map_threshold(&p, 1e-13).unwrap().epsilon;
    let certified = |e: f64| check_tightness(&p, e, DEFAULT_GRID).unwrap().verdict == Verdict::Certified;
    let (mut lo, mut hi) = (0.46, 0.52);
    assert!(!certified(lo) && certified(hi));
    for _ in 0..14 {
        let mid = 0.5 * (lo + hi);
        if certified(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((hi - map).abs() < 2e-4, "boundary {hi} vs {map}");
}

#[test]
fn rejects_generalized_and_exceptional() {
    let g = DDPair::generalized(Poly::monomial(1.0, 1), Poly::new(vec![0.0, 0.0, 1.0])).unwrap();
    assert!(matches!(check_tightness(&g, 0.6, DEFAULT_GRID), Err(Error::RequiresCheckDistribution)));
    let p = pair_from(&[(2, 0.3), (3, 0.3), (14, 0.4)], &[(7, 1.0)]);
    let bp = bp_threshold(&p, 1e-14).epsilon;
    assert!(check_tightness(&p, bp, DEFAULT_GRID).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn psi_zero_at_one((lam, rho) in arb_ensemble()) {
        let ddp = NormalizedDdp::from_pair(&pair_from(&lam, &rho)).unwrap();
        prop_assert!(psi(&ddp, 1.0).value.abs() < 1e-12);
    }

    #[test]
    fn residual_edges_balance((lam, rho) in arb_ensemble(), t in 0.02f64..0.98) {
        let p = pair_from(&lam, &rho);
        let bp = bp_threshold(&p, 1e-13).epsilon;
        prop_assume!(bp < 0.97);
        let eps = bp + 0.01 + t * (0.99 - bp - 0.01).max(0.0);
        let res = residual_ensemble(&p, eps).unwrap();
        prop_assume!(!res.is_empty());
        // edges counted from either side of the residual graph agree
        let var_edges = res.lambda_node_res.derivative().eval(1.0);
        let chk_edges = res.gamma_node_res.derivative().eval(1.0);
        let ratio = var_node(&lam).derivative().eval(1.0) / check_node(&rho).derivative().eval(1.0);
        prop_assert!((var_edges - ratio * chk_edges).abs() < 1e-8, "{var_edges} vs {}", ratio * chk_edges);
    }
}
