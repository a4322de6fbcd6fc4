use maxwell_core::Poly;
use proptest::prelude::*;

fn arb_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(-3.0f64..3.0, 0..8).prop_map(Poly::new)
}

fn direct(p: &Poly, x: f64) -> f64 {
    p.coeffs().iter().enumerate().map(|(k, c)| c * x.powi(k as i32)).sum()
}

proptest! {
    #[test]
    fn horner_matches_power_sum(p in arb_poly(), x in -1.5f64..1.5) {
        prop_assert!((p.eval(x) - direct(&p, x)).abs() < 1e-10);
    }

    #[test]
    fn ring_operations(p in arb_poly(), q in arb_poly(), x in -1.0f64..1.0) {
        prop_assert!(((&p + &q).eval(x) - (p.eval(x) + q.eval(x))).abs() < 1e-10);
        prop_assert!(((&p - &q).eval(x) - (p.eval(x) - q.eval(x))).abs() < 1e-10);
        prop_assert!(((&p * &q).eval(x) - p.eval(x) * q.eval(x)).abs() < 1e-9);
    }

    #[test]
    fn calculus_round_trip(p in arb_poly(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        prop_assert!(p.antiderivative().derivative().max_coeff_diff(&p) < 1e-12);
        let simpson = {
            let n = 400;
            let h = (b - a) / n as f64;
            (0..=n).map(|i| {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * p.eval(a + h * i as f64)
            }).sum::<f64>() * h / 3.0
        };
        prop_assert!((p.integral(a, b) - simpson).abs() < 1e-9);
    }

    #[test]
    fn substitution_and_composition(p in arb_poly(), a in -1.0f64..1.0, b in -1.0f64..1.0, x in -1.0f64..1.0) {
        prop_assert!((p.affine_substitute(a, b).eval(x) - p.eval(a + b * x)).abs() < 1e-9);
        prop_assert!((p.scale_argument(b).eval(x) - p.eval(b * x)).abs() < 1e-10);
        let q = Poly::new(vec![a, b, 0.5]);
        prop_assert!((p.compose(&q).eval(x) - p.eval(q.eval(x))).abs() < 1e-8);
    }

    #[test]
    fn derivative_pair(p in arb_poly(), x in -1.0f64..1.0) {
        let (v, d) = p.eval_with_derivative(x);
        prop_assert!((v - p.eval(x)).abs() < 1e-12);
        prop_assert!((d - p.derivative().eval(x)).abs() < 1e-10);
    }
}

#[test]
fn degree_and_trimming() {
    let p = Poly::new(vec![0.0, 2.0, 0.0, 0.0]);
    assert_eq!(p.degree(), Some(1));
    assert_eq!(p.lowest_power(), Some(1));
    assert!(Poly::zero().is_zero());
    assert_eq!(Poly::zero().degree(), None);
    assert_eq!(Poly::from_terms([(2, 1.0), (2, 0.5)]).coeff(2), 1.5);
}
