//! Scalar root bracketing and minimization helpers.

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign (or zero).
/// Stops when the bracket is narrower than `tol` or after 200 halvings.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for a minimum of a unimodal function on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Roots of `f` on the open interval `(lo, hi)` found by sign changes on a
/// uniform grid of `grid` cells, each refined by bisection.
pub fn sign_change_roots<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: f64,
) -> Vec<f64> {
    let step = (hi - lo) / grid as f64;
    let mut roots = Vec::new();
    let mut x_prev = lo + step;
    let mut f_prev = f(x_prev);
    for i in 2..grid {
        let x = lo + step * i as f64;
        let fx = f(x);
        if f_prev == 0.0 {
            roots.push(x_prev);
        } else if (fx < 0.0) != (f_prev < 0.0) && fx != 0.0 {
            roots.push(bisect(&f, x_prev, x, tol));
        }
        x_prev = x;
        f_prev = fx;
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn golden_parabola() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn finds_all_sine_roots() {
        let roots = sign_change_roots(|x| (10.0 * x).sin(), 0.0, 1.0, 1000, 1e-13);
        assert_eq!(roots.len(), 3);
        assert!((roots[0] - std::f64::consts::PI / 10.0).abs() < 1e-12);
    }
}
