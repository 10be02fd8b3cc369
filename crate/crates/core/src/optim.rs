//! Scalar minimization helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x, f(x))` once the bracket is narrower than `tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Largest `x` in `[lo, hi]` with `pred(x)` true, assuming `pred(lo)` holds,
/// `pred(hi)` fails, and the predicate flips once.
pub fn bisect_last_true<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x| (x - 1.3).powi(2) + 2.0, -5.0, 4.0, 1e-9);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bisection_locates_threshold() {
        let x = bisect_last_true(|x| x * x < 2.0, 0.0, 2.0, 1e-12);
        assert!((x - 2f64.sqrt()).abs() < 1e-11);
    }
}
