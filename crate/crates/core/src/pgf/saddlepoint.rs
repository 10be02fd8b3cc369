//! Lattice saddlepoint approximation of `P[X >= d]`.

use statrs::function::erf::erfc;

use super::{pgf_mean, RationalPgf, TailCurve, TailMethod};
use crate::error::{Error, Result};
use crate::optim::{bisect_last_true, golden_section};

const X_LO: f64 = 1e-8;
const X_CAP: f64 = 30.0;
const GRID_RATIO: f64 = 1.05;
const RADIUS_BACKOFF: f64 = 1e-6;

/// `y e^{y^2/2} Q(y)` with `Q` the standard normal tail.
pub fn b0(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    if y < 25.0 {
        return y * (0.5 * y * y).exp() * 0.5 * erfc(y / std::f64::consts::SQRT_2);
    }
    let z = 1.0 / (y * y);
    let series = 1.0 - z * (1.0 - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z)));
    series / (2.0 * std::f64::consts::PI).sqrt()
}

/// `(κ, κ', κ'')` of `κ(x) = log G(e^{sign·x})`.
fn cumulants(g: &RationalPgf, x: f64, sign: f64) -> Option<(f64, f64, f64)> {
    let s = (sign * x).exp();
    let t = g.rational().taylor(s, 3).ok()?;
    if t.len() < 3 {
        return None;
    }
    let (v, d1, d2) = (t[0], t[1], 2.0 * t[2]);
    if !(v.is_finite() && v > 0.0 && d1.is_finite() && d2.is_finite()) {
        return None;
    }
    let k1 = s * d1 / v;
    let k2 = k1 + s * s * d2 / v - k1 * k1;
    Some((v.ln(), sign * k1, k2))
}

/// Upper end of the exponential-moment window of `G` on `s > 1`, as `log r - 1e-6`.
fn window_upper(g: &RationalPgf) -> Result<f64> {
    let good = |x: f64| match cumulants(g, x, 1.0) {
        Some((_, k1, k2)) => x < 1e-4 || (k1 > 0.0 && k2 >= 0.0),
        None => false,
    };
    let mut prev = 0.0;
    let mut x = X_LO;
    while x < X_CAP {
        if !good(x) {
            if prev == 0.0 {
                return Err(Error::EmptyWindow);
            }
            let r = bisect_last_true(good, prev, x, 1e-12);
            let hi = r - RADIUS_BACKOFF;
            if hi <= X_LO {
                return Err(Error::EmptyWindow);
            }
            return Ok(hi);
        }
        prev = x;
        x *= GRID_RATIO;
    }
    Ok(X_CAP)
}

/// Saddlepoint approximation of `P[Y >= level]` where `κ` is the cumulant
/// generating function of the lattice variable `Y` on `(X_LO, x_hi)`.
fn upper_tail<K>(cgf: K, level: f64, x_hi: f64) -> Result<f64>
where
    K: Fn(f64) -> Option<(f64, f64, f64)>,
{
    let objective = |x: f64| cgf(x).map_or(f64::INFINITY, |(k, _, _)| k - x * level);
    match cgf(x_hi) {
        Some((_, k1, _)) if k1 > level => {}
        _ => {
            return Err(Error::OptimizerFailure(format!(
                "no interior minimum of κ(x) - {level}·x below x = {x_hi}"
            )))
        }
    }
    let (theta, _) = golden_section(objective, X_LO, x_hi, 1e-10);
    let (k, _, k2) = cgf(theta).ok_or_else(|| Error::OptimizerFailure("cgf lost at θ".into()))?;
    let sigma = k2.max(0.0).sqrt();
    if sigma == 0.0 {
        return Err(Error::OptimizerFailure("degenerate curvature at θ".into()));
    }
    let prefactor = b0(theta * sigma) / (sigma * (1.0 - (-theta).exp()));
    Ok(prefactor * (k - theta * level).exp())
}

/// Support bounds `(min, max)` of a PGF; `max` is `None` for infinite support.
fn support(g: &RationalPgf) -> Result<(i64, Option<i64>)> {
    let pmf = g.pmf(64)?;
    let min = pmf.iter().position(|&p| p > 1e-13).unwrap_or(0) as i64;
    let max = g.is_polynomial().then(|| g.numerator().degree() as i64);
    Ok((min, max))
}

/// Approximates `P[X >= d]` by the lattice saddlepoint formula
/// `B0(θσ) / (σ(1 - e^{-θ})) · exp(κ(θ) - θd)`.
///
/// Below the mean the complement `1 - P[-X >= 1 - d]` is used.
pub fn saddlepoint_ccdf(g: &RationalPgf, d: i64) -> Result<f64> {
    let (min, max) = support(g)?;
    if d <= min {
        return Ok(1.0);
    }
    if let Some(max) = max {
        if d > max {
            return Ok(0.0);
        }
        if d == max {
            return Ok(g.numerator().coeff(max as usize).clamp(0.0, 1.0));
        }
    }
    let mean = pgf_mean(g)?;
    if d as f64 >= mean {
        let x_hi = window_upper(g)?;
        let p = upper_tail(|x| cumulants(g, x, 1.0), d as f64, x_hi)?;
        return Ok(p.clamp(0.0, 1.0));
    }
    if d == min + 1 {
        let p_min = g.pmf(min as usize + 1)?[min as usize];
        return Ok((1.0 - p_min).clamp(0.0, 1.0));
    }
    let below = upper_tail(|x| cumulants(g, x, -1.0), (1 - d) as f64, X_CAP)?;
    Ok((1.0 - below).clamp(0.0, 1.0))
}

/// `P[X > k]` for `k = 0..=k_max` by [`saddlepoint_ccdf`].
pub fn saddlepoint_curve(g: &RationalPgf, k_max: usize) -> Result<TailCurve> {
    let values = (0..=k_max as i64).map(|k| saddlepoint_ccdf(g, k + 1)).collect::<Result<Vec<_>>>()?;
    Ok(TailCurve::new(0, values, TailMethod::Saddlepoint))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b0_at_zero_and_continuity() {
        assert_eq!(b0(0.0), 0.0);
        let below = b0(25.0 - 1e-9);
        let above = b0(25.0 + 1e-9);
        assert!((below - above).abs() < 1e-9 * below);
    }

    /// The same approximation written out for `P[X = j] = (1-q) q^{j-1}`.
    fn geometric_closed_form(q: f64, d: f64) -> f64 {
        // κ(x) = log((1-q)e^x / (1 - q e^x)); κ'(θ) = d gives q e^θ = 1 - 1/d
        let u = 1.0 - 1.0 / d;
        let theta = (u / q).ln();
        let kappa = ((1.0 - q) * theta.exp() / (1.0 - u)).ln();
        let var = u / (1.0 - u).powi(2);
        let sigma = var.sqrt();
        b0(theta * sigma) / (sigma * (1.0 - (-theta).exp())) * (kappa - theta * d).exp()
    }

    #[test]
    fn geometric_matches_closed_form() {
        let g = RationalPgf::geometric(0.5).unwrap();
        for d in [3, 5, 10, 20, 40] {
            let sp = saddlepoint_ccdf(&g, d).unwrap();
            let cf = geometric_closed_form(0.5, d as f64);
            assert!((sp - cf).abs() < 1e-7 * cf, "d={d}: {sp} vs {cf}");
        }
    }

    #[test]
    fn geometric_d20_overestimates_exact_tail() {
        let g = RationalPgf::geometric(0.5).unwrap();
        let sp = saddlepoint_ccdf(&g, 20).unwrap();
        let exact = 0.5f64.powi(19);
        let rel = sp / exact - 1.0;
        assert!(rel > 0.13 && rel < 0.15, "relative error {rel}");
    }

    #[test]
    fn finite_support_edges() {
        let g = RationalPgf::from_pmf(&[0.0, 0.2, 0.5, 0.3]).unwrap();
        assert_eq!(saddlepoint_ccdf(&g, 1).unwrap(), 1.0);
        assert!((saddlepoint_ccdf(&g, 3).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(saddlepoint_ccdf(&g, 4).unwrap(), 0.0);
        assert!((saddlepoint_ccdf(&g, 2).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn complement_branch_is_used_below_mean() {
        let g = RationalPgf::geometric(0.8).unwrap();
        let exact = 0.8f64.powi(2);
        let sp = saddlepoint_ccdf(&g, 3).unwrap();
        assert!(sp < 1.0 && (sp - exact).abs() < 0.2, "{sp} vs {exact}");
    }
}
