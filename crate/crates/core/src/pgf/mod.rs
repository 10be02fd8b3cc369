//! Probability generating functions: rational algebra, tail inversion, means
//! and saddlepoint tail approximations.

mod expr;
mod polynomial;
mod rational;
mod saddlepoint;
mod tail;

pub use polynomial::Polynomial;
pub use rational::Rational;
pub use saddlepoint::{b0, saddlepoint_ccdf, saddlepoint_curve};
pub use tail::{TailCurve, TailMethod};

use crate::error::{Error, Result};

/// Tolerance on `G(1) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Recursion results outside `[-INVERSION_GUARD, 1 + INVERSION_GUARD]` abort.
pub const INVERSION_GUARD: f64 = 1e-6;
/// Largest acceptable rounding-error estimate for the coefficient recursion.
pub const RECURSION_ERROR_LIMIT: f64 = 1e-10;

/// A rational probability generating function `G(s) = E[s^X]` of a
/// non-negative integer random variable.
#[derive(Clone, Debug)]
pub struct RationalPgf {
    inner: Rational,
}

impl RationalPgf {
    /// Validates normalization and `denominator(0) != 0`; rescales so that
    /// the denominator's constant term is 1.
    pub fn new(r: Rational) -> Result<Self> {
        let b0 = r.denominator().coeff(0);
        if b0 == 0.0 {
            return Err(Error::ZeroConstantDenominator);
        }
        let value = r.eval(1.0)?;
        if !((value - 1.0).abs() < NORMALIZATION_TOL) {
            return Err(Error::NotNormalized { value });
        }
        let num = r.numerator().scale(1.0 / b0);
        let den = r.denominator().scale(1.0 / b0);
        let expanded = Rational::new(num, den)?;
        Ok(Self { inner: rebuild(expanded, &r) })
    }

    /// Expanded coefficients `num / den` paired with a structured form of the
    /// same function used for evaluation.
    pub fn from_parts(num: Polynomial, den: Polynomial, structured: &Rational) -> Result<Self> {
        let expanded = Rational::new(num, den)?;
        Self::new(rebuild(expanded, structured))
    }

    pub fn from_polynomials(num: Polynomial, den: Polynomial) -> Result<Self> {
        Self::new(Rational::new(num, den)?)
    }

    /// Finite support, `coeffs[k] = P[X = k]`.
    pub fn from_pmf(pmf: &[f64]) -> Result<Self> {
        Self::new(Rational::polynomial(Polynomial::new(pmf.to_vec())))
    }

    /// `X ≡ k`
    pub fn deterministic(k: usize) -> Self {
        Self::new(Rational::polynomial(Polynomial::monomial(1.0, k))).expect("point mass")
    }

    /// `P[X = j] = (1 - q) q^(j-1)` for `j >= 1`.
    pub fn geometric(q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!("geometric parameter {q} not in [0, 1)")));
        }
        Self::from_polynomials(Polynomial::monomial(1.0 - q, 1), Polynomial::linear(1.0, -q))
    }

    pub fn rational(&self) -> &Rational {
        &self.inner
    }

    pub fn numerator(&self) -> &Polynomial {
        self.inner.numerator()
    }

    pub fn denominator(&self) -> &Polynomial {
        self.inner.denominator()
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator().degree() == 0
    }

    /// `G(s)`: the expanded ratio where it is well conditioned, otherwise
    /// the structured form.
    pub fn eval(&self, s: f64) -> Result<f64> {
        let (num, den) = (self.numerator(), self.denominator());
        let (nv, dv) = (num.eval(s), den.eval(s));
        let spread = |p: &Polynomial, v: f64| {
            p.coeffs().iter().rev().fold(0.0, |acc, c| acc * s.abs() + c.abs()) / v.abs()
        };
        if dv != 0.0 && nv.is_finite() && dv.is_finite() {
            let cond = spread(num, nv) + spread(den, dv);
            if cond * f64::EPSILON < 1e-13 {
                return Ok(nv / dv);
            }
        }
        self.inner.eval(s)
    }

    /// `P[X = k]` for `k < len`, from the structured power series.
    pub fn pmf(&self, len: usize) -> Result<Vec<f64>> {
        self.inner.power_series(len)
    }
}

/// Keeps the expression tree of `structured` with the rescaled expansion.
fn rebuild(expanded: Rational, structured: &Rational) -> Rational {
    rational::with_expr(expanded, structured)
}

/// `G(s)`.
pub fn eval(g: &RationalPgf, s: f64) -> Result<f64> {
    g.eval(s)
}

/// `E[X] = G'(1)`, by the quotient rule with cancellation of common
/// vanishing factors at `s = 1`.
pub fn pgf_mean(g: &RationalPgf) -> Result<f64> {
    let t = g.rational().taylor(1.0, 4).map_err(|_| Error::InfiniteMean)?;
    match t.get(1) {
        Some(&m) if m.is_finite() => Ok(m),
        _ => Err(Error::InfiniteMean),
    }
}

/// `(a + b G(s))^n`
pub fn compose_affine_power(g: &RationalPgf, a: f64, b: f64, n: u32) -> Result<RationalPgf> {
    if n == 0 {
        return Err(Error::InvalidParameter("power must be at least 1".into()));
    }
    let inner = g.rational().scale(b)?.add_constant(a)?;
    RationalPgf::new(inner.powi(n)?)
}

/// `(1 - G(s)) / (1 - s)` split into the normalized recursion inputs `(a, b)`.
fn recursion_inputs(g: &RationalPgf) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = g.rational().cancel_unit_root();
    let num = r.numerator();
    let den = r.denominator();
    let b0 = den.coeff(0);
    if b0 == 0.0 {
        return Err(Error::ZeroConstantDenominator);
    }
    let c = den - num;
    let mut a = Vec::with_capacity(c.coeffs().len());
    let mut acc = 0.0;
    for &ck in c.coeffs() {
        acc += ck;
        a.push(acc / b0);
    }
    // the final partial sum is the remainder c(1) = 0
    a.pop();
    let b = den.coeffs().iter().map(|&x| x / b0).collect();
    Ok((a, b))
}

/// Forward rounding-error estimate of the tail recursion up to `k_max`:
/// `u · Σ|a| · Σ|b| · Σ_{k<=k_max} |[s^k] 1/B(s)|`.
pub fn recursion_error_bound(g: &RationalPgf, k_max: usize) -> Result<f64> {
    let (a, b) = recursion_inputs(g)?;
    let mut inv = Vec::with_capacity(k_max + 1);
    let mut total = 0.0;
    for k in 0..=k_max {
        let mut v = if k == 0 { 1.0 } else { 0.0 };
        for u in 1..=k.min(b.len().saturating_sub(1)) {
            v -= b[u] * inv[k - u];
        }
        total += f64::abs(v);
        inv.push(v);
    }
    let a_abs = a.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let b_abs: f64 = b.iter().map(|x| x.abs()).sum();
    Ok(f64::EPSILON * a_abs * b_abs * total)
}

/// `P[X > k]` for `k = 0..=k_max` by the coefficient recursion
/// `P[X>k] = a_k - Σ_{u=1..k} b_u P[X>k-u]` on `(1 - G(s)) / (1 - s)`.
pub fn invert_ccdf(g: &RationalPgf, k_max: usize) -> Result<TailCurve> {
    let (a, b) = recursion_inputs(g)?;
    let mut tails = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut v = a.get(k).copied().unwrap_or(0.0);
        for u in 1..=k.min(b.len().saturating_sub(1)) {
            v -= b[u] * tails[k - u];
        }
        if !(v >= -INVERSION_GUARD && v <= 1.0 + INVERSION_GUARD) {
            return Err(Error::UnstableInversion { k, value: v });
        }
        tails.push(v);
    }
    Ok(TailCurve::new(0, tails, TailMethod::ExactRecursion))
}

/// `P[X > k]` for `k = 0..=k_max` from the power series of `(1 - G(s)) / (1 - s)`
/// evaluated on the structured form.
pub fn series_ccdf(g: &RationalPgf, k_max: usize) -> Result<TailCurve> {
    let one_minus = Rational::constant(1.0).sub(g.rational())?;
    let tail = one_minus.div(&Rational::polynomial(Polynomial::linear(1.0, -1.0)))?;
    let values = tail.power_series(k_max + 1)?;
    for (k, &v) in values.iter().enumerate() {
        if !(v >= -INVERSION_GUARD && v <= 1.0 + INVERSION_GUARD) {
            return Err(Error::UnstableInversion { k, value: v });
        }
    }
    Ok(TailCurve::new(0, values, TailMethod::PowerSeries))
}

/// Exact tail: the coefficient recursion when its error estimate is below
/// [`RECURSION_ERROR_LIMIT`], otherwise the structured power series.
pub fn exact_ccdf(g: &RationalPgf, k_max: usize) -> Result<TailCurve> {
    if recursion_error_bound(g, k_max)? <= RECURSION_ERROR_LIMIT {
        if let Ok(t) = invert_ccdf(g, k_max) {
            return Ok(t);
        }
    }
    series_ccdf(g, k_max)
}
