use std::sync::Arc;

use super::expr::{Expr, Singular};
use super::Polynomial;
use crate::error::{Error, Result};

const OVERFLOW: f64 = 1e300;

/// Ratio of two real polynomials.
///
/// Holds the expanded numerator and denominator together with the expression
/// tree used for pointwise evaluation and local Taylor expansions.
#[derive(Clone, Debug)]
pub struct Rational {
    num: Polynomial,
    den: Polynomial,
    expr: Arc<Expr>,
}

impl Rational {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        let expr = Expr::leaf(num.clone(), den.clone());
        Ok(Self { num, den, expr })
    }

    pub fn polynomial(p: Polynomial) -> Self {
        let den = Polynomial::constant(1.0);
        Self::new(p, den).expect("unit denominator")
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(Polynomial::constant(c))
    }

    /// The identity `s`.
    pub fn s() -> Self {
        Self::polynomial(Polynomial::monomial(1.0, 1))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    fn combine(num: Polynomial, den: Polynomial, expr: Expr) -> Result<Self> {
        let magnitude = num.max_abs_coeff().max(den.max_abs_coeff());
        if !(magnitude <= OVERFLOW) {
            return Err(Error::CoefficientOverflow { magnitude });
        }
        Ok(Self { num, den, expr: Arc::new(expr) })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        let (num, den) = if self.den == rhs.den {
            (&self.num + &rhs.num, self.den.clone())
        } else {
            (&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
        };
        Self::combine(num, den, Expr::Add(self.expr.clone(), rhs.expr.clone()))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        let (num, den) = if self.den == rhs.den {
            (&self.num - &rhs.num, self.den.clone())
        } else {
            (&(&self.num * &rhs.den) - &(&rhs.num * &self.den), &self.den * &rhs.den)
        };
        Self::combine(num, den, Expr::Sub(self.expr.clone(), rhs.expr.clone()))
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        Self::combine(
            &self.num * &rhs.num,
            &self.den * &rhs.den,
            Expr::Mul(self.expr.clone(), rhs.expr.clone()),
        )
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.num.is_zero() {
            return Err(Error::InvalidParameter("division by the zero function".into()));
        }
        Self::combine(
            &self.num * &rhs.den,
            &self.den * &rhs.num,
            Expr::Div(self.expr.clone(), rhs.expr.clone()),
        )
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::combine(self.num.scale(c), self.den.clone(), Expr::Scale(c, self.expr.clone()))
    }

    /// `c + self`
    pub fn add_constant(&self, c: f64) -> Result<Self> {
        Self::constant(c).add(self)
    }

    /// `self^n`, expanded by repeated squaring.
    pub fn powi(&self, n: u32) -> Result<Self> {
        Self::combine(self.num.pow(n), self.den.pow(n), Expr::Pow(self.expr.clone(), n))
    }

    /// `self(s^m)`
    pub fn substitute_power(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("substitution power must be positive".into()));
        }
        Self::combine(
            self.num.substitute_power(m),
            self.den.substitute_power(m),
            Expr::SubstitutePower(self.expr.clone(), m),
        )
    }

    /// `p(self(s))`, expanded over the common denominator `den^deg(p)`.
    pub fn compose(&self, p: &Polynomial) -> Result<Self> {
        let m = p.degree();
        let mut num = Polynomial::constant(p.coeff(m));
        let mut den_pow = Polynomial::constant(1.0);
        for i in (0..m).rev() {
            den_pow = &den_pow * &self.den;
            num = &(&num * &self.num) + &den_pow.scale(p.coeff(i));
        }
        Self::combine(num, den_pow, Expr::ComposePolynomial(p.clone(), self.expr.clone()))
    }

    /// `self / rhs` for operands over the same expanded denominator, which
    /// then cancels.
    pub(crate) fn div_common_denominator(&self, rhs: &Self) -> Result<Self> {
        if rhs.num.is_zero() {
            return Err(Error::InvalidParameter("division by the zero function".into()));
        }
        Self::combine(self.num.clone(), rhs.num.clone(), Expr::Div(self.expr.clone(), rhs.expr.clone()))
    }

    /// `self(s) / s`; the numerator must vanish at the origin.
    pub fn div_s(&self) -> Result<Self> {
        let tol = 1e-13 * self.num.abs_sum().max(f64::MIN_POSITIVE);
        if self.num.coeff(0).abs() > tol {
            return Err(Error::Pole { s: 0.0 });
        }
        Self::combine(
            self.num.shift_down(1),
            self.den.clone(),
            Expr::Div(self.expr.clone(), Rational::s().expr),
        )
    }

    /// Removes common factors `(s - 1)` from the expanded form.
    pub fn cancel_unit_root(&self) -> Self {
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        for _ in 0..4 {
            let nd = num.abs_sum();
            let dd = den.abs_sum();
            if num.is_zero() || den.degree() == 0 {
                break;
            }
            if num.eval(1.0).abs() > 1e-10 * nd || den.eval(1.0).abs() > 1e-10 * dd {
                break;
            }
            num = num.divide_linear(1.0).0;
            den = den.divide_linear(1.0).0;
        }
        Self { num, den, expr: self.expr.clone() }
    }

    /// Taylor coefficients around `s0`.
    pub fn taylor(&self, s0: f64, len: usize) -> Result<Vec<f64>> {
        self.expr.series(s0, len).map_err(|Singular| Error::Pole { s: s0 })
    }

    /// Value at `s`, with removable singularities resolved by cancellation.
    pub fn eval(&self, s: f64) -> Result<f64> {
        let t = self.taylor(s, 3)?;
        t.first().copied().ok_or(Error::Pole { s })
    }

    /// Leading power-series coefficients at the origin.
    pub fn power_series(&self, len: usize) -> Result<Vec<f64>> {
        let mut t = self.taylor(0.0, len)?;
        t.resize(len, 0.0);
        Ok(t)
    }

    /// Direct ratio of the expanded polynomials.
    pub fn eval_expanded(&self, s: f64) -> Result<f64> {
        let d = self.den.eval(s);
        if d.abs() < 1e-14 {
            return Err(Error::Pole { s });
        }
        Ok(self.num.eval(s) / d)
    }
}

pub(crate) fn with_expr(expanded: Rational, structured: &Rational) -> Rational {
    Rational { num: expanded.num, den: expanded.den, expr: structured.expr.clone() }
}
