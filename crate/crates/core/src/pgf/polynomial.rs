use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Dense real polynomial, `coeffs[k]` multiplies `s^k`.
///
/// Trailing zeros are trimmed; the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c * s^k`
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `a + b s`
    pub fn linear(a: f64, b: f64) -> Self {
        Self::new(vec![a, b])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// Taylor coefficients `p^(j)(s0) / j!` for `j < order`.
    pub fn taylor(&self, s0: f64, order: usize) -> Vec<f64> {
        let mut t = vec![0.0; order];
        if order == 0 {
            return t;
        }
        if s0 == 0.0 {
            for (j, slot) in t.iter_mut().enumerate() {
                *slot = self.coeff(j);
            }
            return t;
        }
        for &a in self.coeffs.iter().rev() {
            for j in (1..order).rev() {
                t[j] = t[j] * s0 + t[j - 1];
            }
            t[0] = t[0] * s0 + a;
        }
        t
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `p(s^m)`
    pub fn substitute_power(&self, m: usize) -> Self {
        if m == 1 || self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0.0; self.degree() * m + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k * m] = c;
        }
        Self::new(coeffs)
    }

    /// `s^m p(s)`
    pub fn shift_up(&self, m: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; m];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(coeffs)
    }

    /// `p(s) / s^m`, dropping the low coefficients.
    pub fn shift_down(&self, m: usize) -> Self {
        Self::new(self.coeffs.iter().skip(m).copied().collect())
    }

    /// Synthetic division by `(s - r)`: returns quotient and remainder `p(r)`.
    pub fn divide_linear(&self, r: f64) -> (Self, f64) {
        if self.coeffs.len() <= 1 {
            return (Self::zero(), self.coeff(0));
        }
        let d = self.degree();
        let mut q = vec![0.0; d];
        let mut carry = 0.0;
        for k in (0..=d).rev() {
            let v = self.coeffs[k] + carry * r;
            if k == 0 {
                return (Self::new(q), v);
            }
            q[k - 1] = v;
            carry = v;
        }
        unreachable!()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*s")?,
                _ => write!(f, "{c}*s^{k}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}
