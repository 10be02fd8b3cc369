//! Structured rational expressions evaluated by truncated Taylor arithmetic.
//!
//! Every [`Rational`](super::Rational) carries the expression tree it was
//! built from alongside its expanded coefficients.

use std::sync::Arc;

use super::Polynomial;

/// Relative size below which a leading Taylor coefficient counts as zero.
const ZERO_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Singular;

#[derive(Debug)]
pub(crate) enum Expr {
    Leaf {
        num: Polynomial,
        den: Polynomial,
    },
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Scale(f64, Arc<Expr>),
    Pow(Arc<Expr>, u32),
    /// `f(s^m)`
    SubstitutePower(Arc<Expr>, usize),
    /// `p(f(s))` for a polynomial `p`
    ComposePolynomial(Polynomial, Arc<Expr>),
}

/// Taylor coefficients in `h = s - s0`; every stored coefficient is exact
/// up to rounding, so the length is the number of trustworthy terms.
pub(crate) type Series = Vec<f64>;

fn abs_sum(a: &[f64]) -> f64 {
    a.iter().map(|c| c.abs()).sum()
}

fn is_negligible(a: &[f64]) -> bool {
    match a.first() {
        None => true,
        Some(&c0) => c0 == 0.0 || c0.abs() <= ZERO_REL * abs_sum(a),
    }
}

pub(crate) fn mul(a: &[f64], b: &[f64]) -> Series {
    let len = a.len().min(b.len());
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().take(len).enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().take(len - i).enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Series quotient; common vanishing leading terms are cancelled first.
pub(crate) fn div(a: &[f64], b: &[f64]) -> Result<Series, Singular> {
    let mut a = a;
    let mut b = b;
    while is_negligible(b) {
        if b.iter().all(|&c| c == 0.0) || b.len() <= 1 {
            return Err(Singular);
        }
        if !is_negligible(a) {
            return Err(Singular);
        }
        if a.iter().all(|&c| c == 0.0) {
            return Ok(vec![0.0; a.len().min(b.len()) - 1]);
        }
        a = &a[1..];
        b = &b[1..];
    }
    let len = a.len().min(b.len());
    let b0 = b[0];
    let mut q = vec![0.0; len];
    for k in 0..len {
        let mut v = a[k];
        for j in 1..=k.min(b.len() - 1) {
            v -= b[j] * q[k - j];
        }
        q[k] = v / b0;
    }
    Ok(q)
}

fn powi(a: &[f64], mut n: u32) -> Series {
    let mut acc = vec![0.0; a.len()];
    if let Some(first) = acc.first_mut() {
        *first = 1.0;
    }
    let mut base = a.to_vec();
    while n > 0 {
        if n & 1 == 1 {
            acc = mul(&acc, &base);
        }
        n >>= 1;
        if n > 0 {
            base = mul(&base, &base);
        }
    }
    acc
}

/// Given the series of `f` around `s0^m`, returns the series of `f(s^m)` around `s0`.
fn compose_power(f: &[f64], s0: f64, m: usize, len: usize) -> Series {
    if m == 1 {
        return f[..f.len().min(len)].to_vec();
    }
    if s0 == 0.0 {
        let valid = len.min(f.len().saturating_mul(m));
        let mut out = vec![0.0; valid];
        for (j, &c) in f.iter().enumerate() {
            if j * m >= valid {
                break;
            }
            out[j * m] = c;
        }
        return out;
    }
    let valid = len.min(f.len());
    // (s0 + h)^m - s0^m
    let mut delta = vec![0.0; valid];
    let mut c = s0.powi(m as i32);
    for (j, slot) in delta.iter_mut().enumerate().skip(1) {
        c *= (m as f64 + 1.0 - j as f64) / (j as f64 * s0);
        *slot = c;
    }
    let mut acc = vec![0.0; valid];
    for &fj in f[..valid].iter().rev() {
        acc = mul(&acc, &delta);
        acc[0] += fj;
    }
    acc
}

impl Expr {
    pub(crate) fn leaf(num: Polynomial, den: Polynomial) -> Arc<Self> {
        Arc::new(Expr::Leaf { num, den })
    }

    pub(crate) fn series(&self, s0: f64, len: usize) -> Result<Series, Singular> {
        let out = match self {
            Expr::Leaf { num, den } => {
                if den.degree() == 0 && den.coeff(0) == 1.0 {
                    num.taylor(s0, len)
                } else {
                    div(&num.taylor(s0, len), &den.taylor(s0, len))?
                }
            }
            Expr::Add(a, b) => {
                let (x, y) = (a.series(s0, len)?, b.series(s0, len)?);
                x.iter().zip(&y).map(|(p, q)| p + q).collect()
            }
            Expr::Sub(a, b) => {
                let (x, y) = (a.series(s0, len)?, b.series(s0, len)?);
                x.iter().zip(&y).map(|(p, q)| p - q).collect()
            }
            Expr::Mul(a, b) => mul(&a.series(s0, len)?, &b.series(s0, len)?),
            Expr::Div(a, b) => div(&a.series(s0, len + 2)?, &b.series(s0, len + 2)?)?,
            Expr::Scale(c, a) => a.series(s0, len)?.iter().map(|x| c * x).collect(),
            Expr::Pow(a, n) => powi(&a.series(s0, len)?, *n),
            Expr::SubstitutePower(a, m) => {
                let inner_len = if s0 == 0.0 { len.div_ceil(*m) } else { len };
                let f = a.series(s0.powi(*m as i32), inner_len)?;
                compose_power(&f, s0, *m, len)
            }
            Expr::ComposePolynomial(p, a) => {
                let f = a.series(s0, len)?;
                let mut acc = vec![0.0; f.len()];
                for &c in p.coeffs().iter().rev() {
                    acc = mul(&acc, &f);
                    if let Some(first) = acc.first_mut() {
                        *first += c;
                    }
                }
                acc
            }
        };
        let mut out = out;
        out.truncate(len);
        Ok(out)
    }
}
