//! Steady-state delay of the bulk-arrival queue served by ARQ/VLSF frames.

mod snc;
mod throughput;

pub use snc::snc_delay_bound;
pub use throughput::{max_arrival_rate, max_arrival_rate_with, RateBound, RateResult};

use serde::Serialize;

use crate::channel::ServiceModel;
use crate::error::{check, Error, Result};
use crate::pgf::{
    exact_ccdf, pgf_mean, saddlepoint_ccdf, Polynomial, Rational, RationalPgf, TailCurve, TailMethod,
};

/// Default cap on the degree of the frame-asynchronous delay PGF.
pub const DEFAULT_DEGREE_CAP: usize = 100_000;

/// Arrival process: each of the `n` channel uses of a frame carries a new
/// packet independently with probability `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueConfig {
    pub n: usize,
    pub lambda: f64,
}

impl QueueConfig {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        check(n >= 1, || "frame size must be at least 1".into())?;
        check(lambda > 0.0 && lambda <= 1.0, || format!("arrival probability {lambda} must lie in (0, 1]"))?;
        Ok(Self { n, lambda })
    }

    /// `(1 - λ)^n`, the probability that a frame brings no packet.
    pub fn empty_frame_prob(&self) -> f64 {
        (1.0 - self.lambda).powi(self.n as i32)
    }

    /// `λ n E[τ]`
    pub fn intensity(&self, service: &ServiceModel) -> f64 {
        self.lambda * self.n as f64 * service.mean()
    }

    pub fn check_stable(&self, service: &ServiceModel) -> Result<()> {
        let intensity = self.intensity(service);
        if intensity < 1.0 {
            Ok(())
        } else {
            Err(Error::Unstable { intensity })
        }
    }

    /// `⌈d0/n⌉`
    pub fn frames_for(&self, d0: u64) -> i64 {
        d0.div_ceil(self.n as u64) as i64
    }
}

fn reject_saturated(q: &QueueConfig) -> Result<()> {
    check(q.lambda < 1.0, || "arrival probability 1 has no steady-state delay".into())
}

/// `(1 - G(s)) / (1 - s)` as a rational function over the denominator of `G`.
fn tail_function(g: &RationalPgf) -> Result<Rational> {
    let c = g.denominator() - g.numerator();
    let mut acc = 0.0;
    let mut out: Vec<f64> = c
        .coeffs()
        .iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect();
    // the last partial sum is the remainder at s = 1
    out.pop();
    Rational::new(Polynomial::new(out), g.denominator().clone())
}

/// `Σ_{j<n} (a + b y)^j c^{n-1-j}` as a polynomial in `y`.
fn geometric_power_sum(a: f64, b: f64, c: f64, n: usize) -> Polynomial {
    let base = Polynomial::linear(a, b);
    let mut acc = Polynomial::constant(1.0);
    let mut pow = Polynomial::constant(1.0);
    for _ in 1..n {
        pow = &pow * &base;
        acc = &acc.scale(c) + &pow;
    }
    acc
}

/// `1 - (1-λ)^n` without cancellation.
fn nonempty_frame_prob(q: &QueueConfig) -> f64 {
    -(q.n as f64 * (-q.lambda).ln_1p()).exp_m1()
}

/// PGF of the steady-state delay in frames of the frame-synchronous queue:
/// `(1-ρ)(1-s)(q - P(s)) / ((1-q)(s - P(s)))` with `q = (1-λ)^n`,
/// `P(s) = (1 - λ + λG_τ(s))^n` and `ρ = λnE[τ]`.
///
/// Built in the equivalent form `(1-ρ)λ G R(G) / ((1-q)(1 - λ T S(G)))` with
/// `T = (1-G)/(1-s)`, `R(y) = Σ_{j<n} (1-λ+λy)^j (1-λ)^{n-1-j}` and
/// `S(y) = Σ_{j<n} (1-λ+λy)^j`, which has no removable singularity at `s = 1`.
pub fn delay_pgf_sync(service: &ServiceModel, q: &QueueConfig) -> Result<RationalPgf> {
    reject_saturated(q)?;
    q.check_stable(service)?;
    let rho = q.intensity(service);
    let a = 1.0 - q.lambda;
    let g = service.pgf();
    let g = g.rational();
    let r = g.compose(&geometric_power_sum(a, q.lambda, a, q.n))?;
    let s = g.compose(&geometric_power_sum(a, q.lambda, 1.0, q.n))?;
    let num = g.mul(&r)?.scale((1.0 - rho) * q.lambda / nonempty_frame_prob(q))?;
    let den = Rational::constant(1.0).sub(&tail_function(&service.pgf())?.mul(&s)?.scale(q.lambda)?)?;
    RationalPgf::new(num.div_common_denominator(&den)?)
}

/// PGF of the steady-state delay in channel uses of the frame-asynchronous
/// queue: `(1-ρ)(s-1)G_τ(s^n) / (s - 1 + λ(1 - G_τ(s^n)))`.
///
/// Built as `(1-ρ) G_τ(s^n) / (1 - λ U(s) T(s^n))` with `T = (1-G_τ)/(1-s)`
/// and `U(s) = Σ_{j<n} s^j`.
pub fn delay_pgf_async(service: &ServiceModel, q: &QueueConfig, degree_cap: usize) -> Result<RationalPgf> {
    reject_saturated(q)?;
    q.check_stable(service)?;
    let g = service.pgf();
    let degree = g.rational().degree() * q.n + 1;
    if degree > degree_cap {
        return Err(Error::DegreeOverflow { degree, cap: degree_cap });
    }
    let rho = q.intensity(service);
    let num = g.rational().substitute_power(q.n)?.scale(1.0 - rho)?;
    let u = Rational::polynomial(Polynomial::new(vec![1.0; q.n]));
    let t = tail_function(&g)?.substitute_power(q.n)?;
    let den = Rational::constant(1.0).sub(&u.mul(&t)?.scale(q.lambda)?)?;
    RationalPgf::new(num.div_common_denominator(&den)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayMethod {
    Exact,
    Saddlepoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct DelayAnalysis {
    #[serde(skip)]
    pub delay_pgf: RationalPgf,
    pub mean: f64,
    /// `P[Δ > k]` for `k = 0..threshold` (exact) or at `k = threshold - 1` (saddlepoint).
    pub ccdf: TailCurve,
    /// Threshold `d` on the delay grid.
    pub threshold: i64,
    /// `P[Δ >= d]`
    pub delay_tail: f64,
    pub p_dv: f64,
    pub method: TailMethod,
}

/// `P[X >= d]` by the chosen method together with the supporting tail curve.
pub fn tail_at(pgf: &RationalPgf, d: i64, method: DelayMethod) -> Result<(TailCurve, f64)> {
    match method {
        DelayMethod::Exact => {
            let curve = exact_ccdf(pgf, d.max(1) as usize)?;
            let v = curve.at_least(d);
            Ok((curve, v))
        }
        DelayMethod::Saddlepoint => {
            let v = saddlepoint_ccdf(pgf, d)?;
            Ok((TailCurve::new(d - 1, vec![v], TailMethod::Saddlepoint), v))
        }
    }
}

fn analyse(pgf: &RationalPgf, d: i64, eps_undetected: f64, method: DelayMethod) -> Result<DelayAnalysis> {
    check((0.0..=1.0).contains(&eps_undetected), || {
        format!("undetected error probability {eps_undetected} must lie in [0, 1]")
    })?;
    let (ccdf, delay_tail) = tail_at(pgf, d, method)?;
    Ok(DelayAnalysis {
        delay_pgf: pgf.clone(),
        mean: pgf_mean(pgf)?,
        method: ccdf.method,
        ccdf,
        threshold: d,
        delay_tail,
        p_dv: (delay_tail + eps_undetected).clamp(0.0, 1.0),
    })
}

/// `P_dv(d0) = P[Δ >= ⌈d0/n⌉] + ε_u`, clipped to `[0, 1]`, for a delay PGF in frames.
pub fn delay_violation(
    pgf: &RationalPgf,
    d0: u64,
    q: &QueueConfig,
    eps_undetected: f64,
    method: DelayMethod,
) -> Result<DelayAnalysis> {
    check(d0 >= 1, || "delay threshold must be at least 1".into())?;
    analyse(pgf, q.frames_for(d0), eps_undetected, method)
}

/// `P[Δ >= d0] + ε_u`, clipped to `[0, 1]`, for a delay PGF in channel uses.
pub fn delay_violation_channel_uses(
    pgf: &RationalPgf,
    d0: u64,
    eps_undetected: f64,
    method: DelayMethod,
) -> Result<DelayAnalysis> {
    check(d0 >= 1, || "delay threshold must be at least 1".into())?;
    analyse(pgf, d0 as i64, eps_undetected, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::arq_service_model;
    use crate::pgf::{eval, invert_ccdf};

    /// Power series of the delay PGF by plain long division of the expanded form.
    fn long_division(g: &RationalPgf, len: usize) -> Vec<f64> {
        let num = g.numerator().coeffs();
        let den = g.denominator().coeffs();
        let mut q = vec![0.0; len];
        for k in 0..len {
            let mut v = num.get(k).copied().unwrap_or(0.0);
            for j in 1..=k.min(den.len() - 1) {
                v -= den[j] * q[k - j];
            }
            q[k] = v / den[0];
        }
        q
    }

    #[test]
    fn unstable_rejected() {
        let s = arq_service_model(0.5).unwrap();
        let q = QueueConfig::new(10, 0.2).unwrap();
        assert!(matches!(delay_pgf_sync(&s, &q), Err(Error::Unstable { .. })));
        assert!(matches!(delay_pgf_async(&s, &q, DEFAULT_DEGREE_CAP), Err(Error::Unstable { .. })));
    }

    #[test]
    fn sync_small_config_matches_long_division() {
        let s = arq_service_model(0.5).unwrap();
        let q = QueueConfig::new(10, 0.01).unwrap();
        let g = delay_pgf_sync(&s, &q).unwrap();
        let series = long_division(&g, 200);
        let direct: f64 = series.iter().enumerate().map(|(k, c)| c * 0.9f64.powi(k as i32)).sum();
        assert!((eval(&g, 0.9).unwrap() - direct).abs() < 1e-10);
        let tail = invert_ccdf(&g, 50).unwrap();
        let mut cum = 0.0;
        for k in 0..=50 {
            cum += series[k];
            assert!((tail.values[k] - (1.0 - cum).max(0.0)).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn light_traffic_reduces_to_service_time() {
        let s = arq_service_model(0.5).unwrap();
        let q = QueueConfig::new(10, 1e-9).unwrap();
        let t = invert_ccdf(&delay_pgf_sync(&s, &q).unwrap(), 40).unwrap();
        for (k, v) in t.values.iter().enumerate() {
            assert!((v - 0.5f64.powi(k as i32)).abs() < 1e-6);
        }
    }

    #[test]
    fn async_light_traffic_deterministic() {
        let s = ServiceModel::deterministic(1).unwrap();
        let q = QueueConfig::new(5, 1e-9).unwrap();
        let t = invert_ccdf(&delay_pgf_async(&s, &q, DEFAULT_DEGREE_CAP).unwrap(), 20).unwrap();
        for (k, v) in t.values.iter().enumerate() {
            let want = if k < 5 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-8, "k={k}: {v}");
        }
        // first-order term of the tail just past one frame
        assert!((t.values[5] - 4e-9).abs() < 1e-15);
    }

    #[test]
    fn async_degree_cap() {
        let s = ServiceModel::empirical(vec![0.5, 0.5], 0.0).unwrap();
        let q = QueueConfig::new(100, 1e-4).unwrap();
        let r = delay_pgf_async(&s, &q, 150);
        assert!(matches!(r, Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn normalization_and_finite_mean() {
        let s = arq_service_model(0.3).unwrap();
        let q = QueueConfig::new(20, 0.01).unwrap();
        for g in [delay_pgf_sync(&s, &q).unwrap(), delay_pgf_async(&s, &q, DEFAULT_DEGREE_CAP).unwrap()] {
            assert!((eval(&g, 1.0).unwrap() - 1.0).abs() < 1e-9);
            let m = pgf_mean(&g).unwrap();
            let h = 1e-6;
            let fd = (eval(&g, 1.0 + h).unwrap() - eval(&g, 1.0 - h).unwrap()) / (2.0 * h);
            assert!((m - fd).abs() < 1e-5 * m, "{m} vs {fd}");
        }
    }

    #[test]
    fn clipping_and_negligible_tails() {
        let s = arq_service_model(0.1).unwrap();
        let q = QueueConfig::new(10, 0.01).unwrap();
        let g = delay_pgf_sync(&s, &q).unwrap();
        let far = delay_violation(&g, 10_000, &q, 0.0, DelayMethod::Exact).unwrap();
        assert!(far.p_dv < 1e-15);
        let near = delay_violation(&g, 1, &q, 0.3, DelayMethod::Exact).unwrap();
        assert_eq!(near.delay_tail, 1.0);
        assert_eq!(near.p_dv, 1.0);
    }
}
