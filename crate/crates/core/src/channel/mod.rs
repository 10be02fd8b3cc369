//! Binary-input AWGN channel: information densities, the RCUs bound and
//! service-time models.

pub(crate) mod rcus;
mod service;

pub use rcus::{rcus_at, rcus_epsilon, rcus_optimize, RcusResult, DEFAULT_ALPHAS};
pub use service::{arq_service_model, ServiceKind, ServiceModel, ServiceSampler};

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check, Result};

/// Binary-input AWGN channel with inputs `±√ρ` and unit noise, used in
/// frames of `n` channel uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub rho: f64,
    pub n: usize,
}

impl ChannelSpec {
    pub fn new(rho: f64, n: usize) -> Result<Self> {
        check(rho >= 0.0 && rho.is_finite(), || format!("SNR {rho} must be finite and >= 0"))?;
        check(n >= 1, || "frame size must be at least 1".into())?;
        Ok(Self { rho, n })
    }

    pub fn from_snr_db(snr_db: f64, n: usize) -> Result<Self> {
        Self::new(db_to_linear(snr_db), n)
    }

    pub fn amplitude(&self) -> f64 {
        self.rho.sqrt()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `ln(1 + e^t)`
#[inline]
pub fn softplus(t: f64) -> f64 {
    let e = (-t.abs()).exp();
    let tail = if e < 1e-4 { e.ln_1p() } else { (1.0 + e).ln() };
    t.max(0.0) + tail
}

/// `log[ P(y|x)^α / E_X̄ P(y|X̄)^α ]` for one channel use with inputs `±amplitude`.
pub fn symbol_log_ratio(alpha: f64, x: f64, y: f64, amplitude: f64) -> f64 {
    let own = -0.5 * alpha * (y - x) * (y - x);
    let plus = -0.5 * alpha * (y - amplitude) * (y - amplitude);
    let minus = -0.5 * alpha * (y + amplitude) * (y + amplitude);
    let (hi, lo) = if plus >= minus { (plus, minus) } else { (minus, plus) };
    let spread = if lo == hi { LN_2 } else { (lo - hi).exp().ln_1p() };
    (own - hi) - (spread - LN_2)
}

/// One channel use: equiprobable input and its noisy output.
pub fn draw_symbol<R: Rng + ?Sized>(rng: &mut R, amplitude: f64) -> (f64, f64) {
    let x = if rng.random::<bool>() { amplitude } else { -amplitude };
    let z: f64 = rng.sample(StandardNormal);
    (x, x + z)
}

/// Information density `Σ log P(Y_k|X_k)/P_Y(Y_k)` over `n·t_frames` channel uses.
pub fn sample_info_density<R: Rng + ?Sized>(spec: &ChannelSpec, t_frames: usize, rng: &mut R) -> f64 {
    let a = spec.amplitude();
    (0..spec.n * t_frames)
        .map(|_| {
            let (x, y) = draw_symbol(rng, a);
            symbol_log_ratio(1.0, x, y, a)
        })
        .sum()
}

/// Generalized information density with parameter `alpha` over one frame.
pub fn sample_generalized_info_density<R: Rng + ?Sized>(spec: &ChannelSpec, alpha: f64, rng: &mut R) -> f64 {
    let a = spec.amplitude();
    (0..spec.n)
        .map(|_| {
            let (x, y) = draw_symbol(rng, a);
            symbol_log_ratio(alpha, x, y, a)
        })
        .sum()
}
