//! Threshold decoding for variable-length stop-feedback codes: stopping-time
//! distribution, undetected-error bound and threshold optimization.

use rand::Rng;
use serde::Serialize;

use crate::channel::{draw_symbol, rcus::log_codebook, symbol_log_ratio, ChannelSpec, ServiceModel};
use crate::error::{check, Error, Result};
use crate::mc::{McEstimate, Z95};
use crate::queueing::{delay_pgf_sync, delay_violation, DelayMethod, QueueConfig};
use crate::rng::map_chunks;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VlsfBoundResult {
    /// Decoding threshold in nats.
    pub gamma: f64,
    pub ell_max: usize,
    pub k_bits: u32,
    /// `P[min(ℓ_max, τ̂) >= t]` for `t = 1..=ℓ_max`.
    pub tau_tail: Vec<McEstimate>,
    /// `P[τ̄ <= min(ℓ_max, τ̂)]` for one independent codeword.
    pub event_probability: McEstimate,
    /// `(2^k - 1) · P[τ̄ <= min(ℓ_max, τ̂)]`, clipped to 1.
    pub eps_undetected_bound: McEstimate,
    /// `P[τ̂ >= ℓ_max + 1]`
    pub eps_detected_term: McEstimate,
}

impl VlsfBoundResult {
    /// Undetected-error bound for `k` information bits before clipping.
    pub fn undetected_bound_unclipped(&self, k_bits: u32) -> f64 {
        let p = self.event_probability.value;
        if p == 0.0 {
            return 0.0;
        }
        (p.ln() + log_codebook(k_bits)).exp()
    }
}

/// `min(1, (2^k - 1)·p)` with the half-width scaled alike.
fn scale_by_codebook(e: &McEstimate, log_m: f64) -> McEstimate {
    let scale = |x: f64| if x == 0.0 { 0.0 } else { (x.ln() + log_m).exp() };
    McEstimate { value: scale(e.value).min(1.0), half_width: scale(e.half_width), ..*e }
}

fn proportion(count: u64, samples: u64, seed: u64) -> McEstimate {
    let p = count as f64 / samples as f64;
    McEstimate { value: p, half_width: Z95 * (p * (1.0 - p) / samples as f64).sqrt(), samples, seed }
}

#[derive(Clone, Default)]
struct Counts {
    /// `reach[t-1]` counts `τ̂ >= t`.
    reach: Vec<u64>,
    event: u64,
    detected: u64,
}

/// Simulates the true-codeword and one auxiliary-codeword information-density
/// walks once per sample and evaluates every threshold in `gammas` on them.
pub fn simulate_threshold_crossing_grid(
    spec: &ChannelSpec,
    k_bits: u32,
    gammas: &[f64],
    ell_max: usize,
    samples: u64,
    seed: u64,
) -> Result<Vec<VlsfBoundResult>> {
    check(k_bits >= 1, || "k must be at least 1".into())?;
    check(ell_max >= 1, || "ℓ_max must be at least 1".into())?;
    check(samples >= 1, || "at least one sample is required".into())?;
    check(!gammas.is_empty(), || "no thresholds".into())?;
    if let Some(&g) = gammas.iter().find(|&&g| !(g > 0.0 && g.is_finite())) {
        return Err(Error::InvalidParameter(format!("threshold {g} must be positive")));
    }
    let amp = spec.amplitude();
    let n = spec.n;
    let parts = map_chunks(seed, samples, |rng, count| {
        let mut counts = vec![Counts { reach: vec![0; ell_max], ..Counts::default() }; gammas.len()];
        let mut own = vec![0.0; ell_max];
        let mut aux_max = vec![0.0; ell_max];
        for _ in 0..count {
            let (mut s, mut sbar, mut best_bar) = (0.0, 0.0, f64::NEG_INFINITY);
            for t in 0..ell_max {
                for _ in 0..n {
                    let (x, y) = draw_symbol(rng, amp);
                    let xbar = if rng.random::<bool>() { amp } else { -amp };
                    s += symbol_log_ratio(1.0, x, y, amp);
                    sbar += symbol_log_ratio(1.0, xbar, y, amp);
                }
                own[t] = s;
                best_bar = best_bar.max(sbar);
                aux_max[t] = best_bar;
            }
            for (c, &g) in counts.iter_mut().zip(gammas) {
                let tau_hat = own.iter().position(|&v| v >= g).map_or(ell_max + 1, |t| t + 1);
                for r in c.reach.iter_mut().take(tau_hat.min(ell_max)) {
                    *r += 1;
                }
                if tau_hat > ell_max {
                    c.detected += 1;
                }
                let stop = tau_hat.min(ell_max);
                if aux_max[stop - 1] >= g {
                    c.event += 1;
                }
            }
        }
        counts
    });
    let log_m = log_codebook(k_bits);
    Ok(gammas
        .iter()
        .enumerate()
        .map(|(j, &gamma)| {
            let mut reach = vec![0u64; ell_max];
            let (mut event, mut detected) = (0, 0);
            for p in &parts {
                for (r, x) in reach.iter_mut().zip(&p[j].reach) {
                    *r += x;
                }
                event += p[j].event;
                detected += p[j].detected;
            }
            let event_probability = proportion(event, samples, seed);
            VlsfBoundResult {
                gamma,
                ell_max,
                k_bits,
                tau_tail: reach.iter().map(|&r| proportion(r, samples, seed)).collect(),
                event_probability,
                eps_undetected_bound: scale_by_codebook(&event_probability, log_m),
                eps_detected_term: proportion(detected, samples, seed),
            }
        })
        .collect())
}

/// Stopping-time tail and error terms of threshold decoding at threshold `gamma`
/// with at most `ell_max` frames.
pub fn simulate_threshold_crossing(
    spec: &ChannelSpec,
    k_bits: u32,
    gamma: f64,
    ell_max: usize,
    samples: u64,
    seed: u64,
) -> Result<VlsfBoundResult> {
    let mut r = simulate_threshold_crossing_grid(spec, k_bits, &[gamma], ell_max, samples, seed)?;
    Ok(r.remove(0))
}

/// Service model whose stopping time is `min(ℓ_max, τ̂)`, with undetected
/// error probability `eps_undetected_bound + eps_detected_term`.
pub fn vlsf_service_model(result: &VlsfBoundResult) -> Result<ServiceModel> {
    let tail: Vec<f64> = result.tau_tail.iter().map(|e| e.value).collect();
    let pmf: Vec<f64> = (0..tail.len()).map(|i| tail[i] - tail.get(i + 1).copied().unwrap_or(0.0)).collect();
    let eps = (result.eps_undetected_bound.value + result.eps_detected_term.value).min(1.0);
    ServiceModel::empirical(pmf, eps)
}

/// Default threshold grid: 20 log-spaced points on `[0.25, 4]·k·ln 2`.
pub fn default_gamma_grid(k_bits: u32) -> Vec<f64> {
    log_spaced(
        0.25 * k_bits as f64 * std::f64::consts::LN_2,
        4.0 * k_bits as f64 * std::f64::consts::LN_2,
        20,
    )
}

pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaPoint {
    pub gamma: f64,
    pub mean_service: f64,
    /// `P[Δ >= ⌈d0/n⌉]`, absent when the queue is unstable.
    pub delay_ccdf: Option<f64>,
    pub eps_undetected: f64,
    pub eps_detected: f64,
    pub p_dv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSweep {
    pub gamma_star: Option<f64>,
    pub points: Vec<GammaPoint>,
}

/// Delay-violation probability along a threshold grid and its minimizer.
#[allow(clippy::too_many_arguments)]
pub fn optimize_gamma(
    spec: &ChannelSpec,
    k_bits: u32,
    queue: &QueueConfig,
    d0: u64,
    gamma_grid: &[f64],
    ell_max: usize,
    samples: u64,
    seed: u64,
) -> Result<GammaSweep> {
    check(spec.n == queue.n, || "channel and queue frame sizes differ".into())?;
    let results = simulate_threshold_crossing_grid(spec, k_bits, gamma_grid, ell_max, samples, seed)?;
    let mut points = Vec::with_capacity(results.len());
    for r in &results {
        let service = vlsf_service_model(r)?;
        let analysis = delay_pgf_sync(&service, queue)
            .and_then(|g| delay_violation(&g, d0, queue, service.eps_undetected, DelayMethod::Exact));
        let (delay_ccdf, p_dv) = match analysis {
            Ok(a) => (Some(a.delay_tail), Some(a.p_dv)),
            Err(e) if matches!(e, Error::Unstable { .. }) => (None, None),
            Err(e) => return Err(e),
        };
        points.push(GammaPoint {
            gamma: r.gamma,
            mean_service: service.mean(),
            delay_ccdf,
            eps_undetected: r.eps_undetected_bound.value,
            eps_detected: r.eps_detected_term.value,
            p_dv,
        });
    }
    let gamma_star = points
        .iter()
        .filter_map(|p| p.p_dv.map(|v| (p.gamma, v)))
        .fold(None, |best: Option<(f64, f64)>, (g, v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((g, v)),
        })
        .map(|(g, _)| g);
    Ok(GammaSweep { gamma_star, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::McEstimate;

    fn est(v: f64) -> McEstimate {
        McEstimate { value: v, half_width: 0.0, samples: 1, seed: 0 }
    }

    fn result_with_tail(tail: &[f64]) -> VlsfBoundResult {
        VlsfBoundResult {
            gamma: 1.0,
            ell_max: tail.len(),
            k_bits: 1,
            tau_tail: tail.iter().map(|&v| est(v)).collect(),
            event_probability: est(0.0),
            eps_undetected_bound: est(0.0),
            eps_detected_term: est(0.0),
        }
    }

    #[test]
    fn single_frame_truncation() {
        let spec = ChannelSpec::new(1.0, 10).unwrap();
        let r = simulate_threshold_crossing(&spec, 8, 30.0, 1, 2000, 4).unwrap();
        assert_eq!(r.tau_tail.len(), 1);
        assert_eq!(r.tau_tail[0].value, 1.0);
        assert!(r.eps_detected_term.value > 0.9);
    }

    #[test]
    fn service_model_from_tail() {
        let s = vlsf_service_model(&result_with_tail(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(s.mean(), 1.0);
        let s = vlsf_service_model(&result_with_tail(&[1.0, 0.5, 0.25])).unwrap();
        match s.kind {
            crate::channel::ServiceKind::Empirical { ref pmf } => assert_eq!(pmf, &vec![0.5, 0.25, 0.25]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn grid_and_single_runs_agree() {
        let spec = ChannelSpec::new(1.0, 8).unwrap();
        let grid = simulate_threshold_crossing_grid(&spec, 10, &[3.0, 6.0], 5, 3000, 2).unwrap();
        let single = simulate_threshold_crossing(&spec, 10, 6.0, 5, 3000, 2).unwrap();
        assert_eq!(grid[1], single);
    }

    #[test]
    fn log_spacing_endpoints() {
        let g = log_spaced(2.0, 32.0, 5);
        assert!((g[0] - 2.0).abs() < 1e-12 && (g[4] - 32.0).abs() < 1e-12);
        assert!((g[2] - 8.0).abs() < 1e-12);
    }
}
