use std::f64::consts::LN_2;

use super::{draw_symbol, softplus, ChannelSpec};
use crate::error::{check, Error, Result};
use crate::mc::{merge_all, McEstimate, Moments};
use crate::optim::golden_section;
use crate::rng::map_chunks;

/// Coarse α grid searched before refinement.
pub const DEFAULT_ALPHAS: [f64; 8] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];

/// Width of the α bracket at which refinement stops.
const ALPHA_TOL: f64 = 0.05;

/// `ln(2^k - 1)`
pub fn log_codebook(k_bits: u32) -> f64 {
    k_bits as f64 * LN_2 + (-(2f64.powi(-(k_bits as i32)))).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcusResult {
    pub alpha: f64,
    pub estimate: McEstimate,
}

/// `E[exp(-[i_s - ln(2^k - 1)]^+)]` for each α, all from the same draws.
pub fn rcus_at(
    spec: &ChannelSpec,
    k_bits: u32,
    alphas: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    check(k_bits >= 1, || "k must be at least 1".into())?;
    check(samples >= 1, || "at least one sample is required".into())?;
    check(!alphas.is_empty(), || "no α candidates".into())?;
    if let Some(&bad) = alphas.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidParameter(format!("α = {bad} must be positive")));
    }
    let log_m = log_codebook(k_bits);
    let amp = spec.amplitude();
    let n = spec.n;
    let parts = map_chunks(seed, samples, |rng, count| {
        let mut acc = vec![Moments::default(); alphas.len()];
        let mut dens = vec![0.0; alphas.len()];
        for _ in 0..count {
            dens.iter_mut().for_each(|d| *d = 0.0);
            for _ in 0..n {
                let (x, y) = draw_symbol(rng, amp);
                let w = -2.0 * x * y;
                for (d, &a) in dens.iter_mut().zip(alphas) {
                    *d += LN_2 - softplus(a * w);
                }
            }
            for (m, &d) in acc.iter_mut().zip(&dens) {
                m.push((-(d - log_m).max(0.0)).exp());
            }
        }
        acc
    });
    Ok((0..alphas.len()).map(|j| merge_all(parts.iter().map(|p| &p[j])).estimate(seed)).collect())
}

/// Minimizes the RCUs estimate over the α grid, then refines by golden
/// section between the grid neighbours of the best grid point.
pub fn rcus_optimize(
    spec: &ChannelSpec,
    k_bits: u32,
    alpha_candidates: &[f64],
    samples: u64,
    seed: u64,
) -> Result<RcusResult> {
    let mut grid = alpha_candidates.to_vec();
    grid.sort_by(f64::total_cmp);
    let at_grid = rcus_at(spec, k_bits, &grid, samples, seed)?;
    let mut best = RcusResult { alpha: grid[0], estimate: at_grid[0] };
    let mut best_j = 0;
    for (j, e) in at_grid.iter().enumerate() {
        if e.value < best.estimate.value {
            best = RcusResult { alpha: grid[j], estimate: *e };
            best_j = j;
        }
    }
    if grid.len() < 2 || spec.rho == 0.0 {
        return Ok(best);
    }
    let lo = grid[best_j.saturating_sub(1)];
    let hi = grid[(best_j + 1).min(grid.len() - 1)];
    let mut failure = None;
    let mut evaluated = Vec::new();
    golden_section(
        |a| match rcus_at(spec, k_bits, &[a], samples, seed) {
            Ok(e) => {
                evaluated.push((a, e[0]));
                e[0].value
            }
            Err(err) => {
                failure = Some(err);
                f64::INFINITY
            }
        },
        lo,
        hi,
        ALPHA_TOL,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    for (a, e) in evaluated {
        if e.value < best.estimate.value {
            best = RcusResult { alpha: a, estimate: e };
        }
    }
    Ok(best)
}

/// RCUs estimate of the frame error probability, minimized over α.
pub fn rcus_epsilon(
    spec: &ChannelSpec,
    k_bits: u32,
    alpha_candidates: &[f64],
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    rcus_optimize(spec, k_bits, alpha_candidates, samples, seed).map(|r| r.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codebook_log_is_accurate() {
        assert!((log_codebook(1) - 0.0).abs() < 1e-15);
        assert!((log_codebook(2) - 3f64.ln()).abs() < 1e-15);
        assert!((log_codebook(2000) - 2000.0 * LN_2).abs() < 1e-9);
    }

    #[test]
    fn zero_snr_gives_one() {
        let spec = ChannelSpec::new(0.0, 50).unwrap();
        let e = rcus_epsilon(&spec, 30, &DEFAULT_ALPHAS, 2000, 1).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.half_width, 0.0);
    }

    #[test]
    fn optimum_not_above_unit_alpha() {
        let spec = ChannelSpec::new(1.0, 60).unwrap();
        let opt = rcus_epsilon(&spec, 20, &DEFAULT_ALPHAS, 4000, 9).unwrap();
        let unit = rcus_at(&spec, 20, &[1.0], 4000, 9).unwrap()[0];
        assert!(opt.value <= unit.value);
        assert!(opt.value > 0.0 && opt.value <= 1.0);
    }

    #[test]
    fn rejects_bad_alpha() {
        let spec = ChannelSpec::new(1.0, 10).unwrap();
        assert!(rcus_epsilon(&spec, 10, &[0.5, -1.0], 10, 1).is_err());
        assert!(rcus_epsilon(&spec, 10, &[], 10, 1).is_err());
    }
}
