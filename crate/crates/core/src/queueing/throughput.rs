use serde::Serialize;

use super::{delay_pgf_sync, delay_violation, snc_delay_bound, DelayMethod, QueueConfig};
use crate::channel::ServiceModel;
use crate::error::{check, Error, Result};

/// Which delay-violation evaluation drives the arrival-rate search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateBound {
    Exact,
    Snc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    pub lambda_star: f64,
    /// `k · λ*` in bits per channel use.
    pub throughput: f64,
}

const STABILITY_GUARD: f64 = 1e-12;
const REL_TOL: f64 = 1e-4;

/// Largest `λ` in `(0, limit)` with `p_dv(λ) <= target`, for `p_dv`
/// non-decreasing in `λ`; evaluation errors count as violations.
pub fn max_arrival_rate_with<F>(p_dv: F, limit: f64, target: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    check(target > 0.0, || format!("target {target} must be positive"))?;
    let hi_guard = limit - STABILITY_GUARD;
    if target >= 1.0 {
        return Ok(hi_guard);
    }
    let ok = |l: f64| p_dv(l).map(|v| v <= target).unwrap_or(false);
    if ok(hi_guard) {
        return Ok(hi_guard);
    }
    let mut lo = limit * 1e-9;
    if !ok(lo) {
        return Err(Error::NoFeasibleRate { target });
    }
    let mut hi = hi_guard;
    while hi - lo > REL_TOL * lo {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Maximum arrival rate per channel use meeting `P_dv(d0) <= target`, and
/// the resulting throughput `k λ*`.
pub fn max_arrival_rate(
    service: &ServiceModel,
    n: usize,
    k_bits: u32,
    d0: u64,
    target: f64,
    bound: RateBound,
) -> Result<RateResult> {
    check(target > 0.0 && target <= 1.0, || format!("target {target} must lie in (0, 1]"))?;
    if service.eps_undetected > target {
        return Err(Error::NoFeasibleRate { target });
    }
    let limit = (1.0 / (n as f64 * service.mean())).min(1.0);
    let lambda_star = match bound {
        RateBound::Exact => max_arrival_rate_with(
            |l| {
                let q = QueueConfig::new(n, l)?;
                let g = delay_pgf_sync(service, &q)?;
                Ok(delay_violation(&g, d0, &q, service.eps_undetected, DelayMethod::Exact)?.p_dv)
            },
            limit,
            target,
        )?,
        RateBound::Snc => {
            let eps = service.eps_frame().ok_or_else(|| {
                Error::InvalidParameter("the network-calculus bound needs geometric service".into())
            })?;
            max_arrival_rate_with(
                |l| Ok((snc_delay_bound(eps, &QueueConfig::new(n, l)?, d0) + service.eps_undetected).min(1.0)),
                limit,
                target,
            )?
        }
    };
    Ok(RateResult { lambda_star, throughput: k_bits as f64 * lambda_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::arq_service_model;

    #[test]
    fn unit_target_gives_stability_limit() {
        let s = arq_service_model(0.5).unwrap();
        let r = max_arrival_rate(&s, 10, 30, 100, 1.0, RateBound::Exact).unwrap();
        assert!((r.lambda_star - (0.05 - 1e-12)).abs() < 1e-15);
        assert!((r.throughput - 30.0 * r.lambda_star).abs() < 1e-15);
    }

    #[test]
    fn undetected_error_above_target_is_infeasible() {
        let s = ServiceModel::empirical(vec![1.0], 1e-2).unwrap();
        let r = max_arrival_rate(&s, 10, 30, 100, 1e-3, RateBound::Exact);
        assert!(matches!(r, Err(Error::NoFeasibleRate { .. })));
    }

    #[test]
    fn snc_rate_below_exact_rate() {
        let s = arq_service_model(0.1).unwrap();
        let e = max_arrival_rate(&s, 20, 30, 100, 1e-3, RateBound::Exact).unwrap();
        let b = max_arrival_rate(&s, 20, 30, 100, 1e-3, RateBound::Snc).unwrap();
        assert!(b.lambda_star < e.lambda_star);
    }
}
