use super::QueueConfig;
use crate::optim::{bisect_last_true, golden_section};

/// Network-calculus bound on `P[Δ >= ⌈d0/n⌉]` for ARQ with perfect detection:
/// `inf_{s>1} G_S(1/s)^{d-1} / (1 - G_A(s)G_S(1/s))` with `G_A(s) = (1-λ+λs)^n`
/// and `G_S(s) = ε + (1-ε)s`. Returns 1 when no `s > 1` is feasible.
pub fn snc_delay_bound(eps_frame: f64, q: &QueueConfig, d0: u64) -> f64 {
    let d = q.frames_for(d0.max(1)) as f64;
    let n = q.n as f64;
    let lambda = q.lambda;
    if !(0.0..1.0).contains(&eps_frame) || lambda * n >= 1.0 - eps_frame {
        return 1.0;
    }
    // x = log s
    let log_service = |x: f64| (eps_frame + (1.0 - eps_frame) * (-x).exp()).ln();
    let log_arrival = |x: f64| n * (lambda * x.exp_m1()).ln_1p();
    let log_h = |x: f64| log_arrival(x) + log_service(x);
    let mut x_hi = 1e-3;
    while log_h(x_hi) < 0.0 {
        x_hi *= 2.0;
        if x_hi > 1e3 {
            break;
        }
    }
    let x_max = bisect_last_true(|x| log_h(x) < 0.0, 0.0, x_hi, 1e-14);
    if x_max <= 0.0 {
        return 1.0;
    }
    let objective = |x: f64| {
        let lh = log_h(x);
        if lh >= 0.0 {
            return f64::INFINITY;
        }
        (d - 1.0) * log_service(x) - (-lh.exp_m1()).ln()
    };
    let (_, best) = golden_section(objective, 0.0, x_max, 1e-12 * x_max.max(1.0));
    best.exp().min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unstable_is_vacuous() {
        let q = QueueConfig::new(10, 0.06).unwrap();
        assert_eq!(snc_delay_bound(0.5, &q, 100), 1.0);
    }

    #[test]
    fn bound_decreases_with_threshold() {
        let q = QueueConfig::new(10, 0.01).unwrap();
        let a = snc_delay_bound(0.3, &q, 50);
        let b = snc_delay_bound(0.3, &q, 100);
        assert!(b < a && a < 1.0, "{a} {b}");
    }
}
