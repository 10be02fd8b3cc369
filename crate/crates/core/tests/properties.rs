use proptest::prelude::*;
use urllc_core::age::{high_rate_limit, peak_age_pgf, BufferChain};
use urllc_core::channel::arq_service_model;
use urllc_core::pgf::{compose_affine_power, eval, exact_ccdf, pgf_mean};
use urllc_core::queueing::{delay_pgf_sync, delay_violation, snc_delay_bound, DelayMethod};
use urllc_core::sim::simulate_fcfs_delay;
use urllc_core::{AgePolicy, QueueConfig, RationalPgf};

fn pmf() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..20).prop_filter_map("all zero", |w| {
        let total: f64 = w.iter().sum();
        (total > 1e-3).then(|| w.iter().map(|x| x / total).collect())
    })
}

/// Stable `(n, λ, ε)` with traffic intensity below 0.9.
fn stable_queue() -> impl Strategy<Value = (usize, f64, f64)> {
    (1usize..40, 0.0f64..0.9, 1e-6f64..0.9).prop_filter_map("unstable", |(n, load, eps)| {
        let lambda = load * (1.0 - eps) / n as f64;
        (lambda > 1e-9).then_some((n, lambda, eps))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn finite_support_tail_is_one_minus_cumsum(p in pmf()) {
        let g = RationalPgf::from_pmf(&p).unwrap();
        let t = exact_ccdf(&g, p.len() + 5).unwrap();
        let mut cum = 0.0;
        for k in 0..p.len() + 5 {
            cum += p.get(k).copied().unwrap_or(0.0);
            prop_assert!((t.exceeds(k as i64) - (1.0 - cum).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn delay_pgf_normalized_with_consistent_mean((n, lambda, eps) in stable_queue()) {
        let q = QueueConfig::new(n, lambda).unwrap();
        let g = delay_pgf_sync(&arq_service_model(eps).unwrap(), &q).unwrap();
        prop_assert!((eval(&g, 1.0).unwrap() - 1.0).abs() < 1e-9);
        let h = 1e-6;
        let fd = (eval(&g, 1.0 + h).unwrap() - eval(&g, 1.0 - h).unwrap()) / (2.0 * h);
        let mean = pgf_mean(&g).unwrap();
        prop_assert!(mean >= 1.0);
        prop_assert!((fd - mean).abs() <= 1e-5 * mean, "fd {} mean {}", fd, mean);
    }

    #[test]
    fn delay_tail_is_a_ccdf((n, lambda, eps) in stable_queue()) {
        let q = QueueConfig::new(n, lambda).unwrap();
        let t = exact_ccdf(&delay_pgf_sync(&arq_service_model(eps).unwrap(), &q).unwrap(), 60).unwrap();
        prop_assert_eq!(t.exceeds(0), 1.0);
        prop_assert!(t.values.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(t.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn network_calculus_bound_dominates_exact_tail(
        n in 5usize..=20, lambda in 0.002f64..0.01, eps in 0.1f64..0.5, d in 1i64..30,
    ) {
        let q = QueueConfig::new(n, lambda).unwrap();
        prop_assume!(lambda * n as f64 / (1.0 - eps) < 0.95);
        let g = delay_pgf_sync(&arq_service_model(eps).unwrap(), &q).unwrap();
        let exact = exact_ccdf(&g, d as usize).unwrap().at_least(d);
        prop_assert!(snc_delay_bound(eps, &q, d as u64 * n as u64) >= exact);
    }

    #[test]
    fn violation_grows_with_arrival_rate((n, lambda, eps) in stable_queue(), shrink in 0.1f64..0.99, d0 in 1u64..400) {
        let s = arq_service_model(eps).unwrap();
        let p = |l: f64| {
            let q = QueueConfig::new(n, l).unwrap();
            delay_violation(&delay_pgf_sync(&s, &q).unwrap(), d0, &q, 0.0, DelayMethod::Exact).unwrap().p_dv
        };
        prop_assert!(p(lambda * shrink) <= p(lambda) + 1e-12);
    }

    #[test]
    fn affine_power_matches_scalar_composition(q in 0.0f64..0.9, a in 0.0f64..0.5, m in 1u32..12, s in 0.0f64..1.0) {
        let g = RationalPgf::geometric(q).unwrap();
        let h = compose_affine_power(&g, a, 1.0 - a, m).unwrap();
        let want = (a + (1.0 - a) * eval(&g, s).unwrap()).powi(m as i32);
        prop_assert!((eval(&h, s).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn chain_probabilities_sum_to_one(n in 1usize..200, lambda in 1e-6f64..0.999, eps in 0.0f64..0.99) {
        let c = BufferChain::new(eps, &QueueConfig::new(n, lambda).unwrap()).unwrap();
        prop_assert!((c.p0 + c.p1 + c.p2 - 1.0).abs() < 1e-12);
        prop_assert!(c.p0 >= 0.0 && c.p1 >= 0.0 && c.p2 >= 0.0);
    }

    #[test]
    fn peak_age_tails_are_ccdfs(n in 1usize..30, lambda in 1e-4f64..0.3, eps in 0.0f64..0.8, which in 0usize..4) {
        let policy = AgePolicy::ALL[which];
        let q = QueueConfig::new(n, lambda).unwrap();
        let t = exact_ccdf(&peak_age_pgf(policy, &arq_service_model(eps).unwrap(), &q).unwrap(), 80).unwrap();
        prop_assert!(t.values.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(t.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn high_rate_limits_are_probabilities(eps in 0.0f64..0.99, a0 in 1u64..2000, n in 1usize..200, which in 0usize..4) {
        let p = AgePolicy::ALL[which];
        let v = high_rate_limit(p, eps, a0, n).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(high_rate_limit(p, eps, a0 + n as u64, n).unwrap() <= v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_is_a_function_of_the_seed(seed in any::<u64>(), (n, lambda, eps) in stable_queue()) {
        let s = arq_service_model(eps).unwrap();
        let q = QueueConfig::new(n, lambda).unwrap();
        let a = simulate_fcfs_delay(&s, &q, 5_000, 100, seed, 20).unwrap();
        let b = simulate_fcfs_delay(&s, &q, 5_000, 100, seed, 20).unwrap();
        prop_assert_eq!(a.ccdf, b.ccdf);
        prop_assert_eq!(a.batch_std_err, b.batch_std_err);
    }
}
