//! Discrete-event simulation of the queues and packet-management policies.
//!
//! Each run is one sequential replication driven by substream 0 of its seed.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::age::AgePolicy;
use crate::channel::{ServiceModel, ServiceSampler};
use crate::error::{check, Error, Result};
use crate::mc::Z95;
use crate::pgf::{TailCurve, TailMethod};
use crate::queueing::QueueConfig;
use crate::rng::{substream, StreamRng};

/// Number of batches for the batch-means standard error.
pub const BATCHES: usize = 50;

/// Default warmup: 10% of the recorded run, at least 1000.
pub fn default_warmup(samples: u64) -> u64 {
    (samples / 10).max(1000)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimKind {
    SyncDelay,
    AsyncDelay,
    PeakAge,
}

/// Echo of the simulated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub kind: SimKind,
    pub n: usize,
    pub lambda: f64,
    pub policy: Option<AgePolicy>,
    pub samples: u64,
    pub warmup: u64,
}

/// Packet bookkeeping of a peak-age run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Conservation {
    /// Accepted into the buffer or the server.
    pub admitted: u64,
    pub departed: u64,
    pub in_system: u64,
    /// Accepted, then overwritten or preempted.
    pub discarded: u64,
    /// Refused on arrival.
    pub blocked: u64,
}

impl Conservation {
    pub fn holds(&self) -> bool {
        self.admitted == self.departed + self.in_system + self.discarded
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    /// `P̂[X > k]`, `k = 0..=k_max`, with 95% half-widths from `std_err`.
    pub ccdf: TailCurve,
    /// `√(p̂(1-p̂)/N)` per grid point.
    pub std_err: Vec<f64>,
    /// Batch-means standard error per grid point.
    pub batch_std_err: Vec<f64>,
    pub departures: u64,
    pub mean: f64,
    pub seed: u64,
    pub config: SimConfig,
    pub conservation: Option<Conservation>,
}

impl SimReport {
    /// Standard error for comparing `P̂[X > k]` with a reference value `p`:
    /// the largest of the binomial error at `p`, at `p̂`, and the batch-means error.
    pub fn std_err_against(&self, k: usize, p: f64) -> f64 {
        let n = self.departures as f64;
        let at_ref = (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n).sqrt();
        at_ref.max(self.std_err[k]).max(self.batch_std_err[k])
    }

    /// `|p̂_k - p_k| <= z · std_err_against(k, p_k)` for every `k` in `0..=k_max`.
    pub fn agrees_with(&self, reference: impl Fn(usize) -> f64, z: f64) -> bool {
        (0..self.ccdf.len()).all(|k| {
            let p = reference(k);
            (self.ccdf.values[k] - p).abs() <= z * self.std_err_against(k, p)
        })
    }
}

fn report(
    samples: &[u64],
    k_max: usize,
    seed: u64,
    config: SimConfig,
    conservation: Option<Conservation>,
) -> SimReport {
    let n = samples.len();
    let exceed = |xs: &[u64]| -> Vec<u64> {
        let mut hist = vec![0u64; k_max + 2];
        for &x in xs {
            hist[(x as usize).min(k_max + 1)] += 1;
        }
        // counts of x > k
        let mut out = vec![0u64; k_max + 1];
        let mut above = xs.len() as u64;
        for k in 0..=k_max {
            above -= hist[k];
            out[k] = above;
        }
        out
    };
    let total = exceed(samples);
    let values: Vec<f64> = total.iter().map(|&c| c as f64 / n as f64).collect();
    let std_err: Vec<f64> = values.iter().map(|p| (p * (1.0 - p) / n as f64).sqrt()).collect();

    let batch_len = n / BATCHES;
    let batch_std_err = if batch_len == 0 {
        vec![0.0; k_max + 1]
    } else {
        let per_batch: Vec<Vec<u64>> =
            (0..BATCHES).map(|b| exceed(&samples[b * batch_len..(b + 1) * batch_len])).collect();
        (0..=k_max)
            .map(|k| {
                let means: Vec<f64> = per_batch.iter().map(|c| c[k] as f64 / batch_len as f64).collect();
                let m = means.iter().sum::<f64>() / BATCHES as f64;
                let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (BATCHES - 1) as f64;
                (var / BATCHES as f64).sqrt()
            })
            .collect()
    };
    let half_widths = std_err.iter().map(|s| Z95 * s).collect();
    let mean = samples.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
    SimReport {
        ccdf: TailCurve::new(0, values, TailMethod::Simulation).with_half_widths(half_widths),
        std_err,
        batch_std_err,
        departures: n as u64,
        mean,
        seed,
        config,
        conservation,
    }
}

/// Geometric gap on `{1, 2, ...}` with success probability `p`.
struct Gap(Option<Geometric>);

impl Gap {
    fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            return Ok(Gap(None));
        }
        Geometric::new(p).map(|g| Gap(Some(g))).map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    fn sample(&self, rng: &mut StreamRng) -> u64 {
        self.0.as_ref().map_or(1, |g| 1 + g.sample(rng))
    }
}

/// Inverse-CDF table of a Binomial(n, λ) bulk conditioned on being non-empty.
struct BulkSize {
    cdf: Vec<f64>,
}

impl BulkSize {
    fn new(q: &QueueConfig) -> Self {
        let (n, lam) = (q.n as u64, q.lambda);
        let ln_norm = (-(n as f64 * (-lam).ln_1p()).exp_m1()).ln();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (1..=n)
            .map(|k| {
                let ln_p = statrs::function::factorial::ln_binomial(n, k)
                    + k as f64 * lam.ln()
                    + if lam < 1.0 {
                        (n - k) as f64 * (-lam).ln_1p()
                    } else if k == n {
                        0.0
                    } else {
                        f64::NEG_INFINITY
                    };
                acc += (ln_p - ln_norm).exp();
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        Self { cdf }
    }

    fn sample(&self, rng: &mut StreamRng) -> u64 {
        let u: f64 = rng.random();
        1 + self.cdf.partition_point(|&c| c <= u) as u64
    }
}

fn check_run(q: &QueueConfig, service: &ServiceModel, samples: u64) -> Result<()> {
    check(samples >= 1, || "sample count must be at least 1".into())?;
    q.check_stable(service)
}

/// Frame-synchronous bulk FCFS queue: the bulk arriving in frame `t` is served
/// as one job of `Σ τ_i` frames starting no earlier than frame `t + 1`; its
/// delay is the departure frame minus `t`. Reports `P̂[Δ > k]` for `k <= k_max`.
pub fn simulate_fcfs_delay(
    service: &ServiceModel,
    q: &QueueConfig,
    num_bulks: u64,
    warmup_bulks: u64,
    seed: u64,
    k_max: usize,
) -> Result<SimReport> {
    check_run(q, service, num_bulks)?;
    let sampler = service.sampler();
    let gap = Gap::new(-(q.n as f64 * (-q.lambda).ln_1p()).exp_m1())?;
    let bulk = BulkSize::new(q);
    let mut rng = substream(seed, 0);
    let (mut t, mut dep) = (0u64, 0u64);
    let mut delays = Vec::with_capacity(num_bulks as usize);
    for i in 0..warmup_bulks + num_bulks {
        t += gap.sample(&mut rng);
        let size = bulk.sample(&mut rng);
        let work: u64 = (0..size).map(|_| sampler.sample(&mut rng)).sum();
        let start = (t + 1).max(dep + 1);
        dep = start + work - 1;
        if i >= warmup_bulks {
            delays.push(dep - t);
        }
    }
    let config = SimConfig {
        kind: SimKind::SyncDelay,
        n: q.n,
        lambda: q.lambda,
        policy: None,
        samples: num_bulks,
        warmup: warmup_bulks,
    };
    Ok(report(&delays, k_max, seed, config, None))
}

/// Frame-asynchronous FCFS queue at channel-use granularity: a packet arriving
/// at channel use `t` starts no earlier than `t + 1` and occupies `n τ` uses.
pub fn simulate_async_delay(
    service: &ServiceModel,
    q: &QueueConfig,
    num_packets: u64,
    warmup: u64,
    seed: u64,
    k_max: usize,
) -> Result<SimReport> {
    check_run(q, service, num_packets)?;
    let sampler = service.sampler();
    let gap = Gap::new(q.lambda)?;
    let n = q.n as u64;
    let mut rng = substream(seed, 0);
    let (mut t, mut dep) = (0u64, 0u64);
    let mut delays = Vec::with_capacity(num_packets as usize);
    for i in 0..warmup + num_packets {
        t += gap.sample(&mut rng);
        let start = (t + 1).max(dep + 1);
        dep = start + n * sampler.sample(&mut rng) - 1;
        if i >= warmup {
            delays.push(dep - t);
        }
    }
    let config = SimConfig {
        kind: SimKind::AsyncDelay,
        n: q.n,
        lambda: q.lambda,
        policy: None,
        samples: num_packets,
        warmup,
    };
    Ok(report(&delays, k_max, seed, config, None))
}

#[derive(Debug, Clone, Copy)]
struct InService {
    generated: u64,
    departs: u64,
}

struct AgeState<'a> {
    policy: AgePolicy,
    sampler: &'a ServiceSampler,
    server: Option<InService>,
    waiting: Option<u64>,
    last_delivered: Option<u64>,
    counts: Conservation,
}

impl AgeState<'_> {
    fn start(&mut self, generated: u64, frame: u64, rng: &mut StreamRng) {
        // service occupies frames frame+1 ..= frame+τ
        let departs = frame + self.sampler.sample(rng);
        self.server = Some(InService { generated, departs });
    }

    /// Completes the service ending in `frame`; returns the peak age if a
    /// previous update exists.
    fn depart(&mut self, frame: u64, rng: &mut StreamRng) -> Option<u64> {
        let done = self.server.take().expect("departure without service");
        self.counts.departed += 1;
        let peak = self.last_delivered.map(|g| frame - g);
        self.last_delivered = Some(done.generated);
        if let Some(g) = self.waiting.take() {
            self.start(g, frame, rng);
        }
        peak
    }

    fn arrive(&mut self, frame: u64, rng: &mut StreamRng) {
        let busy = self.server.is_some();
        if !busy {
            self.counts.admitted += 1;
            self.start(frame, frame, rng);
            return;
        }
        match self.policy {
            AgePolicy::Dwt => self.counts.blocked += 1,
            AgePolicy::Ktn => {
                if self.waiting.is_none() {
                    self.counts.admitted += 1;
                    self.waiting = Some(frame);
                } else {
                    self.counts.blocked += 1;
                }
            }
            AgePolicy::Ktl => {
                self.counts.admitted += 1;
                if self.waiting.replace(frame).is_some() {
                    self.counts.discarded += 1;
                }
            }
            AgePolicy::LcfsS => {
                self.counts.admitted += 1;
                self.counts.discarded += 1;
                self.start(frame, frame, rng);
            }
        }
    }
}

/// Peak age in frames under `policy`, recorded at every departure.
///
/// At most one packet per frame reaches the system, with probability
/// `1 - (1-λ)^n`; it is generated in that frame and can be served from the next
/// one. An arrival is matched against the state at the start of its frame, so
/// a packet arriving in the frame where the current service ends is handled as
/// if the server were busy. Under LCFS_S a service that ends in the arrival
/// frame completes and the arrival starts afresh.
pub fn simulate_peak_age(
    policy: AgePolicy,
    service: &ServiceModel,
    q: &QueueConfig,
    num_departures: u64,
    warmup: u64,
    seed: u64,
    k_max: usize,
) -> Result<SimReport> {
    check(num_departures >= 1, || "sample count must be at least 1".into())?;
    if !policy.accepts(service) {
        return Err(Error::IncompatibleService { policy: policy.name().into() });
    }
    if policy != AgePolicy::Dwt && service.eps_frame().is_some_and(|e| e >= 1.0) {
        return Err(Error::DegenerateChain);
    }
    let sampler = service.sampler();
    let gap = Gap::new(1.0 - q.empty_frame_prob())?;
    let mut rng = substream(seed, 0);
    let mut state = AgeState {
        policy,
        sampler: &sampler,
        server: None,
        waiting: None,
        last_delivered: None,
        counts: Conservation::default(),
    };
    let mut next_arrival = gap.sample(&mut rng);
    let mut ages = Vec::with_capacity(num_departures as usize);
    let mut seen = 0u64;
    let total = warmup + num_departures;
    while seen < total {
        // next event frame
        let service_end = state.server.map(|s| s.departs);
        let frame = service_end.map_or(next_arrival, |d| d.min(next_arrival));
        let ends = service_end == Some(frame);
        let arrives = next_arrival == frame;
        let mut peak = None;
        if arrives {
            next_arrival = frame + gap.sample(&mut rng);
            if ends && policy == AgePolicy::LcfsS {
                peak = Some(state.depart(frame, &mut rng));
                state.arrive(frame, &mut rng);
            } else {
                state.arrive(frame, &mut rng);
                if ends && state.server.is_some_and(|s| s.departs == frame) {
                    peak = Some(state.depart(frame, &mut rng));
                }
            }
        } else if ends {
            peak = Some(state.depart(frame, &mut rng));
        }
        if let Some(p) = peak {
            if let Some(age) = p {
                if seen >= warmup {
                    ages.push(age);
                }
            }
            seen += 1;
        }
    }
    let mut counts = state.counts;
    counts.in_system = state.server.is_some() as u64 + state.waiting.is_some() as u64;
    debug_assert!(counts.holds());
    if !counts.holds() {
        return Err(Error::OptimizerFailure("packet conservation violated".into()));
    }
    let config = SimConfig {
        kind: SimKind::PeakAge,
        n: q.n,
        lambda: q.lambda,
        policy: Some(policy),
        samples: num_departures,
        warmup,
    };
    Ok(report(&ages, k_max, seed, config, Some(counts)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::age::peak_age_pgf;
    use crate::channel::arq_service_model;
    use crate::pgf::exact_ccdf;
    use crate::queueing::{delay_pgf_async, delay_pgf_sync, DEFAULT_DEGREE_CAP};

    fn cfg(n: usize, lambda: f64) -> QueueConfig {
        QueueConfig::new(n, lambda).unwrap()
    }

    #[test]
    fn same_seed_same_report() {
        let s = arq_service_model(0.3).unwrap();
        let q = cfg(10, 0.01);
        let a = simulate_fcfs_delay(&s, &q, 20_000, 1000, 9, 20).unwrap();
        let b = simulate_fcfs_delay(&s, &q, 20_000, 1000, 9, 20).unwrap();
        assert_eq!(a.ccdf.values, b.ccdf.values);
        let c = simulate_fcfs_delay(&s, &q, 20_000, 1000, 10, 20).unwrap();
        assert_ne!(a.ccdf.values, c.ccdf.values);
    }

    #[test]
    fn sync_light_traffic() {
        let s = ServiceModel::deterministic(1).unwrap();
        let r = simulate_fcfs_delay(&s, &cfg(10, 1e-4), 100_000, 1000, 1, 5).unwrap();
        assert!(r.ccdf.values[1] < 0.02);
        assert_eq!(r.ccdf.values[0], 1.0);
    }

    #[test]
    fn async_light_traffic() {
        let s = ServiceModel::deterministic(1).unwrap();
        let r = simulate_async_delay(&s, &cfg(5, 1e-4), 100_000, 1000, 1, 10).unwrap();
        let p5 = r.ccdf.values[4] - r.ccdf.values[5];
        assert!(p5 > 0.99);
    }

    #[test]
    fn sync_matches_analytic() {
        let s = arq_service_model(0.5).unwrap();
        let q = cfg(10, 0.01);
        let exact = exact_ccdf(&delay_pgf_sync(&s, &q).unwrap(), 30).unwrap();
        let r = simulate_fcfs_delay(&s, &q, 200_000, 20_000, 3, 30).unwrap();
        assert!(r.agrees_with(|k| exact.values[k], 3.0));
    }

    #[test]
    fn async_matches_analytic() {
        let s = arq_service_model(0.5).unwrap();
        let q = cfg(5, 0.02);
        let exact = exact_ccdf(&delay_pgf_async(&s, &q, DEFAULT_DEGREE_CAP).unwrap(), 60).unwrap();
        let r = simulate_async_delay(&s, &q, 200_000, 20_000, 3, 60).unwrap();
        assert!(r.agrees_with(|k| exact.values[k], 3.0));
    }

    #[test]
    fn peak_age_matches_analytic_for_every_policy() {
        let s = arq_service_model(0.3).unwrap();
        let q = cfg(10, 0.05);
        for p in AgePolicy::ALL {
            let exact = exact_ccdf(&peak_age_pgf(p, &s, &q).unwrap(), 40).unwrap();
            let r = simulate_peak_age(p, &s, &q, 200_000, 20_000, 5, 40).unwrap();
            assert!(r.conservation.unwrap().holds());
            let worst = (0..=40)
                .map(|k| (r.ccdf.values[k] - exact.values[k]).abs() / r.std_err_against(k, exact.values[k]))
                .fold(0.0, f64::max);
            // 41 correlated points per policy
            assert!(worst <= 4.0, "{p}: worst deviation {worst} standard errors");
        }
    }

    #[test]
    fn dwt_unit_service_closed_form() {
        let s = ServiceModel::deterministic(1).unwrap();
        let q = cfg(10, 0.02);
        let qn = q.empty_frame_prob();
        let r = simulate_peak_age(AgePolicy::Dwt, &s, &q, 100_000, 5_000, 2, 30).unwrap();
        assert!(r.agrees_with(|k| if k < 2 { 1.0 } else { qn.powi(k as i32 - 2) }, 3.0));
    }

    #[test]
    fn incompatible_policy_rejected() {
        let s = ServiceModel::empirical(vec![0.5, 0.5], 0.0).unwrap();
        let r = simulate_peak_age(AgePolicy::Ktl, &s, &cfg(10, 0.01), 100, 10, 1, 10);
        assert!(matches!(r, Err(Error::IncompatibleService { .. })));
    }
}
