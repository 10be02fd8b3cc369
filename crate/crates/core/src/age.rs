//! Peak age of information for single-source packet-management policies on
//! the frame-synchronous channel.
//!
//! All PGFs are in frames. For the three policies with a buffer the service is
//! ARQ with perfect detection, so the frame count is geometric.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::channel::ServiceModel;
use crate::error::{check, Error, Result};
use crate::pgf::{Polynomial, Rational, RationalPgf, TailCurve};
use crate::queueing::{tail_at, DelayMethod, QueueConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgePolicy {
    /// FCFS, capacity 1: arrivals during service are dropped.
    #[serde(rename = "DWT")]
    Dwt,
    /// FCFS, capacity 2: one packet may wait, later arrivals are dropped.
    #[serde(rename = "KTN")]
    Ktn,
    /// One waiting slot that a newer arrival overwrites.
    #[serde(rename = "KTL")]
    Ktl,
    /// A new arrival preempts the packet in service.
    #[serde(rename = "LCFS_S")]
    LcfsS,
}

impl AgePolicy {
    pub const ALL: [AgePolicy; 4] = [AgePolicy::Dwt, AgePolicy::Ktn, AgePolicy::Ktl, AgePolicy::LcfsS];

    pub fn name(self) -> &'static str {
        match self {
            AgePolicy::Dwt => "DWT",
            AgePolicy::Ktn => "KTN",
            AgePolicy::Ktl => "KTL",
            AgePolicy::LcfsS => "LCFS_S",
        }
    }

    pub fn accepts(self, service: &ServiceModel) -> bool {
        self == AgePolicy::Dwt || service.is_geometric()
    }
}

impl fmt::Display for AgePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "DWT" => Ok(AgePolicy::Dwt),
            "KTN" => Ok(AgePolicy::Ktn),
            "KTL" => Ok(AgePolicy::Ktl),
            "LCFS_S" | "LCFSS" => Ok(AgePolicy::LcfsS),
            _ => Err(Error::InvalidParameter(format!("unknown policy '{s}'"))),
        }
    }
}

/// Per-frame transition probabilities of the queue-size chain shared by KTN
/// and KTL, and its stationary law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BufferChain {
    /// A packet arrives in the frame.
    pub u0: f64,
    /// A packet arrives and the frame is NACKed.
    pub u1: f64,
    /// No packet arrives and the frame is ACKed.
    pub d: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl BufferChain {
    pub fn new(eps_frame: f64, q: &QueueConfig) -> Result<Self> {
        check((0.0..=1.0).contains(&eps_frame), || {
            format!("frame error probability {eps_frame} must lie in [0, 1]")
        })?;
        let empty = q.empty_frame_prob();
        let u0 = 1.0 - empty;
        let u1 = eps_frame * u0;
        let d = (1.0 - eps_frame) * empty;
        if !(d > 0.0) {
            return Err(Error::DegenerateChain);
        }
        let norm = d * d + u0 * d + u0 * u1;
        let p0 = d * d / norm;
        let p1 = u0 * d / norm;
        let p2 = u0 * u1 / norm;
        Ok(Self { u0, u1, d, p0, p1, p2 })
    }

    /// `p0 / (p0 + p1)`: an admitted packet finds the server idle.
    pub fn idle_weight(&self) -> f64 {
        self.d / (self.d + self.u0)
    }
}

fn geometric_pgf(p_success: f64) -> Result<Rational> {
    // p s / (1 - (1-p) s)
    Rational::new(Polynomial::linear(0.0, p_success), Polynomial::linear(1.0, -(1.0 - p_success)))
}

fn s_inverse(r: &Rational) -> Result<Rational> {
    r.div_s()
}

fn mixture(w: f64, a: &Rational, b: &Rational) -> Result<Rational> {
    a.scale(w)?.add(&b.scale(1.0 - w)?)
}

/// Component PGFs of the ARQ policies.
#[derive(Debug, Clone)]
pub struct AgeComponents {
    /// Frames from a departure to the next arrival.
    pub inter_arrival: Rational,
    /// Service time.
    pub service: Rational,
    /// Service time given that no packet arrives during it.
    pub service_idle: Rational,
    /// Service time given that a packet arrives during it.
    pub service_busy: Rational,
}

impl AgeComponents {
    pub fn new(eps_frame: f64, q: &QueueConfig) -> Result<Self> {
        let empty = q.empty_frame_prob();
        let inter_arrival = geometric_pgf(1.0 - empty)?;
        let service = geometric_pgf(1.0 - eps_frame)?;
        let service_idle = geometric_pgf(1.0 - eps_frame * empty)?;
        let service_busy = s_inverse(&service.mul(&service_idle)?)?;
        Ok(Self { inter_arrival, service, service_idle, service_busy })
    }
}

fn validated(r: Rational) -> Result<RationalPgf> {
    RationalPgf::new(r)
}

/// Peak-age PGF of `policy` in frames.
pub fn peak_age_pgf(policy: AgePolicy, service: &ServiceModel, q: &QueueConfig) -> Result<RationalPgf> {
    if !policy.accepts(service) {
        return Err(Error::IncompatibleService { policy: policy.name().into() });
    }
    let empty = q.empty_frame_prob();
    if policy == AgePolicy::Dwt {
        let g = service.pgf();
        let a = geometric_pgf(1.0 - empty)?;
        return validated(g.rational().powi(2)?.mul(&a)?);
    }
    let eps = service.eps_frame().expect("geometric service");
    let c = AgeComponents::new(eps, q)?;
    match policy {
        AgePolicy::Ktn | AgePolicy::Ktl => {
            let chain = BufferChain::new(eps, q)?;
            let w0 = chain.idle_weight();
            let wait_busy = match policy {
                AgePolicy::Ktn => s_inverse(&c.service)?,
                _ => s_inverse(&c.service_idle)?,
            };
            let wait = mixture(w0, &Rational::constant(1.0), &wait_busy)?;
            let tail = mixture(w0, &c.service_idle.mul(&c.inter_arrival)?, &c.service_busy)?;
            validated(wait.mul(&c.service)?.mul(&tail)?)
        }
        AgePolicy::LcfsS => {
            if !(eps < 1.0) {
                return Err(Error::DegenerateChain);
            }
            let p_del = (1.0 - eps) / (1.0 - eps * empty);
            let gap = s_inverse(&c.inter_arrival.mul(&c.service_idle)?)?;
            let retries = Rational::constant(1.0).sub(&c.service_idle.scale(1.0 - p_del)?)?;
            validated(gap.mul(&c.service_idle.scale(p_del)?.div(&retries)?)?)
        }
        AgePolicy::Dwt => unreachable!(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AgeAnalysis {
    #[serde(skip)]
    pub peak_age_pgf: RationalPgf,
    pub ccdf: TailCurve,
    pub threshold: i64,
    pub p_av: f64,
}

/// `P_av(a0) = P[Π >= ⌈a0/n⌉] + ε_u`, clipped to `[0, 1]`.
pub fn age_violation(
    pgf: &RationalPgf,
    a0: u64,
    q: &QueueConfig,
    eps_undetected: f64,
    method: DelayMethod,
) -> Result<AgeAnalysis> {
    check(a0 >= 1, || "age threshold must be at least 1".into())?;
    check((0.0..=1.0).contains(&eps_undetected), || {
        format!("undetected error probability {eps_undetected} must lie in [0, 1]")
    })?;
    let threshold = q.frames_for(a0);
    let (ccdf, tail) = tail_at(pgf, threshold, method)?;
    Ok(AgeAnalysis {
        peak_age_pgf: pgf.clone(),
        ccdf,
        threshold,
        p_av: (tail + eps_undetected).clamp(0.0, 1.0),
    })
}

/// `P[T_1 + ... + T_m >= y]` for i.i.d. `T_i ~ Geom(1-ε)` on `{1, 2, ...}`.
pub fn sum_of_geometric_tail(m: u64, y: i64, eps: f64) -> f64 {
    if y <= m as i64 {
        return 1.0;
    }
    let trials = (y - 1) as u64;
    if eps == 0.0 {
        return 0.0;
    }
    // fewer than m successes in the first y-1 frames
    let (ls, lf) = ((1.0 - eps).ln(), eps.ln());
    let total: f64 =
        (0..m).map(|i| (ln_binomial(trials, i) + i as f64 * ls + (trials - i) as f64 * lf).exp()).sum();
    total.min(1.0)
}

/// `lim_{λ→1} P[Π >= ⌈a0/n⌉]` for ARQ service with frame error probability `eps_frame`.
pub fn high_rate_limit(policy: AgePolicy, eps_frame: f64, a0: u64, n: usize) -> Result<f64> {
    check((0.0..1.0).contains(&eps_frame), || {
        format!("frame error probability {eps_frame} must lie in [0, 1)")
    })?;
    check(n >= 1 && a0 >= 1, || "frame size and age threshold must be at least 1".into())?;
    let x = a0.div_ceil(n as u64) as i64;
    let (m, y) = match policy {
        AgePolicy::Dwt => (2, x - 1),
        AgePolicy::Ktn => (3, x + 1),
        AgePolicy::Ktl => (2, x),
        AgePolicy::LcfsS => (1, x - 1),
    };
    Ok(sum_of_geometric_tail(m, y, eps_frame))
}
