use rand::Rng;

use crate::error::{check, Error, Result};
use crate::pgf::{Polynomial, RationalPgf};

/// Distribution of the number of frames `τ ≥ 1` needed to deliver a packet.
#[derive(Debug, Clone, PartialEq)]
pub enum ServiceKind {
    /// ARQ: each frame fails independently with probability `eps_frame`.
    Geometric { eps_frame: f64 },
    /// `pmf[j] = P[τ = j + 1]`.
    Empirical { pmf: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceModel {
    pub kind: ServiceKind,
    pub eps_undetected: f64,
}

/// ARQ with perfect error detection.
pub fn arq_service_model(eps_frame: f64) -> Result<ServiceModel> {
    ServiceModel::geometric(eps_frame)
}

impl ServiceModel {
    pub fn geometric(eps_frame: f64) -> Result<Self> {
        check((0.0..1.0).contains(&eps_frame), || {
            format!("frame error probability {eps_frame} must lie in [0, 1)")
        })?;
        Ok(Self { kind: ServiceKind::Geometric { eps_frame }, eps_undetected: 0.0 })
    }

    pub fn empirical(pmf: Vec<f64>, eps_undetected: f64) -> Result<Self> {
        check(!pmf.is_empty(), || "empty service pmf".into())?;
        check(pmf.iter().all(|p| (0.0..=1.0 + 1e-12).contains(p)), || {
            "service pmf entries must lie in [0, 1]".into()
        })?;
        check((0.0..=1.0).contains(&eps_undetected), || {
            format!("undetected error probability {eps_undetected} must lie in [0, 1]")
        })?;
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Normalization { sum });
        }
        Ok(Self { kind: ServiceKind::Empirical { pmf }, eps_undetected })
    }

    /// `τ ≡ frames`
    pub fn deterministic(frames: usize) -> Result<Self> {
        check(frames >= 1, || "service takes at least one frame".into())?;
        let mut pmf = vec![0.0; frames];
        pmf[frames - 1] = 1.0;
        Self::empirical(pmf, 0.0)
    }

    pub fn is_geometric(&self) -> bool {
        matches!(self.kind, ServiceKind::Geometric { .. })
    }

    pub fn eps_frame(&self) -> Option<f64> {
        match self.kind {
            ServiceKind::Geometric { eps_frame } => Some(eps_frame),
            ServiceKind::Empirical { .. } => None,
        }
    }

    pub fn pgf(&self) -> RationalPgf {
        match &self.kind {
            ServiceKind::Geometric { eps_frame } => {
                RationalPgf::geometric(*eps_frame).expect("validated on construction")
            }
            ServiceKind::Empirical { pmf } => {
                let mut coeffs = vec![0.0];
                coeffs.extend_from_slice(pmf);
                let total: f64 = pmf.iter().sum();
                RationalPgf::from_polynomials(Polynomial::new(coeffs), Polynomial::constant(total))
                    .expect("validated on construction")
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            ServiceKind::Geometric { eps_frame } => 1.0 / (1.0 - eps_frame),
            ServiceKind::Empirical { pmf } => pmf.iter().enumerate().map(|(j, p)| (j + 1) as f64 * p).sum(),
        }
    }

    /// `P[τ >= t]`
    pub fn tail_ge(&self, t: usize) -> f64 {
        if t <= 1 {
            return 1.0;
        }
        match &self.kind {
            ServiceKind::Geometric { eps_frame } => eps_frame.powi(t as i32 - 1),
            ServiceKind::Empirical { pmf } => pmf.iter().skip(t - 1).sum::<f64>().clamp(0.0, 1.0),
        }
    }

    /// Largest possible service time, if bounded.
    pub fn max_frames(&self) -> Option<usize> {
        match &self.kind {
            ServiceKind::Geometric { eps_frame } if *eps_frame == 0.0 => Some(1),
            ServiceKind::Geometric { .. } => None,
            ServiceKind::Empirical { pmf } => Some(pmf.iter().rposition(|&p| p > 0.0).map_or(1, |j| j + 1)),
        }
    }

    pub fn sampler(&self) -> ServiceSampler {
        match &self.kind {
            ServiceKind::Geometric { eps_frame } => ServiceSampler::Geometric {
                log_eps: if *eps_frame > 0.0 { eps_frame.ln() } else { f64::NEG_INFINITY },
            },
            ServiceKind::Empirical { pmf } => {
                let mut acc = 0.0;
                let mut cdf: Vec<f64> = pmf
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                if let Some(last) = cdf.last_mut() {
                    *last = f64::INFINITY;
                }
                ServiceSampler::Table { cdf }
            }
        }
    }
}

/// Draws service times in frames.
#[derive(Debug, Clone)]
pub enum ServiceSampler {
    Geometric { log_eps: f64 },
    Table { cdf: Vec<f64> },
}

impl ServiceSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            ServiceSampler::Geometric { log_eps } => {
                if *log_eps == f64::NEG_INFINITY {
                    return 1;
                }
                let u = 1.0 - rng.random::<f64>();
                1 + (u.ln() / log_eps).floor() as u64
            }
            ServiceSampler::Table { cdf } => {
                let u = rng.random::<f64>();
                1 + cdf.partition_point(|&c| c <= u) as u64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgf::{invert_ccdf, pgf_mean};
    use crate::rng::substream;

    #[test]
    fn geometric_models() {
        let s = arq_service_model(0.0).unwrap();
        assert_eq!(s.mean(), 1.0);
        assert_eq!(s.pgf().eval(0.4).unwrap(), 0.4);
        let h = arq_service_model(0.5).unwrap();
        assert_eq!(h.mean(), 2.0);
        let t = invert_ccdf(&h.pgf(), 20).unwrap();
        for (j, v) in t.values.iter().enumerate() {
            assert!((v - 0.5f64.powi(j as i32)).abs() < 1e-15);
        }
        assert!(arq_service_model(1.0).is_err());
        assert!(arq_service_model(-0.1).is_err());
    }

    #[test]
    fn empirical_model() {
        let s = ServiceModel::empirical(vec![0.5, 0.25, 0.25], 0.01).unwrap();
        assert!((s.mean() - 1.75).abs() < 1e-15);
        assert!((pgf_mean(&s.pgf()).unwrap() - 1.75).abs() < 1e-12);
        assert_eq!(s.tail_ge(3), 0.25);
        assert_eq!(s.max_frames(), Some(3));
        assert!(ServiceModel::empirical(vec![0.5, 0.4], 0.0).is_err());
    }

    #[test]
    fn samplers_match_distribution() {
        let mut rng = substream(11, 0);
        let geo = arq_service_model(0.3).unwrap().sampler();
        let n = 200_000;
        let mean = (0..n).map(|_| geo.sample(&mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - 1.0 / 0.7).abs() < 0.01);
        let table = ServiceModel::empirical(vec![0.2, 0.0, 0.8], 0.0).unwrap().sampler();
        let draws: Vec<u64> = (0..n).map(|_| table.sample(&mut rng)).collect();
        assert!(draws.iter().all(|&d| d == 1 || d == 3));
        let ones = draws.iter().filter(|&&d| d == 1).count() as f64 / n as f64;
        assert!((ones - 0.2).abs() < 0.005);
    }
}
