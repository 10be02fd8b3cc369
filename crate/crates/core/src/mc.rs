use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Monte Carlo estimate with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub half_width: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Standard error `half_width / z_{0.975}`.
    pub fn std_err(&self) -> f64 {
        self.half_width / Z95
    }
}

/// Running sums for a sample mean.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.sum / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.sum / n;
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    pub fn estimate(&self, seed: u64) -> McEstimate {
        let se = (self.variance() / self.n.max(1) as f64).sqrt();
        McEstimate { value: self.mean(), half_width: Z95 * se, samples: self.n, seed }
    }
}

/// Merges per-chunk moments in chunk order.
pub fn merge_all<'a, I: IntoIterator<Item = &'a Moments>>(parts: I) -> Moments {
    let mut total = Moments::default();
    for p in parts {
        total.merge(p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_small_sample() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
        let e = m.estimate(3);
        assert!((e.half_width - Z95 * (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
    }
}
