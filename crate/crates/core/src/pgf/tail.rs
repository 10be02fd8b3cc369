use serde::Serialize;

/// How a tail curve was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    /// Coefficient recursion on the expanded rational form.
    ExactRecursion,
    /// Power-series expansion of the structured form.
    PowerSeries,
    Saddlepoint,
    Simulation,
}

impl TailMethod {
    pub fn name(self) -> &'static str {
        match self {
            TailMethod::ExactRecursion => "exact_recursion",
            TailMethod::PowerSeries => "power_series",
            TailMethod::Saddlepoint => "saddlepoint",
            TailMethod::Simulation => "simulation",
        }
    }
}

/// `values[i] = P[X > start_index + i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCurve {
    pub start_index: i64,
    pub values: Vec<f64>,
    pub method: TailMethod,
    pub half_widths: Option<Vec<f64>>,
}

impl TailCurve {
    /// Clips to `[0, 1]` and makes the values non-increasing.
    pub fn new(start_index: i64, mut values: Vec<f64>, method: TailMethod) -> Self {
        let mut running = 1.0_f64;
        for v in values.iter_mut() {
            running = running.min(v.clamp(0.0, 1.0));
            *v = running;
        }
        Self { start_index, values, method, half_widths: None }
    }

    pub fn with_half_widths(mut self, hw: Vec<f64>) -> Self {
        self.half_widths = Some(hw);
        self
    }

    /// `P[X > k]`, extended by 1 below the grid and by the last value above it.
    pub fn exceeds(&self, k: i64) -> f64 {
        if k < self.start_index {
            return 1.0;
        }
        let i = (k - self.start_index) as usize;
        match self.values.get(i) {
            Some(&v) => v,
            None => self.values.last().copied().unwrap_or(0.0),
        }
    }

    /// `P[X >= d]`
    pub fn at_least(&self, d: i64) -> f64 {
        self.exceeds(d - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `P[X = k]` for `k >= start_index`; the first entry lumps all `k <= start_index`.
    pub fn pmf(&self) -> Vec<f64> {
        let mut prev = self.exceeds(self.start_index - 1);
        self.values
            .iter()
            .map(|&v| {
                let p = prev - v;
                prev = v;
                p
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enforces_monotone_unit_interval() {
        let t = TailCurve::new(0, vec![1.2, 0.5, 0.6, -0.1], TailMethod::Simulation);
        assert_eq!(t.values, vec![1.0, 0.5, 0.5, 0.0]);
        assert_eq!(t.at_least(0), 1.0);
        assert_eq!(t.at_least(2), 0.5);
        assert_eq!(t.exceeds(10), 0.0);
    }
}
