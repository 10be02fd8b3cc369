//! RFC-4180 CSV with a provenance comment line.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Ten significant digits in scientific notation.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.9e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn text(s: &str) -> String {
    if s.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, footer: &Provenance) -> String {
        let mut out = String::new();
        let line = |cells: Vec<String>| cells.join(",") + "\r\n";
        out.push_str(&line(self.header.iter().map(|h| text(h)).collect()));
        for row in &self.rows {
            out.push_str(&line(
                row.iter()
                    .map(|c| match c {
                        Cell::Int(i) => i.to_string(),
                        Cell::Real(x) => real(*x),
                        Cell::Text(s) => text(s),
                        Cell::Empty => String::new(),
                    })
                    .collect(),
            ));
        }
        let _ = write!(
            out,
            "# urllc-lab {} seed={} samples={}\r\n",
            env!("CARGO_PKG_VERSION"),
            footer.seed,
            footer.samples
        );
        out
    }
}

/// What the provenance footer reports.
#[derive(Debug, Clone, Copy, Default)]
pub struct Provenance {
    pub seed: u64,
    /// Monte Carlo samples or simulated events behind the numbers; 0 if none.
    pub samples: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(real(1e-3), "1.000000000e-3");
        assert_eq!(real(0.123456789012), "1.234567890e-1");
        assert_eq!(real(0.0), "0.000000000e0");
    }

    #[test]
    fn quoting_and_footer() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Text("x,\"y\"".into()), Cell::Int(3)]);
        let s = t.render(&Provenance { seed: 7, samples: 10 });
        assert_eq!(s, "a,b\r\n\"x,\"\"y\"\"\",3\r\n# urllc-lab 0.1.0 seed=7 samples=10\r\n");
    }
}
