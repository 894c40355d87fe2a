use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Sorted sample table with piecewise-linear interpolation. Evaluation
/// outside `[min, max]` is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Table {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Table> {
        if xs.len() != ys.len() {
            return Err(Error::Table(format!(
                "abscissa and value columns differ in length ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::Table("at least two samples are required".into()));
        }
        if let Some(i) = xs.iter().chain(&ys).position(|v| !v.is_finite()) {
            return Err(Error::Table(format!(
                "non-finite entry at index {}",
                i % xs.len()
            )));
        }
        if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Table(format!(
                "abscissae must be strictly increasing (row {} -> {})",
                i,
                i + 1
            )));
        }
        Ok(Table { xs, ys })
    }

    /// Reads a two-column CSV with a header row.
    pub fn from_csv(path: &Path) -> Result<Table> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Table> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in text.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::Table(format!(
                    "line {}: expected two columns",
                    lineno + 1
                )));
            };
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Table(format!("line {}: bad number `{s}`", lineno + 1)))
            };
            xs.push(parse(a)?);
            ys.push(parse(b)?);
        }
        Table::new(xs, ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.xs[0]
    }

    pub fn max(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub fn eval(&self, v: f64) -> Result<f64> {
        let (lo, hi) = (self.min(), self.max());
        // Grid nodes computed as k*T/K can overshoot the table end by an ulp.
        let slack = 1e-12 * (hi - lo);
        if !(v >= lo - slack && v <= hi + slack) {
            return Err(Error::Extrapolation {
                value: v,
                min: lo,
                max: hi,
            });
        }
        let v = v.clamp(lo, hi);
        let i = match self.xs.partition_point(|&x| x <= v) {
            0 => 0,
            n if n >= self.xs.len() => self.xs.len() - 2,
            n => n - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let w = (v - x0) / (x1 - x0);
        Ok(self.ys[i] + w * (self.ys[i + 1] - self.ys[i]))
    }
}
