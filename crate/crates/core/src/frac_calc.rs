//! Discrete Caputo derivative (L1 scheme) and Riemann–Liouville integral
//! (product trapezoid) on uniform time grids.

use crate::error::{Error, Result};
use crate::expr::DataFn;
use crate::special::{gamma, rgamma};

/// Uniform grid `t_k = k T / K`, `k = 0..=K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<TimeGrid> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "horizon T = {horizon} must be positive"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Step count `K`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.tau()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.node(k)).collect()
    }
}

/// Samples `v_0..v_K` on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<TimeSeries> {
        if values.len() != grid.steps() + 1 {
            return Err(Error::GridMismatch {
                expected: grid.steps() + 1,
                actual: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite sample {} at t = {}",
                values[k],
                grid.node(k)
            )));
        }
        Ok(TimeSeries { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<TimeSeries> {
        TimeSeries::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn sample(grid: TimeGrid, f: &DataFn) -> Result<TimeSeries> {
        TimeSeries::new(grid, f.sample(&grid.nodes())?)
    }

    pub fn zeros(grid: TimeGrid) -> TimeSeries {
        TimeSeries {
            grid,
            values: vec![0.0; grid.steps() + 1],
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn from_parts(grid: TimeGrid, values: Vec<f64>) -> TimeSeries {
        debug_assert_eq!(values.len(), grid.steps() + 1);
        TimeSeries { grid, values }
    }
}

fn check_caputo_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Caputo order alpha = {alpha} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// L1 scheme. The value at `t_0` is 0.
pub fn caputo_l1(series: &TimeSeries, alpha: f64) -> Result<TimeSeries> {
    check_caputo_order(alpha)?;
    let v = series.values();
    let k_max = v.len() - 1;
    let one_minus = 1.0 - alpha;
    let b: Vec<f64> = (0..k_max)
        .map(|j| ((j + 1) as f64).powf(one_minus) - (j as f64).powf(one_minus))
        .collect();
    let diffs: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = series.grid().tau().powf(-alpha) * rgamma(2.0 - alpha);
    let mut out = vec![0.0; k_max + 1];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        // Σ_j b_j (v_{k-j} - v_{k-j-1})
        let acc: f64 = (0..k).map(|j| b[j] * diffs[k - j - 1]).sum();
        *o = scale * acc;
    }
    Ok(TimeSeries::from_parts(series.grid(), out))
}

/// `I^α` for `α ∈ (0, 1]`.
pub fn rl_integral(series: &TimeSeries, alpha: f64) -> Result<TimeSeries> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "integral order alpha = {alpha} must lie in (0, 1]"
        )));
    }
    fractional_integral(series, alpha)
}

/// Product-trapezoid `I^μ` for any order `μ > 0`; exact for piecewise-linear
/// data.
pub fn fractional_integral(series: &TimeSeries, mu: f64) -> Result<TimeSeries> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "integral order {mu} must be positive"
        )));
    }
    let v = series.values();
    let k_max = v.len() - 1;
    let p = mu + 1.0;
    let pw: Vec<f64> = (0..=k_max + 1).map(|j| (j as f64).powf(p)).collect();
    // Interior weights depend only on k - j.
    let inner: Vec<f64> = (0..=k_max)
        .map(|d| {
            if d == 0 {
                1.0
            } else {
                pw[d + 1] - 2.0 * pw[d] + pw[d - 1]
            }
        })
        .collect();
    let scale = series.grid().tau().powf(mu) / gamma(mu + 2.0);
    let mut out = vec![0.0; k_max + 1];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        let first = pw[k - 1] - (kf - 1.0 - mu) * kf.powf(mu);
        let mut acc = first * v[0];
        for j in 1..=k {
            acc += inner[k - j] * v[j];
        }
        *o = scale * acc;
    }
    Ok(TimeSeries::from_parts(series.grid(), out))
}

/// `I^{1-α} f = f(0) t^{1-α}/Γ(2-α) + I^{2-α} f'`, i.e. the Caputo
/// derivative of an antiderivative of `f`, from `f` and `f'`.
pub fn caputo_from_derivative(
    f: &DataFn,
    df: &DataFn,
    grid: TimeGrid,
    alpha: f64,
) -> Result<TimeSeries> {
    check_caputo_order(alpha)?;
    let f0 = f.eval(0.0)?;
    let slope = TimeSeries::sample(grid, df)?;
    let tail = fractional_integral(&slope, 2.0 - alpha)?;
    let r = rgamma(2.0 - alpha);
    let values = grid
        .nodes()
        .iter()
        .zip(tail.values())
        .map(|(t, i)| f0 * t.powf(1.0 - alpha) * r + i)
        .collect();
    TimeSeries::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(k: usize) -> TimeGrid {
        TimeGrid::new(1.0, k).unwrap()
    }

    #[test]
    fn grid_nodes() {
        let g = TimeGrid::new(2.0, 4).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn series_checks() {
        let g = grid(3);
        assert!(matches!(
            TimeSeries::new(g, vec![0.0; 3]),
            Err(Error::GridMismatch { .. })
        ));
        assert!(TimeSeries::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn caputo_of_constant_is_zero() {
        let s = TimeSeries::from_fn(grid(50), |_| 3.5).unwrap();
        let d = caputo_l1(&s, 0.4).unwrap();
        assert!(d.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn caputo_of_linear_is_exact() {
        let alpha = 0.5;
        let s = TimeSeries::from_fn(grid(100), |t| t).unwrap();
        let d = caputo_l1(&s, alpha).unwrap();
        for (t, v) in s.grid().nodes().iter().zip(d.values()) {
            let exact = t.powf(1.0 - alpha) / gamma(2.0 - alpha);
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn order_checks() {
        let s = TimeSeries::zeros(grid(4));
        assert!(caputo_l1(&s, 1.0).is_err());
        assert!(caputo_l1(&s, 0.0).is_err());
        assert!(rl_integral(&s, 1.0).is_ok());
        assert!(rl_integral(&s, 1.5).is_err());
    }

    #[test]
    fn integral_of_constant() {
        let s = TimeSeries::from_fn(grid(40), |_| 1.0).unwrap();
        let alpha = 0.3;
        let i = rl_integral(&s, alpha).unwrap();
        for (t, v) in s.grid().nodes().iter().zip(i.values()) {
            assert!((v - t.powf(alpha) / gamma(alpha + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_order_is_trapezoid() {
        let s = TimeSeries::from_fn(grid(10), |t| t * t).unwrap();
        let i = rl_integral(&s, 1.0).unwrap();
        let tau = 0.1;
        let mut acc = 0.0;
        for k in 1..=10 {
            acc += 0.5 * tau * (s.values()[k] + s.values()[k - 1]);
            assert!((i.values()[k] - acc).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_form_constant() {
        let alpha = 0.6;
        let f = DataFn::constant(2.0);
        let df = DataFn::constant(0.0);
        let r = caputo_from_derivative(&f, &df, grid(20), alpha).unwrap();
        for (t, v) in r.grid().nodes().iter().zip(r.values()) {
            assert!((v - 2.0 * t.powf(1.0 - alpha) / gamma(2.0 - alpha)).abs() < 1e-13);
        }
    }
}
