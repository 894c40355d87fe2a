//! Spectral solution of the direct problem with product-integrated source
//! convolution.
//!
//! Each mode obeys `∂_t^α u_n + λ_n u_n = h_n f(t)`, whose solution is
//! `u_n = φ_n E_{α,1}(-λ_n t^α) + h_n ∫_0^t f(s) (t-s)^{α-1} E_{α,α}(-λ_n (t-s)^α) ds`.
//! With `f` constant on each panel the kernel integrates in closed form:
//! `∫_a^b (t-s)^{α-1} E_{α,α}(-λ(t-s)^α) ds = [E_{α,1}(-λ(t-b)^α) - E_{α,1}(-λ(t-a)^α)] / λ`.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frac_calc::{TimeGrid, TimeSeries};
use crate::mittag_leffler::ml_on_grid;
use crate::problem::{Mode, ProblemSpec, Setup};
use crate::special::rgamma;
use crate::sturm_liouville::SpectralBasis;

/// `E_{α,1}(-λ_n (mτ)^α)` for every mode, `m = 0..=K`.
#[derive(Debug, Clone)]
pub struct RelaxationTable {
    pub alpha: f64,
    pub grid: TimeGrid,
    rows: Vec<Vec<f64>>,
}

impl RelaxationTable {
    pub fn new(alpha: f64, lambdas: &[f64], grid: TimeGrid) -> Result<RelaxationTable> {
        let rows = lambdas
            .par_iter()
            .map(|&lam| ml_on_grid(alpha, 1.0, lam, grid.tau(), grid.steps()))
            .collect::<Result<Vec<_>>>()?;
        Ok(RelaxationTable { alpha, grid, rows })
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    pub fn modes(&self) -> usize {
        self.rows.len()
    }
}

/// Lag-indexed panel weights: the panel `[t_j, t_{j+1}]` seen from `t_k`
/// carries `w[k - j]`. `w[0]` is unused and zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionWeights {
    pub lambda: f64,
    pub w: Vec<f64>,
}

// Below this value of λ T^α the divided difference of E_{α,1} loses digits;
// the truncated power series is used instead.
const SMALL_LAMBDA: f64 = 1e-6;

/// Weights from a precomputed relaxation row.
pub fn weights_from_row(
    lambda: f64,
    alpha: f64,
    grid: TimeGrid,
    e1: &[f64],
) -> Result<ConvolutionWeights> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue {lambda} must be finite and >= 0"
        )));
    }
    let k = grid.steps();
    let tau = grid.tau();
    let mut w = vec![0.0; k + 1];
    if lambda * grid.horizon().powf(alpha) < SMALL_LAMBDA {
        // ∫ (t-s)^{α-1}[1/Γ(α) - λ(t-s)^α/Γ(2α)] ds over the panel.
        let r1 = rgamma(alpha + 1.0);
        let r2 = rgamma(2.0 * alpha + 1.0);
        for (m, wm) in w.iter_mut().enumerate().skip(1) {
            let (a, b) = ((m - 1) as f64 * tau, m as f64 * tau);
            *wm = (b.powf(alpha) - a.powf(alpha)) * r1
                - lambda * (b.powf(2.0 * alpha) - a.powf(2.0 * alpha)) * r2;
        }
    } else {
        for m in 1..=k {
            w[m] = (e1[m - 1] - e1[m]) / lambda;
        }
    }
    Ok(ConvolutionWeights { lambda, w })
}

pub fn convolution_weights(lambda: f64, alpha: f64, grid: TimeGrid) -> Result<ConvolutionWeights> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue {lambda} must be finite and >= 0"
        )));
    }
    let e1 = ml_on_grid(alpha, 1.0, lambda, grid.tau(), grid.steps())?;
    weights_from_row(lambda, alpha, grid, &e1)
}

/// Panel averages `(f_j + f_{j+1}) / 2`, `j = 0..K-1`.
pub fn panel_means(f: &[f64]) -> Vec<f64> {
    f.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// `Σ_{j<k} w[k-j] c_j` for every `k`, with `out[0] = 0`.
pub fn lagged_convolution(w: &[f64], c: &[f64]) -> Vec<f64> {
    let k_max = c.len();
    (0..=k_max)
        .map(|k| (0..k).map(|j| w[k - j] * c[j]).sum())
        .collect()
}

/// One mode: `u(t_k) = φ_n E1[k] + h_n Σ_j w[k-j] f̄_j`.
pub fn mode_evolution(
    phi_n: f64,
    h_n: f64,
    e1: &[f64],
    weights: &ConvolutionWeights,
    f: &TimeSeries,
) -> Result<TimeSeries> {
    let grid = f.grid();
    if e1.len() != f.len() || weights.w.len() != f.len() {
        return Err(Error::GridMismatch {
            expected: f.len(),
            actual: e1.len().min(weights.w.len()),
        });
    }
    let conv = lagged_convolution(&weights.w, &panel_means(f.values()));
    let values = e1
        .iter()
        .zip(&conv)
        .map(|(e, c)| phi_n * e + h_n * c)
        .collect();
    TimeSeries::new(grid, values)
}

/// Mode amplitudes with lazily reconstructed field.
#[derive(Debug)]
pub struct DirectSolution {
    basis: SpectralBasis,
    time: TimeGrid,
    amplitudes: Vec<Vec<f64>>,
    field: OnceLock<Vec<Vec<f64>>>,
}

impl DirectSolution {
    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn time(&self) -> TimeGrid {
        self.time
    }

    /// `u_n(t_k)`, one row per mode.
    pub fn amplitudes(&self) -> &[Vec<f64>] {
        &self.amplitudes
    }

    /// `u(t_k, x_i)`, one row per time node, boundary columns included.
    pub fn field(&self) -> &[Vec<f64>] {
        self.field.get_or_init(|| {
            (0..=self.time.steps())
                .into_par_iter()
                .map(|k| {
                    let coeffs: Vec<f64> = self.amplitudes.iter().map(|row| row[k]).collect();
                    self.basis.synthesize(&coeffs)
                })
                .collect()
        })
    }

    pub fn observe(&self, h: &[f64]) -> Result<TimeSeries> {
        observe(&self.amplitudes, h, self.time)
    }
}

/// `g(t_k) = Σ_n h_n u_n(t_k)`.
pub fn observe(amplitudes: &[Vec<f64>], h: &[f64], time: TimeGrid) -> Result<TimeSeries> {
    if amplitudes.len() != h.len() {
        return Err(Error::GridMismatch {
            expected: amplitudes.len(),
            actual: h.len(),
        });
    }
    let mut g = vec![0.0; time.steps() + 1];
    for (row, hn) in amplitudes.iter().zip(h) {
        g.iter_mut().zip(row).for_each(|(gk, u)| *gk += hn * u);
    }
    TimeSeries::new(time, g)
}

/// Spectral solve for the source factor samples `f` on the setup's grid.
pub fn solve_direct(
    setup: &Setup,
    table: &RelaxationTable,
    f: &TimeSeries,
) -> Result<DirectSolution> {
    let time = setup.time;
    if f.len() != time.steps() + 1 {
        return Err(Error::GridMismatch {
            expected: time.steps() + 1,
            actual: f.len(),
        });
    }
    let c = &setup.coeffs;
    let amplitudes = (0..setup.modes())
        .into_par_iter()
        .map(|n| {
            let e1 = table.row(n);
            let w = weights_from_row(c.lambdas[n], setup.alpha, time, e1)?;
            mode_evolution(c.phi[n], c.h[n], e1, &w, f).map(TimeSeries::into_values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DirectSolution {
        basis: setup.basis.clone(),
        time,
        amplitudes,
        field: OnceLock::new(),
    })
}

/// Setup, relaxation table and solution for a direct-mode spec.
pub fn run_direct(spec: &ProblemSpec) -> Result<(Setup, DirectSolution)> {
    spec.validate_shape(Some(Mode::Direct))?;
    let setup = Setup::new(spec)?;
    let f_fn = spec.f.as_ref().expect("validated");
    let f = TimeSeries::sample(setup.time, f_fn).map_err(|e| e.in_field("f"))?;
    let table = RelaxationTable::new(setup.alpha, &setup.coeffs.lambdas, setup.time)?;
    let sol = solve_direct(&setup, &table, &f)?;
    Ok((setup, sol))
}
