//! Two-parameter Mittag-Leffler function on the nonpositive real axis.
//!
//! `E_{α,β}(z) = Σ_k z^k / Γ(αk + β)` for `0 < α ≤ 1` and `z ≤ 0`.
//!
//! Evaluation is split on `s = |z|^{1/α}`, which controls both the growth of
//! the Taylor terms (roughly `e^s`) and the accuracy of the optimally
//! truncated asymptotic series (roughly `e^{-s}`):
//!
//! * `s ≤ 6`: Taylor series with compensated summation.
//! * `s ≥ 50`: algebraic asymptotic series `-Σ_{k≥1} z^{-k}/Γ(β-αk)`.
//! * otherwise: the real-axis integral representation
//!
//!   `E_{α,β}(-x) = 1/(απ) ∫_0^∞ r^{(1-β)/α} e^{-r^{1/α}}
//!       (r sin(π(1-β)) + x sin(π(1-β+α))) / (r² + 2rx cos(πα) + x²) dr`,
//!
//!   valid for `β < 1+α`; larger `β` is lowered with
//!   `E_{α,β}(z) = (E_{α,β-α}(z) - 1/Γ(β-α)) / z`.
//!
//! `α = 1` goes through Kummer's transformation,
//! `E_{1,β}(-x) = e^{-x} M(β-1; β; x) / Γ(β)`, whose series has terms of one
//! sign for `x ≥ 0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special::{ln_gamma, rgamma, sinpi};

/// Upper end of the Taylor-series region in `s = |z|^{1/α}`.
pub const SERIES_LIMIT: f64 = 6.0;
/// Lower end of the asymptotic region in `s = |z|^{1/α}`.
pub const ASYMPTOTIC_LIMIT: f64 = 50.0;

/// Which evaluation route `ml` takes for a given query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Origin,
    Exponential,
    Series,
    Integral,
    Asymptotic,
}

fn check(alpha: f64, beta: f64, z: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Unsupported(format!(
            "alpha = {alpha} outside (0, 1]"
        )));
    }
    if !beta.is_finite() {
        return Err(Error::Unsupported(format!("beta = {beta} is not finite")));
    }
    if z.is_nan() || z > 0.0 {
        return Err(Error::Unsupported(format!(
            "z = {z}: only z <= 0 is supported"
        )));
    }
    Ok(())
}

/// Route selection, exposed for diagnostics and tests.
pub fn route(alpha: f64, beta: f64, z: f64) -> Result<Route> {
    check(alpha, beta, z)?;
    if z == 0.0 {
        return Ok(Route::Origin);
    }
    if alpha == 1.0 {
        return Ok(Route::Exponential);
    }
    let s = (-z).powf(1.0 / alpha);
    Ok(if s <= SERIES_LIMIT {
        Route::Series
    } else if s >= ASYMPTOTIC_LIMIT {
        Route::Asymptotic
    } else {
        Route::Integral
    })
}

/// `E_{α,β}(z)` for `α ∈ (0, 1]`, real `β`, `z ≤ 0`.
pub fn ml(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    Ok(match route(alpha, beta, z)? {
        Route::Origin => rgamma(beta),
        Route::Exponential => exponential_case(beta, -z),
        Route::Series => taylor(alpha, beta, z),
        Route::Asymptotic => asymptotic(alpha, beta, z),
        Route::Integral => band(alpha, beta, -z),
    })
}

/// Matrix `E_{α,β}(-λ_n t_k^α)`, one row per `λ_n`.
pub fn ml_batch(alpha: f64, beta: f64, lambdas: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue {l} must be finite and >= 0"
        )));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "time {t} must be finite and >= 0"
        )));
    }
    check(alpha, beta, 0.0)?;
    let powers: Vec<f64> = times.iter().map(|t| t.powf(alpha)).collect();
    lambdas
        .par_iter()
        .map(|&lam| {
            powers
                .iter()
                .map(|&tp| ml(alpha, beta, -lam * tp))
                .collect()
        })
        .collect()
}

/// `E_{α,β}(-λ (mτ)^α)` for `m = 0..=steps`.
pub fn ml_on_grid(alpha: f64, beta: f64, lambda: f64, step: f64, steps: usize) -> Result<Vec<f64>> {
    (0..=steps)
        .map(|m| ml(alpha, beta, -lambda * (m as f64 * step).powf(alpha)))
        .collect()
}

/// Neumaier compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn taylor(alpha: f64, beta: f64, z: f64) -> f64 {
    let s = (-z).powf(1.0 / alpha);
    let mut acc = Compensated::default();
    let mut power = 1.0;
    for k in 0..20_000usize {
        let arg = alpha * k as f64 + beta;
        let term = power * rgamma(arg);
        acc.add(term);
        let past_peak = arg > s + 2.0;
        if past_peak && (term == 0.0 || term.abs() <= 1e-18 * acc.value().abs()) {
            break;
        }
        power *= z;
        if power == 0.0 {
            break;
        }
    }
    acc.value()
}

fn asymptotic(alpha: f64, beta: f64, z: f64) -> f64 {
    let inv = 1.0 / z;
    let ln_abs_z = (-z).ln();
    let mut power = 1.0;
    let mut acc = Compensated::default();
    let mut last = f64::INFINITY;
    for k in 1..4_000usize {
        power *= inv;
        let arg = beta - alpha * k as f64;
        // Truncate on the smooth envelope of |z^{-k}/Γ(β-αk)|; the terms
        // themselves dip near the poles of Γ.
        let ln_env = -(k as f64) * ln_abs_z
            + if arg < 0.5 {
                ln_gamma(1.0 - arg) - std::f64::consts::PI.ln()
            } else {
                -ln_gamma(arg)
            };
        if ln_env > last {
            break;
        }
        last = ln_env;
        acc.add(-power * rgamma(arg));
        if ln_env < (1e-18 * acc.value().abs()).ln() {
            break;
        }
    }
    acc.value()
}

fn band(alpha: f64, beta: f64, x: f64) -> f64 {
    if beta >= 1.0 + alpha {
        let lower = beta - alpha;
        return (band(alpha, lower, x) - rgamma(lower)) / (-x);
    }
    integral_representation(alpha, beta, x)
}

fn integral_representation(alpha: f64, beta: f64, x: f64) -> f64 {
    let a = sinpi(1.0 - beta);
    let b = sinpi(1.0 - beta + alpha);
    let c = (std::f64::consts::PI * alpha).cos();
    let inv_alpha = 1.0 / alpha;
    // r = u^{1/(γ+1)} absorbs the r^γ endpoint factor.
    let gp1 = (1.0 - beta) / alpha + 1.0;
    let inv_gp1 = 1.0 / gp1;
    let phi = |u: f64| {
        if u <= 0.0 {
            return b / x;
        }
        let r = u.powf(inv_gp1);
        let num = r * a + x * b;
        let den = r * r + 2.0 * r * x * c + x * x;
        (-r.powf(inv_alpha)).exp() * num / den
    };

    let r_max = 95f64.powf(alpha);
    let mut r_points = vec![0.0, x.min(r_max), r_max];
    if c < 0.0 {
        let peak = -c * x;
        let width = (x * sinpi(alpha)).max(1e-12 * x);
        for k in [-8.0, -2.0, -0.5, 0.0, 0.5, 2.0, 8.0] {
            r_points.push(peak + k * width);
        }
    }
    let mut points: Vec<f64> = r_points
        .into_iter()
        .filter(|r| *r >= 0.0 && *r <= r_max)
        .map(|r| r.powf(gp1))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let res = quadrature::integrate(phi, &points, 1e-300, 1e-14, 4_000);
    debug_assert!(
        res.converged,
        "ML quadrature: alpha={alpha} beta={beta} x={x} {res:?}"
    );
    res.value * inv_gp1 / (alpha * std::f64::consts::PI)
}

fn exponential_case(beta: f64, x: f64) -> f64 {
    if beta == 1.0 {
        return (-x).exp();
    }
    if beta <= 0.0 && beta == beta.floor() {
        // Σ_{k ≥ 1-β} z^k/(k+β-1)! = z^{1-β} e^z
        return (-x).powi((1.0 - beta) as i32) * (-x).exp();
    }
    if x > 700.0 {
        return asymptotic(1.0, beta, -x);
    }
    // Poisson weights p_k = e^{-x} x^k / k!, times (β-1)/(β-1+k).
    let a = beta - 1.0;
    let mut acc = Compensated::default();
    let mut p = if x == 0.0 { 1.0 } else { (-x).exp() };
    let log_start = p == 0.0;
    for k in 0..100_000usize {
        let kf = k as f64;
        if log_start {
            p = (-x + kf * x.ln() - ln_gamma(kf + 1.0)).exp();
        } else if k > 0 {
            p *= x / kf;
        }
        let term = p * a / (a + kf);
        acc.add(term);
        if kf > x + 10.0 && term.abs() <= 1e-18 * acc.value().abs() {
            break;
        }
    }
    acc.value() * rgamma(beta)
}
