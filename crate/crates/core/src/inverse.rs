//! Recovery of `f(t)` from `g(t) = ∫ h u dx`.
//!
//! Projecting onto the basis gives the first-kind equation
//! `Σ_n h_n² ∫_0^t f(s)(t-s)^{α-1}E_{α,α}(-λ_n(t-s)^α) ds = G₁(t)`, with
//! `G₁ = g - Σ h_n φ_n E_{α,1}(-λ_n t^α)`. Its Caputo derivative is the
//! second-kind equation `H f(t) + ∫_0^t (t-s)^{α-1} K₀(t-s) f(s) ds = G₂(t)`,
//! `H = Σ h_n²`, `K₀ = -Σ λ_n h_n² E_{α,α}(-λ_n t^α)`, `G₂ = ∂_t^α G₁`.
//!
//! Both kernels are integrated per mode in closed form against
//! piecewise-constant `f`, so the weights depend only on the lag.

use rayon::prelude::*;

use crate::direct::{lagged_convolution, panel_means, weights_from_row, RelaxationTable};
use crate::error::{Error, Result, StageExt};
use crate::frac_calc::{caputo_from_derivative, caputo_l1, TimeGrid, TimeSeries};
use crate::mittag_leffler::ml;
use crate::problem::{CaputoMethod, Mode, ProblemSpec, Setup, SolverOptions};
use crate::sturm_liouville::energy_form;

/// Smallest admissible `H = Σ h_n²`.
pub const MIN_H_NORM2: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityReport {
    pub g0: f64,
    /// `|∫ φ h dx - g(0)|`
    pub quadrature_defect: f64,
    /// `|Σ h_n φ_n - g(0)|`
    pub series_defect: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn default_compat_tol(eps: f64, g0: f64) -> f64 {
    1e-6f64.max(2.0 * eps * g0.abs())
}

pub fn compatibility_check(setup: &Setup, g0: f64, tol: f64) -> CompatibilityReport {
    let quadrature_defect = (setup.space.inner(&setup.phi, &setup.h) - g0).abs();
    let series_defect = (setup.coeffs.h_dot_phi() - g0).abs();
    CompatibilityReport {
        g0,
        quadrature_defect,
        series_defect,
        tol,
        pass: quadrature_defect <= tol && series_defect <= tol,
    }
}

/// Truncation tails estimated from the energy and norm identities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TailBounds {
    /// `J(h) - Σ_{n≤N} λ_n h_n²`
    pub h_energy: f64,
    /// `J(φ) - Σ_{n≤N} λ_n φ_n²`
    pub phi_energy: f64,
    /// `‖h‖² - Σ_{n≤N} h_n²`
    pub h_norm: f64,
}

#[derive(Debug, Clone)]
pub struct InverseOperands {
    pub alpha: f64,
    pub grid: TimeGrid,
    pub h_norm2: f64,
    pub lambdas: Vec<f64>,
    pub h: Vec<f64>,
    pub phi: Vec<f64>,
    /// Second-kind lag weights `W[m] = -Σ h_n² (E1_n[m-1] - E1_n[m])`.
    pub kernel: Vec<f64>,
    /// First-kind lag weights `V[m] = Σ h_n² (E1_n[m-1] - E1_n[m]) / λ_n`.
    pub first_kind: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub caputo: CaputoMethod,
    /// Leading coefficient removed before the L1 step (corrected method).
    pub leading: Option<f64>,
    pub tails: TailBounds,
}

impl InverseOperands {
    /// `K₀(t) = -Σ λ_n h_n² E_{α,α}(-λ_n t^α)`.
    pub fn k0(&self, t: f64) -> Result<f64> {
        let ta = t.powf(self.alpha);
        let mut acc = 0.0;
        for (l, h) in self.lambdas.iter().zip(&self.h) {
            acc -= l * h * h * ml(self.alpha, self.alpha, -l * ta)?;
        }
        Ok(acc)
    }

    /// `Σ λ_n h_n²`.
    pub fn h_energy(&self) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.h)
            .map(|(l, h)| l * h * h)
            .sum()
    }
}

/// Centered moving average whose window shrinks symmetrically at the ends.
pub fn moving_average(v: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = v.len();
    (0..n)
        .map(|k| {
            let r = half.min(k).min(n - 1 - k);
            v[k - r..=k + r].iter().sum::<f64>() / (2 * r + 1) as f64
        })
        .collect()
}

pub fn assemble_operands(
    setup: &Setup,
    table: &RelaxationTable,
    g: &TimeSeries,
    opts: &SolverOptions,
) -> Result<InverseOperands> {
    let grid = setup.time;
    let k_max = grid.steps();
    if g.len() != k_max + 1 {
        return Err(Error::GridMismatch {
            expected: k_max + 1,
            actual: g.len(),
        });
    }
    let c = &setup.coeffs;
    let h_norm2 = c.h_norm2();
    if !(h_norm2 >= MIN_H_NORM2) {
        return Err(Error::Hypothesis {
            check: "h nonzero",
            detail: format!(
                "Σ h_n² = {h_norm2:e} is below {MIN_H_NORM2:e}; h vanishes identically"
            ),
        });
    }
    let alpha = setup.alpha;
    let g_values = match opts.prefilter {
        Some(w) if w > 1 => moving_average(g.values(), w),
        _ => g.values().to_vec(),
    };

    let mut kernel = vec![0.0; k_max + 1];
    let mut first_kind = vec![0.0; k_max + 1];
    // Σ h_n φ_n E1_n, Σ λ_n h_n φ_n E1_n, Σ h_n² E1_n
    let mut free = vec![0.0; k_max + 1];
    let mut free_rate = vec![0.0; k_max + 1];
    let mut mass = vec![0.0; k_max + 1];
    for n in 0..setup.modes() {
        let e1 = table.row(n);
        let (l, hn, pn) = (c.lambdas[n], c.h[n], c.phi[n]);
        let h2 = hn * hn;
        let w = weights_from_row(l, alpha, grid, e1)?;
        for m in 1..=k_max {
            kernel[m] -= h2 * (e1[m - 1] - e1[m]);
            first_kind[m] += h2 * w.w[m];
        }
        for k in 0..=k_max {
            free[k] += hn * pn * e1[k];
            free_rate[k] += l * hn * pn * e1[k];
            mass[k] += h2 * e1[k];
        }
    }
    let g1: Vec<f64> = g_values.iter().zip(&free).map(|(g, s)| g - s).collect();

    let mut leading = None;
    let g2 = match opts.caputo {
        CaputoMethod::L1 => {
            let dg = caputo_l1(&TimeSeries::new(grid, g_values.clone())?, alpha)?;
            dg.values()
                .iter()
                .zip(&free_rate)
                .map(|(d, s)| d + s)
                .collect()
        }
        CaputoMethod::Derivative => {
            let (Some(d1), Some(d2)) = (&opts.g_derivative, &opts.g_second_derivative) else {
                return Err(Error::Config(
                    "the derivative method needs g_derivative and g_second_derivative".into(),
                ));
            };
            let dg = caputo_from_derivative(d1, d2, grid, alpha)?;
            dg.values()
                .iter()
                .zip(&free_rate)
                .map(|(d, s)| d + s)
                .collect()
        }
        CaputoMethod::Corrected => {
            // Φ(t) = Σ h_n² (1 - E1_n(t)) / λ_n is the response to f ≡ 1 and
            // carries the t^α onset of G₁; ∂^α Φ = Σ h_n² E1_n exactly.
            let mut phi_resp = vec![0.0; k_max + 1];
            for k in 1..=k_max {
                phi_resp[k] = phi_resp[k - 1] + first_kind[k];
            }
            let c0 = g1[1] / phi_resp[1];
            leading = Some(c0);
            let rest: Vec<f64> = g1.iter().zip(&phi_resp).map(|(a, b)| a - c0 * b).collect();
            let d_rest = caputo_l1(&TimeSeries::new(grid, rest)?, alpha)?;
            d_rest
                .values()
                .iter()
                .zip(&mass)
                .map(|(d, s)| d + c0 * s)
                .collect()
        }
    };

    let tails = tail_bounds(setup)?;
    Ok(InverseOperands {
        alpha,
        grid,
        h_norm2,
        lambdas: c.lambdas.clone(),
        h: c.h.clone(),
        phi: c.phi.clone(),
        kernel,
        first_kind,
        g1,
        g2,
        caputo: opts.caputo,
        leading,
        tails,
    })
}

fn tail_bounds(setup: &Setup) -> Result<TailBounds> {
    let c = &setup.coeffs;
    let jh = energy_form(&setup.h, &setup.p_nodes, &setup.q_nodes, setup.space)?;
    let jphi = energy_form(&setup.phi, &setup.p_nodes, &setup.q_nodes, setup.space)?;
    let norm = setup.space.inner(&setup.h, &setup.h);
    Ok(TailBounds {
        h_energy: (jh - c.h_energy()).max(0.0),
        phi_energy: (jphi - c.phi_energy()).max(0.0),
        h_norm: (norm - c.h_norm2()).max(0.0),
    })
}

/// Time-marching collocation with piecewise-constant panels.
pub fn solve_second_kind(ops: &InverseOperands) -> Result<TimeSeries> {
    let k_max = ops.grid.steps();
    let w = &ops.kernel;
    let h = ops.h_norm2;
    let diag = h + 0.5 * w[1];
    let mut f = vec![0.0; k_max + 1];
    f[0] = ops.g2[0] / h;
    let mut means = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if !(diag.abs() > 1e-12 * h) {
            return Err(Error::DegenerateDiagonal {
                step: k,
                value: diag,
            });
        }
        let history: f64 = (0..k - 1).map(|j| w[k - j] * means[j]).sum();
        f[k] = (ops.g2[k] - history - 0.5 * w[1] * f[k - 1]) / diag;
        means.push(0.5 * (f[k - 1] + f[k]));
    }
    TimeSeries::new(ops.grid, f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardStatus {
    Converged,
    MaxIterations,
    NonContraction,
}

impl PicardStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PicardStatus::Converged => "converged",
            PicardStatus::MaxIterations => "max_iterations",
            PicardStatus::NonContraction => "non_contraction",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    pub f: TimeSeries,
    /// `‖f^{(m+1)} - f^{(m)}‖_∞` per iteration.
    pub trace: Vec<f64>,
    pub status: PicardStatus,
}

impl PicardResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// Ratio of the last two trace entries.
    pub fn contraction(&self) -> f64 {
        match self.trace.as_slice() {
            [.., a, b] if *a > 0.0 => b / a,
            _ => 0.0,
        }
    }
}

fn picard_step(ops: &InverseOperands, f: &[f64]) -> Vec<f64> {
    let means = panel_means(f);
    let w = &ops.kernel;
    let k_max = f.len() - 1;
    (0..k_max + 1)
        .into_par_iter()
        .with_min_len(64)
        .map(|k| {
            let conv: f64 = (0..k).map(|j| w[k - j] * means[j]).sum();
            (ops.g2[k] - conv) / ops.h_norm2
        })
        .collect()
}

/// Successive approximations `f ← (G₂ - Conv f) / H`, starting from `G₂/H`
/// unless an initial guess is given.
pub fn solve_picard(
    ops: &InverseOperands,
    max_iter: usize,
    tol: f64,
    initial: Option<&[f64]>,
) -> Result<PicardResult> {
    let k_max = ops.grid.steps();
    let mut f: Vec<f64> = match initial {
        Some(v) if v.len() == k_max + 1 => v.to_vec(),
        Some(v) => {
            return Err(Error::GridMismatch {
                expected: k_max + 1,
                actual: v.len(),
            })
        }
        None => ops.g2.iter().map(|g| g / ops.h_norm2).collect(),
    };
    let mut trace = Vec::new();
    let mut rising = 0;
    let mut status = PicardStatus::MaxIterations;
    for _ in 0..max_iter {
        let next = picard_step(ops, &f);
        let diff = next
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if let Some(&prev) = trace.last() {
            rising = if diff > prev { rising + 1 } else { 0 };
        }
        trace.push(diff);
        f = next;
        if diff <= tol {
            status = PicardStatus::Converged;
            break;
        }
        if rising >= 3 || !diff.is_finite() {
            status = PicardStatus::NonContraction;
            break;
        }
    }
    if status == PicardStatus::NonContraction {
        log::warn!("Picard iteration stopped: differences grew for 3 consecutive steps");
    }
    Ok(PicardResult {
        f: TimeSeries::from_parts(ops.grid, f),
        trace,
        status,
    })
}

fn check_series(f: &TimeSeries, ops: &InverseOperands) -> Result<()> {
    if f.len() != ops.grid.steps() + 1 {
        return Err(Error::GridMismatch {
            expected: ops.grid.steps() + 1,
            actual: f.len(),
        });
    }
    Ok(())
}

/// `max_k |Σ_j V[k-j] f̄_j - G₁(t_k)|`.
pub fn residual_first_kind(f: &TimeSeries, ops: &InverseOperands) -> Result<f64> {
    check_series(f, ops)?;
    let lhs = lagged_convolution(&ops.first_kind, &panel_means(f.values()));
    Ok(lhs
        .iter()
        .zip(&ops.g1)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `max_k |H f_k + Σ_j W[k-j] f̄_j - G₂(t_k)|`.
pub fn residual_second_kind(f: &TimeSeries, ops: &InverseOperands) -> Result<f64> {
    check_series(f, ops)?;
    let conv = lagged_convolution(&ops.kernel, &panel_means(f.values()));
    Ok(f.values()
        .iter()
        .zip(&conv)
        .zip(&ops.g2)
        .map(|((fk, c), g)| (ops.h_norm2 * fk + c - g).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone)]
pub struct InverseResult {
    pub f: TimeSeries,
    pub second_kind_residual: f64,
    pub first_kind_residual: f64,
    pub picard: PicardResult,
    /// `‖f_marching - f_picard‖_∞`
    pub solver_gap: f64,
    pub compatibility: CompatibilityReport,
    pub modes: usize,
    pub h_norm2: f64,
    pub leading: Option<f64>,
    pub tails: TailBounds,
    pub warnings: Vec<String>,
}

impl InverseResult {
    /// Named scalar diagnostics in a fixed order.
    pub fn diagnostics(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("modes".to_string(), self.modes as f64),
            ("h_norm2".into(), self.h_norm2),
            ("second_kind_residual".into(), self.second_kind_residual),
            ("first_kind_residual".into(), self.first_kind_residual),
            ("compat_g0".into(), self.compatibility.g0),
            (
                "compat_quadrature_defect".into(),
                self.compatibility.quadrature_defect,
            ),
            (
                "compat_series_defect".into(),
                self.compatibility.series_defect,
            ),
            ("compat_tol".into(), self.compatibility.tol),
            (
                "compat_pass".into(),
                if self.compatibility.pass { 1.0 } else { 0.0 },
            ),
            ("picard_iterations".into(), self.picard.iterations() as f64),
            ("picard_contraction".into(), self.picard.contraction()),
            (
                "picard_converged".into(),
                if self.picard.status == PicardStatus::Converged {
                    1.0
                } else {
                    0.0
                },
            ),
            ("picard_marching_gap".into(), self.solver_gap),
            ("tail_h_energy".into(), self.tails.h_energy),
            ("tail_phi_energy".into(), self.tails.phi_energy),
            ("tail_h_norm".into(), self.tails.h_norm),
        ];
        if let Some(c0) = self.leading {
            out.push(("leading_coefficient".into(), c0));
        }
        out.extend(
            self.picard
                .trace
                .iter()
                .enumerate()
                .map(|(i, d)| (format!("picard_diff_{}", i + 1), *d)),
        );
        out
    }
}

/// Full pipeline on observation samples `g` over `setup.time`.
pub fn invert_series(
    setup: &Setup,
    table: &RelaxationTable,
    g: &TimeSeries,
    opts: &SolverOptions,
    eps: f64,
) -> Result<InverseResult> {
    let mut warnings = setup.warnings.clone();
    let g0 = g.values()[0];
    let tol = opts
        .compat_tol
        .unwrap_or_else(|| default_compat_tol(eps, g0));
    let compatibility = compatibility_check(setup, g0, tol);
    if !compatibility.pass {
        let detail = format!(
            "g(0) = {g0}, |∫φh - g(0)| = {:e}, |Σ h_n φ_n - g(0)| = {:e}, tol {tol:e}",
            compatibility.quadrature_defect, compatibility.series_defect
        );
        if opts.strict {
            return Err(Error::Hypothesis {
                check: "compatibility",
                detail,
            })
            .stage("compatibility");
        }
        let msg = format!("hypothesis `compatibility` violated: {detail}");
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let ops = assemble_operands(setup, table, g, opts).stage("operands")?;
    let f = solve_second_kind(&ops).stage("second-kind solve")?;
    let second_kind_residual = residual_second_kind(&f, &ops)?;
    let first_kind_residual = residual_first_kind(&f, &ops)?;
    let picard = solve_picard(&ops, opts.picard_max_iter, opts.picard_tol, None).stage("picard")?;
    let solver_gap = f
        .values()
        .iter()
        .zip(picard.f.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(InverseResult {
        f,
        second_kind_residual,
        first_kind_residual,
        picard,
        solver_gap,
        compatibility,
        modes: setup.modes(),
        h_norm2: ops.h_norm2,
        leading: ops.leading,
        tails: ops.tails,
        warnings,
    })
}

/// End-to-end inversion of an inverse-mode spec.
pub fn invert(spec: &ProblemSpec) -> Result<InverseResult> {
    spec.validate_shape(Some(Mode::Inverse)).stage("validate")?;
    let setup = Setup::new(spec).stage("setup")?;
    let g_fn = spec.g.as_ref().expect("validated");
    let g = TimeSeries::sample(setup.time, g_fn)
        .map_err(|e| e.in_field("g"))
        .stage("observation")?;
    let table = RelaxationTable::new(setup.alpha, &setup.coeffs.lambdas, setup.time)
        .stage("relaxation table")?;
    invert_series(&setup, &table, &g, &spec.solver, spec.noise.eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_keeps_ends() {
        let v = vec![0.0, 3.0, 0.0, 3.0, 0.0];
        let s = moving_average(&v, 3);
        assert_eq!(s[0], 0.0);
        assert_eq!(s[4], 0.0);
        assert_eq!(s[2], 2.0);
        assert_eq!(moving_average(&v, 1), v);
    }

    fn single_mode_ops(k: usize, g2: Vec<f64>) -> InverseOperands {
        let grid = TimeGrid::new(1.0, k).unwrap();
        InverseOperands {
            alpha: 0.5,
            grid,
            h_norm2: 2.0,
            lambdas: vec![0.0],
            h: vec![2f64.sqrt()],
            phi: vec![0.0],
            kernel: vec![0.0; k + 1],
            first_kind: vec![0.0; k + 1],
            g1: vec![0.0; k + 1],
            g2,
            caputo: CaputoMethod::L1,
            leading: None,
            tails: TailBounds::default(),
        }
    }

    #[test]
    fn zero_kernel_picard_is_immediate() {
        let ops = single_mode_ops(10, (0..=10).map(|k| k as f64).collect());
        let r = solve_picard(&ops, 50, 1e-14, None).unwrap();
        assert_eq!(r.status, PicardStatus::Converged);
        assert_eq!(r.iterations(), 1);
        assert_eq!(r.f.values()[4], 2.0);
    }

    #[test]
    fn homogeneous_equation_has_zero_solution() {
        let mut ops = single_mode_ops(20, vec![0.0; 21]);
        ops.kernel = (0..=20)
            .map(|m| if m == 0 { 0.0 } else { -0.01 / m as f64 })
            .collect();
        let f = solve_second_kind(&ops).unwrap();
        assert!(f.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn degenerate_diagonal_is_reported() {
        let mut ops = single_mode_ops(4, vec![1.0; 5]);
        ops.kernel[1] = -4.0;
        assert!(matches!(
            solve_second_kind(&ops),
            Err(Error::DegenerateDiagonal { step: 1, .. })
        ));
    }
}
