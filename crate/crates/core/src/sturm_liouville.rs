//! Dirichlet Sturm–Liouville problem `-(p X')' + q X = λ X` on `[0, l]`.
//!
//! The operator is discretized with the conservative three-point flux stencil
//! (`p` sampled at half-nodes), which yields a symmetric tridiagonal matrix.
//! The lowest eigenvalues come from Sturm-count bisection and the vectors from
//! inverse iteration; vectors are normalized in the trapezoid inner product.

use crate::error::{Error, Result};
use crate::expr::DataFn;

/// Uniform grid `x_i = i l / (M+1)`, `i = 0..=M+1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid {
    l: f64,
    m: usize,
}

impl SpaceGrid {
    pub fn new(l: f64, m: usize) -> Result<SpaceGrid> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "interval length l = {l} must be positive"
            )));
        }
        if m < 3 {
            return Err(Error::InvalidArgument(format!(
                "M = {m}: at least 3 interior points"
            )));
        }
        Ok(SpaceGrid { l, m })
    }

    pub fn length(&self) -> f64 {
        self.l
    }

    /// Interior point count `M`.
    pub fn interior(&self) -> usize {
        self.m
    }

    /// Total node count `M + 2`.
    pub fn len(&self) -> usize {
        self.m + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.l / (self.m + 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.m + 1 {
            self.l
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Midpoints `x_{i+1/2}`, `i = 0..=M`.
    pub fn half_nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.m).map(|i| (i as f64 + 0.5) * dx).collect()
    }

    /// Trapezoid inner product of two full-grid sample vectors.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = a.len();
        let interior: f64 = a[1..n - 1]
            .iter()
            .zip(&b[1..n - 1])
            .map(|(x, y)| x * y)
            .sum();
        self.dx() * (interior + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]))
    }

    fn check_len(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.len() {
            return Err(Error::GridMismatch {
                expected: self.len(),
                actual: samples.len(),
            });
        }
        Ok(())
    }
}

/// Symmetric tridiagonal matrix on the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub grid: SpaceGrid,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        let n = self.size();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// `y = A x` on interior vectors.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.size() {
            let b2 = if i > 0 {
                self.off[i - 1] * self.off[i - 1]
            } else {
                0.0
            };
            d = self.diag[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.size();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }
}

fn a1_violation(what: &str, x: f64, v: f64) -> Error {
    Error::Hypothesis {
        check: "coefficients",
        detail: format!("{what}(x = {x}) = {v} violates p > 0, q >= 0"),
    }
}

/// Assembles `-(p X')' + q X` from `p` at the `M+1` half-nodes and `q` at all
/// `M+2` nodes.
pub fn assemble_operator(
    p_half: &[f64],
    q_nodes: &[f64],
    grid: SpaceGrid,
) -> Result<TridiagonalSystem> {
    let m = grid.interior();
    if p_half.len() != m + 1 {
        return Err(Error::GridMismatch {
            expected: m + 1,
            actual: p_half.len(),
        });
    }
    grid.check_len(q_nodes)?;
    let halves = grid.half_nodes();
    for (x, &p) in halves.iter().zip(p_half) {
        if !(p > 0.0) || !p.is_finite() {
            return Err(a1_violation("p", *x, p));
        }
    }
    for (i, &q) in q_nodes.iter().enumerate() {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(a1_violation("q", grid.node(i), q));
        }
    }
    let inv = 1.0 / (grid.dx() * grid.dx());
    let diag = (0..m)
        .map(|i| (p_half[i] + p_half[i + 1]) * inv + q_nodes[i + 1])
        .collect();
    let off = (1..m).map(|i| -p_half[i] * inv).collect();
    Ok(TridiagonalSystem { grid, diag, off })
}

/// Samples `p` and `q` and assembles the operator.
pub fn assemble_from(p: &DataFn, q: &DataFn, grid: SpaceGrid) -> Result<TridiagonalSystem> {
    let p_half = p.sample(&grid.half_nodes()).map_err(|e| e.in_field("p"))?;
    let q_nodes = q.sample(&grid.nodes()).map_err(|e| e.in_field("q"))?;
    assemble_operator(&p_half, &q_nodes, grid)
}

/// Lowest `N` eigenpairs with trapezoid-orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    grid: SpaceGrid,
    eigenvalues: Vec<f64>,
    // Full-grid samples, zero at both ends.
    vectors: Vec<Vec<f64>>,
}

const INVERSE_ITERATION_CAP: usize = 12;

pub fn solve_eigs(system: &TridiagonalSystem, n: usize) -> Result<SpectralBasis> {
    let m = system.size();
    if n == 0 || n > m {
        return Err(Error::InvalidArgument(format!(
            "mode count N = {n} must lie in 1..={m}"
        )));
    }
    let (lo, hi) = system.gershgorin();
    let eigenvalues: Vec<f64> = (0..n).map(|k| bisect(system, k, lo, hi)).collect();

    let grid = system.grid;
    let scale = grid.dx().sqrt();
    let norm = system.norm();
    let mut unit: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        let v = inverse_iteration(system, lambda, norm, &unit, k)?;
        unit.push(v);
    }

    let vectors = unit
        .into_iter()
        .map(|v| {
            let mut full = Vec::with_capacity(m + 2);
            full.push(0.0);
            full.extend(v.iter().map(|x| x / scale));
            full.push(0.0);
            fix_sign(&mut full);
            full
        })
        .collect();
    Ok(SpectralBasis {
        grid,
        eigenvalues,
        vectors,
    })
}

fn bisect(system: &TridiagonalSystem, k: usize, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..256 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if system.sturm_count(mid) > k {
            b = mid;
        } else {
            a = mid;
        }
        if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Solves `(A - μ I) y = r` by Gaussian elimination with partial pivoting.
fn shifted_solve(system: &TridiagonalSystem, mu: f64, rhs: &[f64], tiny: f64) -> Vec<f64> {
    let n = system.size();
    let mut d: Vec<f64> = system.diag.iter().map(|v| v - mu).collect();
    let mut du: Vec<f64> = system.off.clone();
    let mut dl: Vec<f64> = system.off.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = f;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let t = d[i + 1];
            d[i + 1] = du[i] - f * t;
            du[i] = t;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
            dl[i] = f;
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        if i + 1 < n {
            v -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= du2[i] * x[i + 2];
        }
        x[i] = v / d[i];
    }
    x
}

fn normalize(v: &mut [f64]) -> f64 {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    s
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for u in against {
        let c: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
    }
}

fn inverse_iteration(
    system: &TridiagonalSystem,
    lambda: f64,
    norm: f64,
    previous: &[Vec<f64>],
    mode: usize,
) -> Result<Vec<f64>> {
    let n = system.size();
    let tiny = f64::EPSILON * norm;
    // Deterministic start with components along every mode.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    orthogonalize(&mut v, previous);
    normalize(&mut v);
    let tol = 64.0 * f64::EPSILON * norm * (n as f64).sqrt();
    for _ in 0..INVERSE_ITERATION_CAP {
        let mut y = shifted_solve(system, lambda, &v, tiny);
        orthogonalize(&mut y, previous);
        orthogonalize(&mut y, previous);
        if normalize(&mut y) == 0.0 {
            break;
        }
        let av = system.apply(&y);
        let residual = av
            .iter()
            .zip(&y)
            .map(|(a, x)| (a - lambda * x).abs())
            .fold(0.0, f64::max);
        v = y;
        if residual <= tol {
            return Ok(v);
        }
    }
    Err(Error::NonConvergence {
        mode: mode + 1,
        iterations: INVERSE_ITERATION_CAP,
    })
}

fn fix_sign(v: &mut [f64]) {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * peak) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

impl SpectralBasis {
    pub fn grid(&self) -> SpaceGrid {
        self.grid
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Samples of `X_{n+1}` on the full grid (0-based `n`).
    pub fn vector(&self, n: usize) -> &[f64] {
        &self.vectors[n]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Keeps only the first `n` modes.
    pub fn truncated(&self, n: usize) -> SpectralBasis {
        let n = n.min(self.modes());
        SpectralBasis {
            grid: self.grid,
            eigenvalues: self.eigenvalues[..n].to_vec(),
            vectors: self.vectors[..n].to_vec(),
        }
    }

    /// `max |<X_m, X_n> - δ_mn|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.modes() {
            for j in 0..=i {
                let g = self.grid.inner(&self.vectors[i], &self.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
        worst
    }

    /// `Σ_n c_n X_n` on the full grid.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (c, v) in coeffs.iter().zip(&self.vectors) {
            out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
        }
        out
    }
}

/// Trapezoid inner products `<v, X_n>` for every mode.
pub fn project(samples: &[f64], basis: &SpectralBasis) -> Result<Vec<f64>> {
    let grid = basis.grid();
    grid.check_len(samples)?;
    Ok(basis
        .vectors
        .iter()
        .map(|x| grid.inner(samples, x))
        .collect())
}

/// Trapezoid approximation of `∫ p Y'² + q Y² dx`, derivatives by central
/// differences (second-order one-sided at the ends). All inputs are
/// full-grid samples.
pub fn energy_form(samples: &[f64], p: &[f64], q: &[f64], grid: SpaceGrid) -> Result<f64> {
    grid.check_len(samples)?;
    grid.check_len(p)?;
    grid.check_len(q)?;
    let last = grid.len() - 1;
    for (i, at) in [(0usize, 0.0), (last, grid.length())] {
        if samples[i].abs() > 1e-12 {
            return Err(Error::Hypothesis {
                check: "boundary vanishing",
                detail: format!("sample at x = {at} is {:e}, expected 0", samples[i]),
            });
        }
    }
    let dx = grid.dx();
    let deriv: Vec<f64> = (0..=last)
        .map(|i| match i {
            0 => (4.0 * samples[1] - 3.0 * samples[0] - samples[2]) / (2.0 * dx),
            i if i == last => {
                (3.0 * samples[last] - 4.0 * samples[last - 1] + samples[last - 2]) / (2.0 * dx)
            }
            i => (samples[i + 1] - samples[i - 1]) / (2.0 * dx),
        })
        .collect();
    let density: Vec<f64> = (0..=last)
        .map(|i| p[i] * deriv[i] * deriv[i] + q[i] * samples[i] * samples[i])
        .collect();
    let ones = vec![1.0; density.len()];
    Ok(grid.inner(&density, &ones))
}

/// Projections of `φ` and `h` together with the eigenvalues they pair with.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    pub lambdas: Vec<f64>,
    pub phi: Vec<f64>,
    pub h: Vec<f64>,
}

impl ModeCoefficients {
    pub fn new(basis: &SpectralBasis, phi: &[f64], h: &[f64]) -> Result<ModeCoefficients> {
        Ok(ModeCoefficients {
            lambdas: basis.eigenvalues().to_vec(),
            phi: project(phi, basis).map_err(|e| e.in_field("phi"))?,
            h: project(h, basis).map_err(|e| e.in_field("h"))?,
        })
    }

    pub fn modes(&self) -> usize {
        self.lambdas.len()
    }

    /// `H = Σ h_n²`.
    pub fn h_norm2(&self) -> f64 {
        self.h.iter().map(|v| v * v).sum()
    }

    /// `Σ λ_n h_n²`.
    pub fn h_energy(&self) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.h)
            .map(|(l, v)| l * v * v)
            .sum()
    }

    /// `Σ λ_n φ_n²`.
    pub fn phi_energy(&self) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.phi)
            .map(|(l, v)| l * v * v)
            .sum()
    }

    /// `Σ h_n φ_n`.
    pub fn h_dot_phi(&self) -> f64 {
        self.h.iter().zip(&self.phi).map(|(a, b)| a * b).sum()
    }

    pub fn truncated(&self, n: usize) -> ModeCoefficients {
        let n = n.min(self.modes());
        ModeCoefficients {
            lambdas: self.lambdas[..n].to_vec(),
            phi: self.phi[..n].to_vec(),
            h: self.h[..n].to_vec(),
        }
    }
}

/// Running sums `Σ_{n≤k} λ_n c_n²`.
pub fn energy_partial_sums(lambdas: &[f64], coeffs: &[f64]) -> Vec<f64> {
    lambdas
        .iter()
        .zip(coeffs)
        .scan(0.0, |acc, (l, c)| {
            *acc += l * c * c;
            Some(*acc)
        })
        .collect()
}

/// Threshold on `λ_n c_n²` below which a mode is considered negligible.
pub const TAIL_THRESHOLD: f64 = 1e-12;
/// Upper bound on the automatically selected mode count.
pub const MAX_AUTO_MODES: usize = 64;

/// Smallest `N` such that every mode beyond it has `λ_n φ_n²` and `λ_n h_n²`
/// below [`TAIL_THRESHOLD`]. Coefficients must cover at least the candidate
/// range; the result is at least 1.
pub fn select_mode_count(coeffs: &ModeCoefficients) -> usize {
    let cap = coeffs.modes().min(MAX_AUTO_MODES);
    let significant = |n: usize| {
        let l = coeffs.lambdas[n];
        l * coeffs.phi[n] * coeffs.phi[n] >= TAIL_THRESHOLD
            || l * coeffs.h[n] * coeffs.h[n] >= TAIL_THRESHOLD
    };
    (0..cap)
        .rev()
        .find(|&n| significant(n))
        .map_or(1, |n| n + 1)
}

/// Bounds on `λ_n` from the extreme coefficient values, by comparison with
/// the constant-coefficient stencil whose eigenvalues are
/// `p (4/Δx²) sin²(nπΔx/2l) + q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBracket {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub grid: SpaceGrid,
}

impl GrowthBracket {
    pub fn new(p_half: &[f64], q_nodes: &[f64], grid: SpaceGrid) -> GrowthBracket {
        let fold = |v: &[f64]| {
            v.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(*x), hi.max(*x))
                })
        };
        let (p_min, p_max) = fold(p_half);
        let (q_min, q_max) = fold(&q_nodes[1..q_nodes.len() - 1]);
        GrowthBracket {
            p_min,
            p_max,
            q_min,
            q_max,
            grid,
        }
    }

    fn laplacian(&self, n: usize) -> f64 {
        let dx = self.grid.dx();
        let s = (n as f64 * std::f64::consts::PI * dx / (2.0 * self.grid.length())).sin();
        4.0 / (dx * dx) * s * s
    }

    /// `(lower, upper)` bounds on `λ_n`, 1-based `n`.
    pub fn bounds(&self, n: usize) -> (f64, f64) {
        let lap = self.laplacian(n);
        (self.p_min * lap + self.q_min, self.p_max * lap + self.q_max)
    }
}
