//! Problem description, hypothesis checks and the shared spatial setup.

use crate::error::{Error, Result};
use crate::expr::DataFn;
use crate::frac_calc::TimeGrid;
use crate::sturm_liouville::{
    assemble_operator, select_mode_count, solve_eigs, GrowthBracket, ModeCoefficients, SpaceGrid,
    SpectralBasis, MAX_AUTO_MODES,
};

/// Tolerance for `φ` and `h` at the end points.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Direct,
    Inverse,
}

/// How `∂_t^α g` is formed from the observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CaputoMethod {
    /// L1 applied after subtracting the leading `t^α` behaviour of the data.
    #[default]
    Corrected,
    /// Plain L1 scheme on the samples.
    L1,
    /// Product-trapezoid quadrature of the derivative form, from `g'` and `g''` expressions.
    Derivative,
}

impl CaputoMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CaputoMethod::Corrected => "corrected",
            CaputoMethod::L1 => "l1",
            CaputoMethod::Derivative => "derivative",
        }
    }

    pub fn parse(s: &str) -> Result<CaputoMethod> {
        match s {
            "corrected" => Ok(CaputoMethod::Corrected),
            "l1" => Ok(CaputoMethod::L1),
            "derivative" => Ok(CaputoMethod::Derivative),
            other => Err(Error::Config(format!(
                "unknown caputo method `{other}` (corrected, l1, derivative)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Hypothesis violations are errors when set, warnings otherwise.
    pub strict: bool,
    /// Compatibility tolerance; `None` picks `max(1e-6, 2 ε |g(0)|)`.
    pub compat_tol: Option<f64>,
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    /// Centered moving-average window (samples) applied to `g`.
    pub prefilter: Option<usize>,
    pub caputo: CaputoMethod,
    pub g_derivative: Option<DataFn>,
    pub g_second_derivative: Option<DataFn>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            strict: true,
            compat_tol: None,
            picard_max_iter: 2000,
            picard_tol: 1e-13,
            prefilter: None,
            caputo: CaputoMethod::Corrected,
            g_derivative: None,
            g_second_derivative: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub eps: f64,
    pub seed: u64,
}

impl Default for Noise {
    fn default() -> Self {
        Noise { eps: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub l: f64,
    pub horizon: f64,
    pub p: DataFn,
    pub q: DataFn,
    pub phi: DataFn,
    pub h: DataFn,
    pub f: Option<DataFn>,
    pub g: Option<DataFn>,
    /// Interior spatial points.
    pub m: usize,
    /// Time steps.
    pub k: usize,
    /// Mode count; `None` selects it from the data.
    pub n: Option<usize>,
    pub noise: Noise,
    pub solver: SolverOptions,
}

/// One hypothesis item with its measured value.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub check: &'static str,
    /// Function the check measured (`p`, `q`, `phi`, `h`).
    pub subject: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
}

impl HypothesisCheck {
    pub fn into_error(self) -> Error {
        Error::Hypothesis {
            check: self.check,
            detail: self.detail,
        }
    }
}

impl ProblemSpec {
    /// Spec with constant unit coefficients and zero data, for programmatic use.
    pub fn new(alpha: f64, l: f64, horizon: f64) -> ProblemSpec {
        ProblemSpec {
            alpha,
            l,
            horizon,
            p: DataFn::constant(1.0),
            q: DataFn::constant(0.0),
            phi: DataFn::constant(0.0),
            h: DataFn::constant(0.0),
            f: None,
            g: None,
            m: 200,
            k: 200,
            n: None,
            noise: Noise::default(),
            solver: SolverOptions::default(),
        }
    }

    /// Scalar and structural checks (configuration errors).
    pub fn validate_shape(&self, mode: Option<Mode>) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::Config(format!("l must be positive, got {}", self.l)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!(
                "T must be positive, got {}",
                self.horizon
            )));
        }
        if self.m < 3 {
            return Err(Error::Config(format!(
                "grid.M must be at least 3, got {}",
                self.m
            )));
        }
        if self.k < 1 {
            return Err(Error::Config("grid.K must be at least 1".into()));
        }
        if let Some(n) = self.n {
            if n == 0 || n > self.m {
                return Err(Error::Config(format!(
                    "grid.N = {n} must lie in 1..=M ({})",
                    self.m
                )));
            }
        }
        if !(self.noise.eps >= 0.0 && self.noise.eps.is_finite()) {
            return Err(Error::Config(format!(
                "noise.eps must be >= 0, got {}",
                self.noise.eps
            )));
        }
        match (self.f.is_some(), self.g.is_some(), mode) {
            (true, true, _) | (false, false, Some(_)) => {
                Err(Error::Config("exactly one of f, g must be given".into()))
            }
            (false, true, Some(Mode::Direct)) => {
                Err(Error::Config("this command needs a source factor f".into()))
            }
            (true, false, Some(Mode::Inverse)) => {
                Err(Error::Config("this command needs an observation g".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn mode(&self) -> Option<Mode> {
        match (self.f.is_some(), self.g.is_some()) {
            (true, false) => Some(Mode::Direct),
            (false, true) => Some(Mode::Inverse),
            _ => None,
        }
    }

    pub fn space_grid(&self) -> Result<SpaceGrid> {
        SpaceGrid::new(self.l, self.m)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.k)
    }

    /// Coefficient and data conditions, measured on the grid.
    pub fn hypothesis_checks(&self) -> Result<Vec<HypothesisCheck>> {
        let grid = self.space_grid()?;
        let halves = grid.half_nodes();
        let nodes = grid.nodes();
        let p = self.p.sample(&halves).map_err(|e| e.in_field("p"))?;
        let q = self.q.sample(&nodes).map_err(|e| e.in_field("q"))?;

        let (ip, p_min) = argmin(&p);
        let (iq, q_min) = argmin(&q);
        let mut out = vec![
            HypothesisCheck {
                check: "coefficients",
                subject: "p",
                measured: p_min,
                bound: 0.0,
                pass: p_min > 0.0,
                detail: format!("min p = {p_min} at x = {} (p must be positive)", halves[ip]),
            },
            HypothesisCheck {
                check: "coefficients",
                subject: "q",
                measured: q_min,
                bound: 0.0,
                pass: q_min >= 0.0,
                detail: format!(
                    "min q = {q_min} at x = {} (q must be nonnegative)",
                    nodes[iq]
                ),
            },
        ];
        for (name, func) in [("phi", &self.phi), ("h", &self.h)] {
            let a = func.eval(0.0).map_err(|e| e.in_field(name))?;
            let b = func.eval(self.l).map_err(|e| e.in_field(name))?;
            let worst = a.abs().max(b.abs());
            out.push(HypothesisCheck {
                check: "boundary vanishing",
                subject: name,
                measured: worst,
                bound: BOUNDARY_TOL,
                pass: worst <= BOUNDARY_TOL,
                detail: format!("{name}(0) = {a}, {name}(l) = {b}; both must vanish"),
            });
        }
        Ok(out)
    }

    /// Applies the strictness policy to failed checks, returning warnings.
    pub fn enforce(&self, checks: Vec<HypothesisCheck>) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        for c in checks.into_iter().filter(|c| !c.pass) {
            if self.solver.strict {
                return Err(c.into_error());
            }
            let msg = format!("hypothesis `{}` violated: {}", c.check, c.detail);
            log::warn!("{msg}");
            warnings.push(msg);
        }
        Ok(warnings)
    }
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter().copied().enumerate().fold(
        (0, f64::INFINITY),
        |(bi, bv), (i, x)| if x < bv { (i, x) } else { (bi, bv) },
    )
}

/// Basis, projections and sampled data shared by the solvers.
#[derive(Debug, Clone)]
pub struct Setup {
    pub alpha: f64,
    pub space: SpaceGrid,
    pub time: TimeGrid,
    pub p_half: Vec<f64>,
    pub p_nodes: Vec<f64>,
    pub q_nodes: Vec<f64>,
    pub phi: Vec<f64>,
    pub h: Vec<f64>,
    pub basis: SpectralBasis,
    pub coeffs: ModeCoefficients,
    pub bracket: GrowthBracket,
    /// Whether `N` was chosen automatically.
    pub auto_modes: bool,
    pub warnings: Vec<String>,
}

impl Setup {
    pub fn new(spec: &ProblemSpec) -> Result<Setup> {
        spec.validate_shape(None)?;
        let warnings = spec.enforce(spec.hypothesis_checks()?)?;
        let space = spec.space_grid()?;
        let time = spec.time_grid()?;
        let nodes = space.nodes();
        let p_half = spec
            .p
            .sample(&space.half_nodes())
            .map_err(|e| e.in_field("p"))?;
        let p_nodes = spec.p.sample(&nodes).map_err(|e| e.in_field("p"))?;
        let q_nodes = spec.q.sample(&nodes).map_err(|e| e.in_field("q"))?;
        let phi = boundary_zeroed(spec.phi.sample(&nodes).map_err(|e| e.in_field("phi"))?);
        let h = boundary_zeroed(spec.h.sample(&nodes).map_err(|e| e.in_field("h"))?);

        let system = assemble_operator(&p_half, &q_nodes, space)?;
        let candidates = spec.n.unwrap_or(MAX_AUTO_MODES.min(space.interior()));
        let basis = solve_eigs(&system, candidates)?;
        let coeffs = ModeCoefficients::new(&basis, &phi, &h)?;
        let (basis, coeffs) = if spec.n.is_none() {
            let n = select_mode_count(&coeffs);
            (basis.truncated(n), coeffs.truncated(n))
        } else {
            (basis, coeffs)
        };
        let bracket = GrowthBracket::new(&p_half, &q_nodes, space);
        Ok(Setup {
            alpha: spec.alpha,
            space,
            time,
            p_half,
            p_nodes,
            q_nodes,
            phi,
            h,
            basis,
            coeffs,
            bracket,
            auto_modes: spec.n.is_none(),
            warnings,
        })
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }
}

// Lenient runs may carry small boundary values; the basis vanishes there
// anyway, and the energy functional requires exact zeros.
fn boundary_zeroed(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.len();
    v[0] = 0.0;
    v[n - 1] = 0.0;
    v
}
