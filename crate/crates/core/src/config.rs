//! TOML problem files.
//!
//! ```toml
//! alpha = 0.5
//! l = 1.0
//! T = 1.0
//! p = "1 + x/2"
//! q = "x"
//! phi = "sin(pi*x)*x*(1-x)"
//! h = "x*(1-x)"
//! f = "1 + t^2"             # or g = "..." / g = { table = "g.csv" }
//!
//! [grid]
//! M = 200
//! K = 200
//! N = 32                    # optional
//!
//! [noise]
//! eps = 0.0
//! seed = 0
//!
//! [solver]                  # optional
//! strict = true
//! caputo = "corrected"      # corrected | l1 | derivative
//! ```
//!
//! Spatial functions use the variable `x`, time functions `t`. Table paths
//! are relative to the configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::DataFn;
use crate::problem::{CaputoMethod, Noise, ProblemSpec, SolverOptions};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Source {
    Number(f64),
    Expr(String),
    Table { table: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alpha: f64,
    l: f64,
    #[serde(rename = "T")]
    horizon: f64,
    p: Source,
    q: Source,
    phi: Source,
    h: Source,
    f: Option<Source>,
    g: Option<Source>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default)]
    solver: RawSolver,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "M")]
    m: Option<usize>,
    #[serde(rename = "K")]
    k: Option<usize>,
    #[serde(rename = "N")]
    n: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    eps: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    strict: Option<bool>,
    compat_tol: Option<f64>,
    picard_max_iter: Option<usize>,
    picard_tol: Option<f64>,
    prefilter: Option<usize>,
    caputo: Option<String>,
    g_derivative: Option<String>,
    g_second_derivative: Option<String>,
}

fn resolve(source: &Source, variable: &str, base: &Path) -> Result<DataFn> {
    match source {
        Source::Number(c) => Ok(DataFn::constant(*c)),
        Source::Expr(s) => DataFn::expr(s, variable),
        Source::Table { table } => DataFn::table_from_csv(&base.join(table)),
    }
}

fn toml_error(err: toml::de::Error) -> Error {
    let msg = err.message();
    if let Some(rest) = msg.strip_prefix("missing field `") {
        if let Some(name) = rest.split('`').next() {
            return Error::MissingField(name.to_string());
        }
    }
    Error::Config(err.to_string().trim_end().to_string())
}

/// Parses configuration text. Table paths resolve against `base`. Only the
/// shape of the problem is checked here.
pub fn parse_config(text: &str, base: &Path) -> Result<ProblemSpec> {
    let raw: RawConfig = toml::from_str(text).map_err(toml_error)?;
    let field =
        |name: &str, src: &Source, var: &str| resolve(src, var, base).map_err(|e| e.in_field(name));
    let defaults = SolverOptions::default();
    let solver = SolverOptions {
        strict: raw.solver.strict.unwrap_or(defaults.strict),
        compat_tol: raw.solver.compat_tol,
        picard_max_iter: raw
            .solver
            .picard_max_iter
            .unwrap_or(defaults.picard_max_iter),
        picard_tol: raw.solver.picard_tol.unwrap_or(defaults.picard_tol),
        prefilter: raw.solver.prefilter,
        caputo: raw
            .solver
            .caputo
            .as_deref()
            .map(CaputoMethod::parse)
            .transpose()?
            .unwrap_or_default(),
        g_derivative: raw
            .solver
            .g_derivative
            .as_deref()
            .map(|s| DataFn::expr(s, "t"))
            .transpose()
            .map_err(|e| e.in_field("solver.g_derivative"))?,
        g_second_derivative: raw
            .solver
            .g_second_derivative
            .as_deref()
            .map(|s| DataFn::expr(s, "t"))
            .transpose()
            .map_err(|e| e.in_field("solver.g_second_derivative"))?,
    };
    let mut spec = ProblemSpec::new(raw.alpha, raw.l, raw.horizon);
    spec.p = field("p", &raw.p, "x")?;
    spec.q = field("q", &raw.q, "x")?;
    spec.phi = field("phi", &raw.phi, "x")?;
    spec.h = field("h", &raw.h, "x")?;
    spec.f = raw.f.as_ref().map(|s| field("f", s, "t")).transpose()?;
    spec.g = raw.g.as_ref().map(|s| field("g", s, "t")).transpose()?;
    spec.m = raw.grid.m.unwrap_or(spec.m);
    spec.k = raw.grid.k.unwrap_or(spec.k);
    spec.n = raw.grid.n;
    let noise = Noise::default();
    spec.noise = Noise {
        eps: raw.noise.eps.unwrap_or(noise.eps),
        seed: raw.noise.seed.unwrap_or(noise.seed),
    };
    spec.solver = solver;
    spec.validate_shape(None)?;
    Ok(spec)
}

/// Reads and shape-checks a configuration file.
pub fn read_config(path: &Path) -> Result<ProblemSpec> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

/// Reads a configuration file and applies the hypothesis policy.
pub fn load_config(path: &Path) -> Result<ProblemSpec> {
    let spec = read_config(path)?;
    spec.enforce(spec.hypothesis_checks()?)?;
    Ok(spec)
}

/// Fully resolved settings as `(key, value)` pairs.
pub fn manifest_entries(spec: &ProblemSpec) -> Vec<(String, String)> {
    let opt = |v: Option<&DataFn>| v.map_or_else(|| "none".to_string(), DataFn::describe);
    let s = &spec.solver;
    vec![
        ("alpha".into(), format!("{:?}", spec.alpha)),
        ("l".into(), format!("{:?}", spec.l)),
        ("T".into(), format!("{:?}", spec.horizon)),
        ("p".into(), spec.p.describe()),
        ("q".into(), spec.q.describe()),
        ("phi".into(), spec.phi.describe()),
        ("h".into(), spec.h.describe()),
        ("f".into(), opt(spec.f.as_ref())),
        ("g".into(), opt(spec.g.as_ref())),
        ("grid.M".into(), spec.m.to_string()),
        ("grid.K".into(), spec.k.to_string()),
        (
            "grid.N".into(),
            spec.n.map_or_else(|| "auto".to_string(), |n| n.to_string()),
        ),
        ("noise.eps".into(), format!("{:?}", spec.noise.eps)),
        ("noise.seed".into(), spec.noise.seed.to_string()),
        ("solver.strict".into(), s.strict.to_string()),
        (
            "solver.compat_tol".into(),
            s.compat_tol
                .map_or_else(|| "auto".to_string(), |v| format!("{v:?}")),
        ),
        (
            "solver.picard_max_iter".into(),
            s.picard_max_iter.to_string(),
        ),
        ("solver.picard_tol".into(), format!("{:?}", s.picard_tol)),
        (
            "solver.prefilter".into(),
            s.prefilter
                .map_or_else(|| "none".to_string(), |v| v.to_string()),
        ),
        ("solver.caputo".into(), s.caputo.as_str().to_string()),
        ("solver.g_derivative".into(), opt(s.g_derivative.as_ref())),
        (
            "solver.g_second_derivative".into(),
            opt(s.g_second_derivative.as_ref()),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
alpha = 0.5
l = 1
T = 2.0
p = 1
q = "x"
phi = "x*(1-x)"
h = "sin(pi*x)"
f = "1 + t"
"#;

    fn parse(text: &str) -> Result<ProblemSpec> {
        parse_config(text, Path::new("."))
    }

    #[test]
    fn minimal_direct_config() {
        let spec = parse(MINIMAL).unwrap();
        assert_eq!(spec.horizon, 2.0);
        assert_eq!((spec.m, spec.k, spec.n), (200, 200, None));
        assert_eq!(spec.p.eval(0.3).unwrap(), 1.0);
        assert_eq!(spec.f.as_ref().unwrap().eval(1.0).unwrap(), 2.0);
        assert!(spec.solver.strict);
    }

    #[test]
    fn sections_override_defaults() {
        let text = format!("{MINIMAL}\n[grid]\nM = 50\nK = 30\nN = 8\n[noise]\neps = 1e-3\nseed = 7\n[solver]\nstrict = false\ncaputo = \"l1\"\n");
        let spec = parse(&text).unwrap();
        assert_eq!((spec.m, spec.k, spec.n), (50, 30, Some(8)));
        assert_eq!(spec.noise, Noise { eps: 1e-3, seed: 7 });
        assert!(!spec.solver.strict);
        assert_eq!(spec.solver.caputo, CaputoMethod::L1);
    }

    #[test]
    fn both_data_functions_rejected() {
        let err = parse(&format!("{MINIMAL}g = \"t\"\n")).unwrap_err();
        assert!(err.to_string().contains("exactly one of f, g"), "{err}");
    }

    #[test]
    fn alpha_one_rejected() {
        let err = parse(&MINIMAL.replace("alpha = 0.5", "alpha = 1.0")).unwrap_err();
        assert!(err.to_string().contains("alpha must lie in (0,1)"), "{err}");
    }

    #[test]
    fn missing_field_is_named() {
        let err = parse(&MINIMAL.replace("h = \"sin(pi*x)\"\n", "")).unwrap_err();
        assert!(matches!(&err, Error::MissingField(f) if f == "h"), "{err}");
    }

    #[test]
    fn bad_expression_is_positioned() {
        let err = parse(&MINIMAL.replace("\"x\"", "\"x +* 2\"")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`q`") && msg.contains("position"), "{msg}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse(&format!("{MINIMAL}[grid]\nZ = 3\n")).is_err());
    }
}
