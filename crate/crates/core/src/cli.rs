//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{manifest_entries, read_config};
use crate::direct::{run_direct, DirectSolution};
use crate::error::{Error, Result};
use crate::frac_calc::TimeSeries;
use crate::harness::{synthesize, verify_invariants};
use crate::inverse::invert;
use crate::mittag_leffler::ml;
use crate::problem::{CaputoMethod, ProblemSpec, Setup};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "TFSOLVE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "tfsolve",
    version,
    about = "Direct and inverse solvers for time-fractional diffusion"
)]
struct Cli {
    /// Worker threads (overrides TFSOLVE_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sturm-Liouville eigenpairs: eigenvalues.csv, eigenvectors.csv
    Eig(ProblemArgs),
    /// Mittag-Leffler values: ml.csv
    Ml(MlArgs),
    /// Spectral direct solve: u_field.csv, g_observed.csv
    Direct(ProblemArgs),
    /// Synthetic observation data: g_exact.csv, g_noisy.csv, f_true.csv
    Synth(ProblemArgs),
    /// Recover f from g: f_recovered.csv, diagnostics.csv
    Invert(ProblemArgs),
    /// Invariant checklist: invariants_report.csv
    Verify(ProblemArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Problem configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,

    /// Output directory.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Default, Args)]
struct Overrides {
    /// Interior spatial points.
    #[arg(long = "m")]
    m: Option<usize>,
    /// Time steps.
    #[arg(long = "k")]
    k: Option<usize>,
    /// Mode count.
    #[arg(long = "n")]
    n: Option<usize>,
    /// Multiplicative noise level.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Compatibility tolerance for g(0).
    #[arg(long)]
    compat_tol: Option<f64>,
    /// Report hypothesis violations as warnings.
    #[arg(long)]
    lenient: bool,
    /// Moving-average window applied to g.
    #[arg(long)]
    prefilter: Option<usize>,
    /// corrected, l1 or derivative.
    #[arg(long)]
    caputo: Option<String>,
    #[arg(long)]
    picard_max_iter: Option<usize>,
    #[arg(long)]
    picard_tol: Option<f64>,
}

impl Overrides {
    fn apply(&self, spec: &mut ProblemSpec) -> Result<()> {
        if let Some(v) = self.m {
            spec.m = v;
        }
        if let Some(v) = self.k {
            spec.k = v;
        }
        if let Some(v) = self.n {
            spec.n = Some(v);
        }
        if let Some(v) = self.eps {
            spec.noise.eps = v;
        }
        if let Some(v) = self.seed {
            spec.noise.seed = v;
        }
        if let Some(v) = self.compat_tol {
            spec.solver.compat_tol = Some(v);
        }
        if self.lenient {
            spec.solver.strict = false;
        }
        if let Some(v) = self.prefilter {
            spec.solver.prefilter = Some(v);
        }
        if let Some(v) = &self.caputo {
            spec.solver.caputo = CaputoMethod::parse(v)?;
        }
        if let Some(v) = self.picard_max_iter {
            spec.solver.picard_max_iter = v;
        }
        if let Some(v) = self.picard_tol {
            spec.solver.picard_tol = v;
        }
        spec.validate_shape(None)
    }
}

#[derive(Debug, Args)]
struct MlArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Single argument.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["z_min", "z_max"])]
    z: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "z_max")]
    z_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "z_min")]
    z_max: Option<f64>,
    /// Sweep points between z-min and z-max.
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a CSV file with a header row and `\n` line endings.
pub fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn headers(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn series_rows(s: &TimeSeries) -> impl Iterator<Item = Vec<String>> + '_ {
    s.grid()
        .nodes()
        .into_iter()
        .zip(s.values())
        .map(|(t, v)| vec![fmt_f64(t), fmt_f64(*v)])
}

fn write_series(dir: &Path, name: &str, column: &str, s: &TimeSeries) -> Result<()> {
    write_csv(&dir.join(name), &headers(&["t", column]), series_rows(s))
}

struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    fn new(command: &str) -> Manifest {
        let entries = vec![
            ("command".to_string(), command.to_string()),
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("threads".into(), rayon::current_num_threads().to_string()),
        ];
        Manifest { entries }
    }

    fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    fn write(&self, dir: &Path) -> Result<()> {
        // Values may contain commas; quote them.
        let rows = self
            .entries
            .iter()
            .map(|(k, v)| vec![k.clone(), format!("\"{}\"", v.replace('"', "\"\""))]);
        write_csv(&dir.join("manifest.csv"), &headers(&["key", "value"]), rows)
    }
}

fn prepare(args: &ProblemArgs, command: &str) -> Result<(ProblemSpec, Manifest)> {
    let mut spec = read_config(&args.config)?;
    args.overrides.apply(&mut spec)?;
    fs::create_dir_all(&args.out).map_err(|source| Error::Io {
        path: args.out.clone(),
        source,
    })?;
    let mut manifest = Manifest::new(command);
    manifest.push("config", args.config.display());
    manifest.push("out", args.out.display());
    for (k, v) in manifest_entries(&spec) {
        manifest.push(k, v);
    }
    Ok((spec, manifest))
}

fn finish_setup(manifest: &mut Manifest, setup: &Setup) {
    manifest.push("modes_used", setup.modes());
    for w in &setup.warnings {
        manifest.push("warning", w);
    }
}

fn cmd_eig(args: &ProblemArgs) -> Result<()> {
    let (mut spec, mut manifest) = prepare(args, "eig")?;
    spec.f = None;
    spec.g = None;
    let setup = Setup::new(&spec)?;
    finish_setup(&mut manifest, &setup);
    let basis = &setup.basis;
    let rows = basis.eigenvalues().iter().enumerate().map(|(i, l)| {
        let n = i + 1;
        let (lo, hi) = setup.bracket.bounds(n);
        vec![
            n.to_string(),
            fmt_f64(*l),
            fmt_f64(l / (n * n) as f64),
            fmt_f64(lo),
            fmt_f64(hi),
        ]
    });
    write_csv(
        &args.out.join("eigenvalues.csv"),
        &headers(&["n", "lambda", "lambda_over_n2", "bracket_lo", "bracket_hi"]),
        rows,
    )?;
    let mut head = vec!["x".to_string()];
    head.extend((1..=basis.modes()).map(|n| format!("X_{n}")));
    let nodes = setup.space.nodes();
    let rows = nodes.iter().enumerate().map(|(i, x)| {
        let mut row = vec![fmt_f64(*x)];
        row.extend(basis.vectors().iter().map(|v| fmt_f64(v[i])));
        row
    });
    write_csv(&args.out.join("eigenvectors.csv"), &head, rows)?;
    manifest.write(&args.out)
}

fn cmd_ml(args: &MlArgs) -> Result<()> {
    fs::create_dir_all(&args.out).map_err(|source| Error::Io {
        path: args.out.clone(),
        source,
    })?;
    let zs: Vec<f64> = match (args.z, args.z_min, args.z_max) {
        (Some(z), _, _) => vec![z],
        (None, Some(a), Some(b)) => {
            if args.points < 2 {
                return Err(Error::Config("--points must be at least 2".into()));
            }
            (0..args.points)
                .map(|i| a + (b - a) * i as f64 / (args.points - 1) as f64)
                .collect()
        }
        _ => return Err(Error::Config("give --z or both --z-min and --z-max".into())),
    };
    let values: Vec<f64> = zs
        .iter()
        .map(|z| ml(args.alpha, args.beta, *z))
        .collect::<Result<_>>()?;
    let rows = zs
        .iter()
        .zip(&values)
        .map(|(z, v)| vec![fmt_f64(*z), fmt_f64(*v)]);
    write_csv(&args.out.join("ml.csv"), &headers(&["z", "value"]), rows)?;
    let mut manifest = Manifest::new("ml");
    manifest.push("alpha", args.alpha);
    manifest.push("beta", args.beta);
    manifest.push("points", zs.len());
    manifest.push("z_first", zs[0]);
    manifest.push("z_last", zs[zs.len() - 1]);
    manifest.push("out", args.out.display());
    manifest.write(&args.out)
}

fn write_field(path: &Path, setup: &Setup, sol: &DirectSolution) -> Result<()> {
    let mut head = vec!["t".to_string()];
    head.extend(
        setup
            .space
            .nodes()
            .iter()
            .map(|x| format!("x={}", fmt_f64(*x))),
    );
    let times = sol.time().nodes();
    let rows = sol.field().iter().zip(&times).map(|(row, t)| {
        let mut out = Vec::with_capacity(row.len() + 1);
        out.push(fmt_f64(*t));
        out.extend(row.iter().map(|v| fmt_f64(*v)));
        out
    });
    write_csv(path, &head, rows)
}

fn cmd_direct(args: &ProblemArgs) -> Result<()> {
    let (spec, mut manifest) = prepare(args, "direct")?;
    let (setup, sol) = run_direct(&spec)?;
    finish_setup(&mut manifest, &setup);
    write_field(&args.out.join("u_field.csv"), &setup, &sol)?;
    write_series(
        &args.out,
        "g_observed.csv",
        "g",
        &sol.observe(&setup.coeffs.h)?,
    )?;
    manifest.write(&args.out)
}

fn cmd_synth(args: &ProblemArgs) -> Result<()> {
    let (spec, mut manifest) = prepare(args, "synth")?;
    let data = synthesize(&spec)?;
    finish_setup(&mut manifest, data.setup());
    manifest.push(
        "noise_generator",
        "ChaCha8Rng::seed_from_u64, xi_k uniform on [-1, 1]",
    );
    write_series(&args.out, "g_exact.csv", "g", &data.g_exact)?;
    write_series(&args.out, "g_noisy.csv", "g", &data.g_noisy)?;
    write_series(&args.out, "f_true.csv", "f", &data.f_true)?;
    manifest.write(&args.out)
}

fn cmd_invert(args: &ProblemArgs) -> Result<()> {
    let (spec, mut manifest) = prepare(args, "invert")?;
    let result = invert(&spec)?;
    manifest.push("modes_used", result.modes);
    for w in &result.warnings {
        manifest.push("warning", w);
    }
    write_series(&args.out, "f_recovered.csv", "f", &result.f)?;
    let rows = result
        .diagnostics()
        .into_iter()
        .map(|(k, v)| vec![k, fmt_f64(v)]);
    write_csv(
        &args.out.join("diagnostics.csv"),
        &headers(&["quantity", "value"]),
        rows,
    )?;
    manifest.write(&args.out)
}

fn cmd_verify(args: &ProblemArgs) -> Result<()> {
    let (spec, mut manifest) = prepare(args, "verify")?;
    let rows = verify_invariants(&spec)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    manifest.push("checks", rows.len());
    manifest.push("failed", failed);
    let csv_rows = rows.iter().map(|r| {
        vec![
            format!("\"{}\"", r.check),
            fmt_f64(r.measured),
            fmt_f64(r.bound),
            r.pass.to_string(),
        ]
    });
    write_csv(
        &args.out.join("invariants_report.csv"),
        &headers(&["check", "measured", "bound", "pass"]),
        csv_rows,
    )?;
    if failed > 0 {
        log::warn!("{failed} of {} checks failed", rows.len());
    }
    manifest.write(&args.out)
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let from_env =
        match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                Error::Config(format!("{THREADS_ENV} = `{v}` is not a thread count"))
            })?),
            Err(_) => None,
        };
    if let Some(n) = flag.or(from_env) {
        // A global pool may already exist when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Eig(a) => cmd_eig(a),
        Command::Ml(a) => cmd_ml(a),
        Command::Direct(a) => cmd_direct(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Invert(a) => cmd_invert(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

/// Renders an error as `error[category]: message`.
pub fn render_error(err: &Error) -> String {
    let mut s = format!("error[{}]: {err}", err.category().as_str());
    if let Some(check) = err.hypothesis() {
        let _ = write!(s, " (hypothesis: {check})");
    }
    s
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", render_error(&err));
            err.category().exit_code()
        }
    }
}
