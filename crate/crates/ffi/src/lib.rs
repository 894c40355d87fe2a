//! C ABI for `tfsolve`.
//!
//! Every fallible function returns a [`TfsStatus`]. On failure a message is
//! stored per thread and can be read with [`tfs_last_error`]. Objects are
//! opaque handles released with their `_free` function.
//!
//! Array outputs follow one convention: the caller passes a buffer and its
//! capacity; the required length is always written to `*len`, and
//! `TFS_BUFFER_TOO_SMALL` is returned when the capacity does not suffice.
//! Passing a null buffer queries the length.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tfsolve::config::{load_config, parse_config};
use tfsolve::direct::{solve_direct, RelaxationTable};
use tfsolve::frac_calc::TimeSeries;
use tfsolve::inverse::{invert, invert_series, InverseResult};
use tfsolve::mittag_leffler::ml;
use tfsolve::problem::{ProblemSpec, Setup};
use tfsolve::{Error, ErrorCategory};

/// Result codes. The nonzero error classes match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfsStatus {
    Ok = 0,
    Config = 2,
    Numerical = 3,
    Hypothesis = 4,
    Io = 5,
    NullPointer = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A parsed problem description.
pub struct TfsProblem {
    spec: ProblemSpec,
}

/// Outcome of an inversion.
pub struct TfsInverse {
    result: InverseResult,
    times: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> TfsStatus {
    match err.category() {
        ErrorCategory::Config => TfsStatus::Config,
        ErrorCategory::Numerical => TfsStatus::Numerical,
        ErrorCategory::Hypothesis => TfsStatus::Hypothesis,
        ErrorCategory::Io => TfsStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Buffer { needed: usize, capacity: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TfsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TfsStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            let status = status_of(&e);
            set_error(e.to_string());
            status
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for `{what}`"));
            TfsStatus::NullPointer
        }
        Ok(Err(Failure::Buffer { needed, capacity })) => {
            set_error(format!("buffer holds {capacity} values, {needed} required"));
            TfsStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".into());
            TfsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument(format!("`{what}` is not UTF-8"))))
}

unsafe fn copy_out(
    values: &[f64],
    out: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> Result<(), Failure> {
    *deref_mut(len, "len")? = values.len();
    if out.is_null() {
        return Ok(());
    }
    if capacity < values.len() {
        return Err(Failure::Buffer {
            needed: values.len(),
            capacity,
        });
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next `tfs_` call on the same thread.
#[no_mangle]
pub extern "C" fn tfs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tfs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `E_{α,β}(z)` for `α ∈ (0, 1]`, `z ≤ 0`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tfs_ml(alpha: f64, beta: f64, z: f64, out: *mut f64) -> TfsStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ml(alpha, beta, z)?;
        Ok(())
    })
}

fn emit_problem(spec: ProblemSpec, out: *mut *mut TfsProblem) -> Result<(), Failure> {
    unsafe { *deref_mut(out, "out")? = Box::into_raw(Box::new(TfsProblem { spec })) };
    Ok(())
}

/// Loads a TOML problem file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tfs_problem_from_file(
    path: *const c_char,
    out: *mut *mut TfsProblem,
) -> TfsStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        emit_problem(load_config(Path::new(path))?, out)
    })
}

/// Parses TOML text. Table paths resolve against `base_dir` (may be NULL for
/// the working directory).
///
/// # Safety
/// `text` and a non-null `base_dir` must be NUL-terminated strings; `out`
/// must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tfs_problem_from_str(
    text: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut TfsProblem,
) -> TfsStatus {
    guard(|| {
        let text = c_str(text, "text")?;
        let base = if base_dir.is_null() {
            "."
        } else {
            c_str(base_dir, "base_dir")?
        };
        let spec = parse_config(text, Path::new(base))?;
        spec.enforce(spec.hypothesis_checks()?)?;
        emit_problem(spec, out)
    })
}

/// # Safety
/// `problem` must come from a `tfs_problem_from_*` call and not be used
/// afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn tfs_problem_free(problem: *mut TfsProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Overrides the grid. `n = 0` selects the mode count automatically.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfs_problem_set_grid(
    problem: *mut TfsProblem,
    m: usize,
    k: usize,
    n: usize,
) -> TfsStatus {
    guard(|| {
        let p = deref_mut(problem, "problem")?;
        let mut spec = p.spec.clone();
        spec.m = m;
        spec.k = k;
        spec.n = (n > 0).then_some(n);
        spec.validate_shape(None)?;
        p.spec = spec;
        Ok(())
    })
}

/// Hypothesis violations become warnings when `strict` is false.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfs_problem_set_strict(
    problem: *mut TfsProblem,
    strict: bool,
) -> TfsStatus {
    guard(|| {
        deref_mut(problem, "problem")?.spec.solver.strict = strict;
        Ok(())
    })
}

/// Time nodes `t_0..t_K` of the problem grid.
///
/// # Safety
/// `problem` must be a live handle; `out` must hold `capacity` values or be
/// NULL; `len` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tfs_problem_times(
    problem: *const TfsProblem,
    out: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> TfsStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        copy_out(&p.spec.time_grid()?.nodes(), out, capacity, len)
    })
}

/// Eigenvalues of the spatial operator used by the solvers.
///
/// # Safety
/// As for [`tfs_problem_times`].
#[no_mangle]
pub unsafe extern "C" fn tfs_eigenvalues(
    problem: *const TfsProblem,
    out: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> TfsStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        let setup = Setup::new(&p.spec)?;
        copy_out(setup.basis.eigenvalues(), out, capacity, len)
    })
}

/// Observation `g(t_k)` of the direct solution for the problem's `f`.
///
/// # Safety
/// As for [`tfs_problem_times`].
#[no_mangle]
pub unsafe extern "C" fn tfs_direct_observe(
    problem: *const TfsProblem,
    out: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> TfsStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        let f_fn = p
            .spec
            .f
            .as_ref()
            .ok_or_else(|| Error::Config("the problem has no source factor f".into()))?;
        let setup = Setup::new(&p.spec)?;
        let f = TimeSeries::sample(setup.time, f_fn)?;
        let table = RelaxationTable::new(setup.alpha, &setup.coeffs.lambdas, setup.time)?;
        let g = solve_direct(&setup, &table, &f)?.observe(&setup.coeffs.h)?;
        copy_out(g.values(), out, capacity, len)
    })
}

fn emit_inverse(result: InverseResult, out: *mut *mut TfsInverse) -> Result<(), Failure> {
    let times = result.f.grid().nodes();
    unsafe { *deref_mut(out, "out")? = Box::into_raw(Box::new(TfsInverse { result, times })) };
    Ok(())
}

/// Recovers `f` from the problem's own `g`.
///
/// # Safety
/// `problem` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tfs_invert(
    problem: *const TfsProblem,
    out: *mut *mut TfsInverse,
) -> TfsStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        emit_inverse(invert(&p.spec)?, out)
    })
}

/// Recovers `f` from caller samples `g[0..len]` on the problem's time grid.
/// Any `f` or `g` in the problem is ignored.
///
/// # Safety
/// `g` must point to `len` readable values; `problem` must be a live handle;
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tfs_invert_samples(
    problem: *const TfsProblem,
    g: *const f64,
    len: usize,
    out: *mut *mut TfsInverse,
) -> TfsStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        if g.is_null() {
            return Err(Failure::Null("g"));
        }
        let samples = std::slice::from_raw_parts(g, len).to_vec();
        let mut spec = p.spec.clone();
        spec.f = None;
        spec.g = None;
        let setup = Setup::new(&spec)?;
        let series = TimeSeries::new(setup.time, samples)?;
        let table = RelaxationTable::new(setup.alpha, &setup.coeffs.lambdas, setup.time)?;
        emit_inverse(
            invert_series(&setup, &table, &series, &spec.solver, spec.noise.eps)?,
            out,
        )
    })
}

/// Recovered `f(t_k)`.
///
/// # Safety
/// `inverse` must be a live handle; `out` must hold `capacity` values or be
/// NULL; `len` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tfs_inverse_values(
    inverse: *const TfsInverse,
    out: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> TfsStatus {
    guard(|| {
        copy_out(
            deref(inverse, "inverse")?.result.f.values(),
            out,
            capacity,
            len,
        )
    })
}

/// Time nodes matching [`tfs_inverse_values`].
///
/// # Safety
/// As for [`tfs_inverse_values`].
#[no_mangle]
pub unsafe extern "C" fn tfs_inverse_times(
    inverse: *const TfsInverse,
    out: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> TfsStatus {
    guard(|| copy_out(&deref(inverse, "inverse")?.times, out, capacity, len))
}

/// Named scalar diagnostic such as `second_kind_residual`,
/// `first_kind_residual`, `compat_series_defect` or `picard_iterations`.
///
/// # Safety
/// `inverse` must be a live handle; `name` a NUL-terminated string; `out`
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tfs_inverse_diagnostic(
    inverse: *const TfsInverse,
    name: *const c_char,
    out: *mut f64,
) -> TfsStatus {
    guard(|| {
        let inv = deref(inverse, "inverse")?;
        let name = c_str(name, "name")?;
        let value = inv
            .result
            .diagnostics()
            .into_iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::InvalidArgument(format!("no diagnostic named `{name}`")))?;
        *deref_mut(out, "out")? = value;
        Ok(())
    })
}

/// # Safety
/// `inverse` must come from `tfs_invert*` and not be used afterwards. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn tfs_inverse_free(inverse: *mut TfsInverse) {
    if !inverse.is_null() {
        drop(Box::from_raw(inverse));
    }
}
