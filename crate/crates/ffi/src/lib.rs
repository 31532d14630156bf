//! C ABI for `invex-core`.
//!
//! Problems are opaque handles created by `invex_problem_from_json` or
//! `invex_problem_from_fixture` and released with `invex_problem_free`.
//! Every fallible call returns an [`InvexStatus`]; on failure the message is
//! available from `invex_last_error_message` on the same thread. Strings
//! returned through `char **` out-parameters are owned by the caller and must
//! be released with `invex_string_free`. All solvers use default tolerances.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use invex_core::alternative::{gordan, motzkin};
use invex_core::invexity::{certify_pair, PairKind, PairOutcome};
use invex_core::problem::{evaluate, fixture, Problem};
use invex_core::report::{analyze, to_stable_json, AnalysisConfig};
use invex_core::{Error, ToleranceConfig};

/// Result codes shared by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvexStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed problem, bad dimensions, point outside the box, infeasible
    /// or degenerate pair, unknown fixture.
    InvalidInput = 3,
    /// The LP layer could not reach a trustworthy answer.
    Numerical = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvexPairKind {
    Invex = 0,
    StrictInvex = 1,
    KtInvex = 2,
    StrictKtInvex = 3,
}

impl From<InvexPairKind> for PairKind {
    fn from(k: InvexPairKind) -> Self {
        match k {
            InvexPairKind::Invex => PairKind::Invex,
            InvexPairKind::StrictInvex => PairKind::StrictInvex,
            InvexPairKind::KtInvex => PairKind::KtInvex,
            InvexPairKind::StrictKtInvex => PairKind::StrictKtInvex,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvexOutcome {
    Kernel = 0,
    Certificate = 1,
}

/// Scalar part of a pair verdict. Vectors are copied into caller buffers.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvexPairSummary {
    pub outcome: InvexOutcome,
    /// Minimum slack of the kernel; 0 for certificates.
    pub margin: f64,
    /// `lambda . (f(x) - f(xbar))` of the certificate; 0 for kernels.
    pub violation: f64,
}

/// Opaque problem handle.
pub struct InvexProblem(Problem);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: InvexStatus, message: impl Into<String>) -> InvexStatus {
    set_error(message.into());
    status
}

fn from_core(e: Error) -> InvexStatus {
    let status = match e {
        Error::Lp(_) => InvexStatus::Numerical,
        _ => InvexStatus::InvalidInput,
    };
    fail(status, e.to_string())
}

/// Runs `body` with panics mapped to `Internal`.
fn guard(body: impl FnOnce() -> Result<(), InvexStatus>) -> InvexStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => InvexStatus::Ok,
        Ok(Err(status)) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(InvexStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, InvexStatus> {
    if p.is_null() {
        return Err(fail(InvexStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(InvexStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn read_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], InvexStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(InvexStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Reads a row-major `rows x cols` matrix.
unsafe fn read_matrix(p: *const f64, rows: usize, cols: usize, what: &str) -> Result<Vec<Vec<f64>>, InvexStatus> {
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| fail(InvexStatus::InvalidInput, format!("{what} is too large")))?;
    let flat = read_slice(p, len, what)?;
    Ok((0..rows).map(|i| flat[i * cols..(i + 1) * cols].to_vec()).collect())
}

unsafe fn problem_ref<'a>(p: *const InvexProblem) -> Result<&'a Problem, InvexStatus> {
    p.as_ref()
        .map(|h| &h.0)
        .ok_or_else(|| fail(InvexStatus::NullPointer, "problem handle is null"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), InvexStatus> {
    if out.is_null() {
        return Err(fail(InvexStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

/// Copies `src` into an optional caller buffer of capacity `cap`.
unsafe fn copy_into(dst: *mut f64, cap: usize, src: &[f64], what: &str) -> Result<(), InvexStatus> {
    if dst.is_null() {
        return Ok(());
    }
    if cap < src.len() {
        return Err(fail(
            InvexStatus::InvalidInput,
            format!("{what} holds {cap} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

unsafe fn write_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> Result<(), InvexStatus> {
    let text = to_stable_json(value).map_err(from_core)?;
    let c = CString::new(text).map_err(|_| fail(InvexStatus::Internal, "JSON contains a NUL byte"))?;
    write_out(out, c.into_raw(), "output pointer")
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn invex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn invex_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invex_problem_from_json(json: *const c_char, out: *mut *mut InvexProblem) -> InvexStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let problem = Problem::from_json(text).map_err(from_core)?;
        write_out(out, Box::into_raw(Box::new(InvexProblem(problem))), "output pointer")
    })
}

/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invex_problem_from_fixture(name: *const c_char, out: *mut *mut InvexProblem) -> InvexStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let problem = fixture(name).map_err(from_core)?;
        write_out(out, Box::into_raw(Box::new(InvexProblem(problem))), "output pointer")
    })
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn invex_problem_free(problem: *mut InvexProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Writes the number of variables, objectives and constraints. Any output
/// pointer may be null.
///
/// # Safety
/// `problem` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn invex_problem_dims(
    problem: *const InvexProblem,
    variables: *mut usize,
    objectives: *mut usize,
    constraints: *mut usize,
) -> InvexStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        for (out, v) in [(variables, p.dim()), (objectives, p.objective_count()), (constraints, p.constraint_count())] {
            if !out.is_null() {
                out.write(v);
            }
        }
        Ok(())
    })
}

/// Evaluates objectives and constraints at `x`. `f_out` and `g_out` may be
/// null; otherwise they must hold `f_cap` and `g_cap` values.
///
/// # Safety
/// `x` must point to `n` doubles; buffers must match their capacities.
#[no_mangle]
pub unsafe extern "C" fn invex_evaluate(
    problem: *const InvexProblem,
    x: *const f64,
    n: usize,
    f_out: *mut f64,
    f_cap: usize,
    g_out: *mut f64,
    g_cap: usize,
    feasible: *mut bool,
) -> InvexStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        let x = read_slice(x, n, "x")?;
        let point = evaluate(p, x, &ToleranceConfig::default()).map_err(from_core)?;
        copy_into(f_out, f_cap, &point.f, "f_out")?;
        copy_into(g_out, g_cap, &point.g, "g_out")?;
        if !feasible.is_null() {
            feasible.write(point.feasible);
        }
        Ok(())
    })
}

unsafe fn pair_verdict(
    problem: *const InvexProblem,
    kind: InvexPairKind,
    xbar: *const f64,
    x: *const f64,
    n: usize,
) -> Result<invex_core::invexity::PairVerdict, InvexStatus> {
    let p = problem_ref(problem)?;
    let tol = ToleranceConfig::default();
    let pbar = evaluate(p, read_slice(xbar, n, "xbar")?, &tol).map_err(from_core)?;
    let px = evaluate(p, read_slice(x, n, "x")?, &tol).map_err(from_core)?;
    certify_pair(kind.into(), &pbar, &px, &tol).map_err(from_core)
}

/// Certifies one pair. For a kernel, `eta` (capacity `eta_cap`) receives the
/// direction; for a certificate, `lambda` (capacity `lambda_cap`) receives
/// the objective multipliers. Either buffer may be null.
///
/// # Safety
/// `xbar` and `x` must point to `n` doubles; buffers must match capacities.
#[no_mangle]
pub unsafe extern "C" fn invex_certify_pair(
    problem: *const InvexProblem,
    kind: InvexPairKind,
    xbar: *const f64,
    x: *const f64,
    n: usize,
    eta: *mut f64,
    eta_cap: usize,
    lambda: *mut f64,
    lambda_cap: usize,
    summary: *mut InvexPairSummary,
) -> InvexStatus {
    guard(|| {
        let v = pair_verdict(problem, kind, xbar, x, n)?;
        let s = match &v.outcome {
            PairOutcome::Kernel(k) => {
                copy_into(eta, eta_cap, &k.eta, "eta")?;
                InvexPairSummary {
                    outcome: InvexOutcome::Kernel,
                    margin: k.margin,
                    violation: 0.0,
                }
            }
            PairOutcome::Certificate(c) => {
                copy_into(lambda, lambda_cap, &c.lambda, "lambda")?;
                InvexPairSummary {
                    outcome: InvexOutcome::Certificate,
                    margin: 0.0,
                    violation: c.violation,
                }
            }
        };
        write_out(summary, s, "summary")
    })
}

/// Same as `invex_certify_pair`, returning the full verdict as JSON.
///
/// # Safety
/// As for `invex_certify_pair`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invex_certify_pair_json(
    problem: *const InvexProblem,
    kind: InvexPairKind,
    xbar: *const f64,
    x: *const f64,
    n: usize,
    out: *mut *mut c_char,
) -> InvexStatus {
    guard(|| write_json(&pair_verdict(problem, kind, xbar, x, n)?, out))
}

/// Gordan alternative for the row-major `rows x cols` matrix `a`.
///
/// # Safety
/// `a` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invex_gordan_json(
    a: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut c_char,
) -> InvexStatus {
    guard(|| {
        let a = read_matrix(a, rows, cols, "a")?;
        write_json(&gordan(&a, &ToleranceConfig::default()).map_err(from_core)?, out)
    })
}

/// Motzkin alternative for row-major `a` (`a_rows x cols`) and `b`
/// (`b_rows x cols`). `b` may be null when `b_rows` is 0.
///
/// # Safety
/// Matrices must hold the stated number of doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invex_motzkin_json(
    a: *const f64,
    a_rows: usize,
    b: *const f64,
    b_rows: usize,
    cols: usize,
    out: *mut *mut c_char,
) -> InvexStatus {
    guard(|| {
        let a = read_matrix(a, a_rows, cols, "a")?;
        let b = read_matrix(b, b_rows, cols, "b")?;
        write_json(&motzkin(&a, &b, &ToleranceConfig::default()).map_err(from_core)?, out)
    })
}

/// Full analysis report with default settings, as stable JSON.
///
/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invex_analyze_json(problem: *const InvexProblem, out: *mut *mut c_char) -> InvexStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        write_json(&analyze(p, &AnalysisConfig::default()).map_err(from_core)?, out)
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn invex_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
