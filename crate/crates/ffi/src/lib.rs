//! C interface to `spectral-fractal`.
//!
//! Problems and reports are opaque handles. Every function returns an
//! [`SfStatus`]; the message of the last failure on the calling thread is
//! available from [`sf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spectral_fractal::cli::{verify, Job, ProblemFile, ReportFile, REPLAY_TOL};
use spectral_fractal::measure::FourierEval;
use spectral_fractal::triples::validate_triple;
use spectral_fractal::zeroset::{analyze, ZeroSetStatus};
use spectral_fractal::Error;

/// Status codes. Values 2 to 5 match the exit codes of the command-line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Refused = 3,
    Inconclusive = 4,
    CapExceeded = 5,
    Panic = 6,
}

/// Outcome of the periodic zero-set analysis.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfZeroSet {
    Empty = 0,
    NonEmpty = 1,
    Undecided = 2,
}

/// An affine pair `(R, B)`, optionally with a dual digit set `L`.
pub struct SfProblem(ProblemFile);

/// A finished report.
pub struct SfReport {
    report: ReportFile,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SfStatus {
    match e.exit_code() {
        2 => SfStatus::InvalidInput,
        4 => SfStatus::Inconclusive,
        5 => SfStatus::CapExceeded,
        _ => SfStatus::Refused,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SfStatus>) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            SfStatus::Panic
        }
    }
}

fn fail(e: Error) -> SfStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null() -> SfStatus {
    set_error("null pointer argument");
    SfStatus::NullPointer
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, SfStatus> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(Error::InvalidInput("string is not UTF-8".into())))
}

unsafe fn rows(data: *const i64, count: usize, d: usize) -> Result<Vec<Vec<i64>>, SfStatus> {
    if data.is_null() {
        return Err(null());
    }
    let flat = std::slice::from_raw_parts(data, count * d);
    Ok(flat.chunks(d).map(<[i64]>::to_vec).collect())
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to `len`).
/// Returns the full message length without the terminator.
#[no_mangle]
pub unsafe extern "C" fn sf_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a problem from row-major arrays: `r` is `d x d`, `b` is `n x d`,
/// `l` is `n_l x d` or null.
#[no_mangle]
pub unsafe extern "C" fn sf_problem_new(
    d: usize,
    r: *const i64,
    b: *const i64,
    n: usize,
    l: *const i64,
    n_l: usize,
    out: *mut *mut SfProblem,
) -> SfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        if d == 0 || n == 0 {
            return Err(fail(Error::InvalidInput("dimension and digit count must be positive".into())));
        }
        let rr = rows(r, d, d)?;
        let bb = rows(b, n, d)?;
        let ll = if l.is_null() { None } else { Some(rows(l, n_l, d)?) };
        let p = ProblemFile::new(&rr, &bb, ll.as_deref());
        p.pair().map_err(fail)?;
        *out = Box::into_raw(Box::new(SfProblem(p)));
        Ok(())
    })
}

/// Parses a JSON problem file.
#[no_mangle]
pub unsafe extern "C" fn sf_problem_from_json(json: *const c_char, out: *mut *mut SfProblem) -> SfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let p = ProblemFile::parse(str_arg(json)?).map_err(fail)?;
        p.pair().map_err(fail)?;
        *out = Box::into_raw(Box::new(SfProblem(p)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sf_problem_free(p: *mut SfProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Unitarity defect of the Hadamard matrix; `valid` is set when it is within tolerance.
#[no_mangle]
pub unsafe extern "C" fn sf_validate(p: *const SfProblem, valid: *mut bool, defect: *mut f64) -> SfStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        if valid.is_null() || defect.is_null() {
            return Err(null());
        }
        let pair = p.0.pair().map_err(fail)?;
        let l = p.0.dual().map_err(fail)?.ok_or_else(|| fail(Error::InvalidInput("the problem has no dual digit set L".into())))?;
        let (ok, def) = validate_triple(pair.r(), pair.digits(), &l).map_err(fail)?;
        *valid = ok;
        *defect = def;
        Ok(())
    })
}

/// `mu_hat(xi)` for `xi` of length `d`.
#[no_mangle]
pub unsafe extern "C" fn sf_mu_hat(p: *const SfProblem, xi: *const f64, d: usize, re: *mut f64, im: *mut f64) -> SfStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        if xi.is_null() || re.is_null() || im.is_null() {
            return Err(null());
        }
        let pair = p.0.pair().map_err(fail)?;
        if d != pair.dim() {
            return Err(fail(Error::DimensionMismatch(format!("xi has length {d}, expected {}", pair.dim()))));
        }
        let v = FourierEval::new(&pair).mu_hat(std::slice::from_raw_parts(xi, d));
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// Decides the periodic zero set with the problem's configuration.
#[no_mangle]
pub unsafe extern "C" fn sf_zero_set(p: *const SfProblem, out: *mut SfZeroSet) -> SfStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let pair = p.0.pair().map_err(fail)?;
        *out = match analyze(&FourierEval::new(&pair), &p.0.config.zero).status {
            ZeroSetStatus::Empty { .. } => SfZeroSet::Empty,
            ZeroSetStatus::NonEmpty { .. } => SfZeroSet::NonEmpty,
            ZeroSetStatus::Undecided => SfZeroSet::Undecided,
        };
        Ok(())
    })
}

/// Runs a job given as JSON, e.g. `{"command": "spectrum"}` or
/// `{"command": "frames", "levels": [2], "strategy": "greedy"}`.
#[no_mangle]
pub unsafe extern "C" fn sf_run(p: *const SfProblem, job_json: *const c_char, out: *mut *mut SfReport) -> SfStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let job: Job = serde_json::from_str(str_arg(job_json)?).map_err(|e| fail(Error::InvalidInput(format!("job: {e}"))))?;
        let report = ReportFile::create(job, p.0.clone(), REPLAY_TOL).map_err(fail)?;
        let json = CString::new(report.to_json()).map_err(|_| fail(Error::InvalidInput("report contains NUL".into())))?;
        *out = Box::into_raw(Box::new(SfReport { report, json }));
        Ok(())
    })
}

/// The report as JSON, owned by the handle.
#[no_mangle]
pub unsafe extern "C" fn sf_report_json(r: *const SfReport) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// Exit code the command-line tool would return for this report.
#[no_mangle]
pub unsafe extern "C" fn sf_report_exit_code(r: *const SfReport) -> i32 {
    r.as_ref().map_or(-1, |r| r.report.verdict.exit_code())
}

#[no_mangle]
pub unsafe extern "C" fn sf_report_free(r: *mut SfReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Replays a JSON report; `passed` is set when every check passes.
#[no_mangle]
pub unsafe extern "C" fn sf_verify(report_json: *const c_char, passed: *mut bool) -> SfStatus {
    guard(|| {
        if passed.is_null() {
            return Err(null());
        }
        let report = ReportFile::parse(str_arg(report_json)?).map_err(fail)?;
        let checks = verify(&report);
        if let Some(c) = checks.iter().find(|c| !c.pass) {
            set_error(&format!("{}: {}", c.name, c.detail));
        }
        *passed = checks.iter().all(|c| c.pass);
        Ok(())
    })
}
