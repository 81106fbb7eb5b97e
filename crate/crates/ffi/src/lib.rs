//! C interface. Every entry point returns an [`FeStatus`]; results come
//! back through out-pointers. Handles are opaque and owned by the caller
//! until passed to the matching `*_free`. On failure the thread's last
//! error message is set.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use figure_eight::cli::{refine_input, solve, verify_input, RunConfig, SolutionInput};
use figure_eight::loop_space::FourierLoop;
use figure_eight::refiner::RefinedSolution;
use figure_eight::verifier::VerificationReport;
use figure_eight::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Parse = 4,
    Io = 5,
    Panic = 6,
}

/// A Fourier loop, with the action when it came from the minimizer.
pub struct FeLoop {
    inner: FourierLoop,
    action: f64,
}

/// Refined shooting unknowns.
pub struct FeSolution {
    inner: RefinedSolution,
}

pub struct FeReport {
    inner: VerificationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FeStatus {
    match e {
        Error::Json(_) => FeStatus::Parse,
        Error::Io(_) | Error::Csv(_) => FeStatus::Io,
        e if e.is_numerical() => FeStatus::Numerical,
        _ => FeStatus::InvalidArgument,
    }
}

struct Fail(FeStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FeStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> FeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FeStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FeStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(FeStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

// NULL selects the defaults.
unsafe fn config(json: *const c_char) -> Result<RunConfig, Fail> {
    if json.is_null() {
        return Ok(RunConfig::default());
    }
    let c = RunConfig::from_json(text(json, "config")?)?;
    c.validate()?;
    Ok(c)
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(FeStatus::InvalidArgument, "string contains NUL".into()))
}

/// Message for the last failed call on this thread, or NULL after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fe_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Minimizes the action from the seed loop. `config_json` may be NULL.
///
/// # Safety
/// `config_json` is NULL or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fe_solve(config_json: *const c_char, out: *mut *mut FeLoop) -> FeStatus {
    guard(|| {
        let m = solve(&config(config_json)?)?;
        let l = Box::new(FeLoop { inner: m.solution, action: m.action });
        put(out, Box::into_raw(l), "out")
    })
}

/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fe_loop_from_json(json: *const c_char, out: *mut *mut FeLoop) -> FeStatus {
    guard(|| {
        let inner = FourierLoop::from_json(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(FeLoop { inner, action: f64::NAN })), "out")
    })
}

/// # Safety
/// `l` is a live handle; `out` is writable. Free the string with [`fe_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fe_loop_to_json(l: *const FeLoop, out: *mut *mut c_char) -> FeStatus {
    guard(|| put(out, c_string(handle(l, "loop")?.inner.to_json()?)?, "out"))
}

/// Action at the minimum, NaN for loaded loops.
///
/// # Safety
/// `l` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fe_loop_action(l: *const FeLoop, out: *mut f64) -> FeStatus {
    guard(|| put(out, handle(l, "loop")?.action, "out"))
}

/// # Safety
/// `l` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fe_loop_free(l: *mut FeLoop) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Extracts shooting unknowns from the loop and refines them.
///
/// # Safety
/// `l` is a live handle; `config_json` is NULL or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fe_refine(
    l: *const FeLoop,
    config_json: *const c_char,
    out: *mut *mut FeSolution,
) -> FeStatus {
    guard(|| {
        let input = SolutionInput::Loop(handle(l, "loop")?.inner.clone());
        let (inner, _) = refine_input(&input, &config(config_json)?)?;
        put(out, Box::into_raw(Box::new(FeSolution { inner })), "out")
    })
}

/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fe_solution_from_json(json: *const c_char, out: *mut *mut FeSolution) -> FeStatus {
    guard(|| {
        let inner = RefinedSolution::from_json(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(FeSolution { inner })), "out")
    })
}

/// # Safety
/// `s` is a live handle; `out` is writable. Free the string with [`fe_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fe_solution_to_json(s: *const FeSolution, out: *mut *mut c_char) -> FeStatus {
    guard(|| put(out, c_string(handle(s, "solution")?.inner.to_json()?)?, "out"))
}

/// Writes `x2, y3, u, w` at `t = −T/12`.
///
/// # Safety
/// `s` is a live handle; `out` points to four writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fe_solution_unknowns(s: *const FeSolution, out: *mut f64) -> FeStatus {
    guard(|| {
        let u = handle(s, "solution")?.inner.unknowns;
        if out.is_null() {
            return Err(null("out"));
        }
        let values = [u.x2_start, u.y3_start, u.u_start, u.w_start];
        ptr::copy_nonoverlapping(values.as_ptr(), out, 4);
        Ok(())
    })
}

/// # Safety
/// `s` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fe_solution_residual_norm(s: *const FeSolution, out: *mut f64) -> FeStatus {
    guard(|| put(out, handle(s, "solution")?.inner.residual_norm, "out"))
}

/// # Safety
/// `s` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fe_solution_free(s: *mut FeSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Runs every check on the solution. A report with failed checks is still
/// `FE_STATUS_OK`; inspect it with [`fe_report_all_passed`].
///
/// # Safety
/// `s` is a live handle; `config_json` is NULL or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fe_verify(
    s: *const FeSolution,
    config_json: *const c_char,
    out: *mut *mut FeReport,
) -> FeStatus {
    guard(|| {
        let input = SolutionInput::Refined(handle(s, "solution")?.inner);
        let inner = verify_input(&input, &config(config_json)?)?;
        put(out, Box::into_raw(Box::new(FeReport { inner })), "out")
    })
}

/// # Safety
/// `r` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fe_report_all_passed(r: *const FeReport, out: *mut bool) -> FeStatus {
    guard(|| put(out, handle(r, "report")?.inner.all_passed(), "out"))
}

/// # Safety
/// `r` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fe_report_check_count(r: *const FeReport, out: *mut usize) -> FeStatus {
    guard(|| put(out, handle(r, "report")?.inner.checks.len(), "out"))
}

/// Outcome of check `index`. Any out-pointer may be NULL; the name must be
/// freed with [`fe_string_free`].
///
/// # Safety
/// `r` is a live handle; non-NULL out-pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn fe_report_check(
    r: *const FeReport,
    index: usize,
    name: *mut *mut c_char,
    passed: *mut bool,
    margin: *mut f64,
) -> FeStatus {
    guard(|| {
        let checks = &handle(r, "report")?.inner.checks;
        let c = checks.get(index).ok_or_else(|| {
            Fail(FeStatus::InvalidArgument, format!("check index {index} out of range ({})", checks.len()))
        })?;
        if !passed.is_null() {
            passed.write(c.passed);
        }
        if !margin.is_null() {
            margin.write(c.worst_margin);
        }
        if !name.is_null() {
            name.write(c_string(c.name.clone())?);
        }
        Ok(())
    })
}

/// # Safety
/// `r` is a live handle; `out` is writable. Free the string with [`fe_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fe_report_to_json(r: *const FeReport, out: *mut *mut c_char) -> FeStatus {
    guard(|| put(out, c_string(handle(r, "report")?.inner.to_json()?)?, "out"))
}

/// # Safety
/// `r` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fe_report_free(r: *mut FeReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
