//! C interface to `rodpade`.
//!
//! Conventions: every fallible call returns an [`RpStatus`]; on failure a
//! message is available from [`rp_last_error_message`] on the same thread.
//! Strings returned through out-parameters are owned by the caller and
//! released with [`rp_string_free`]. Tables are opaque handles released
//! with [`rp_pade_table_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rodpade::criterion::{self, Place};
use rodpade::mpl::{self, MplConfig};
use rodpade::transform::{self, PadeTable};
use rodpade::{rational, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    DegenerateAlphas = 4,
    BadBeta = 5,
    VerificationFailed = 6,
    Panic = 7,
}

/// A built Padé table.
pub struct RpPadeTable {
    table: PadeTable,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RpStatus {
    match e {
        Error::DegenerateAlphas => RpStatus::DegenerateAlphas,
        Error::BadBeta { .. } => RpStatus::BadBeta,
        Error::NonConstantDeterminant(_) | Error::ZeroDeterminant | Error::RouteMismatch(_) => {
            RpStatus::VerificationFailed
        }
        _ => RpStatus::InvalidConfig,
    }
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (RpStatus, String)>) -> RpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RpStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            RpStatus::Panic
        }
    }
}

fn lib(e: Error) -> (RpStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RpStatus, String)> {
    if p.is_null() {
        return Err((RpStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (RpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), (RpStatus, String)> {
    let c = CString::new(s)
        .map_err(|_| (RpStatus::InvalidConfig, "output contains nul".to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn config(m: usize, r: usize, alphas: &str) -> Result<MplConfig, (RpStatus, String)> {
    let alphas = alphas
        .split(',')
        .map(|a| rational::parse(a.trim()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(lib)?;
    MplConfig::new(m, r, alphas).map_err(lib)
}

/// Builds the table for `m`, `r`, comma-separated `alphas` and `n`.
///
/// # Safety
/// `alphas` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_pade_table_new(
    m: usize,
    r: usize,
    alphas: *const c_char,
    n: usize,
    out: *mut *mut RpPadeTable,
) -> RpStatus {
    guard(|| {
        if out.is_null() {
            return Err((RpStatus::NullPointer, "out is null".into()));
        }
        let cfg = config(m, r, read_str(alphas, "alphas")?)?;
        let table = mpl::pade_table(&cfg, n).map_err(lib)?;
        *out = Box::into_raw(Box::new(RpPadeTable { table }));
        Ok(())
    })
}

/// # Safety
/// `table` must come from [`rp_pade_table_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rp_pade_table_free(table: *mut RpPadeTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of rows (functions) and columns of a table.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_pade_table_dims(
    table: *const RpPadeTable,
    rows: *mut usize,
    columns: *mut usize,
) -> RpStatus {
    guard(|| {
        if table.is_null() || rows.is_null() || columns.is_null() {
            return Err((RpStatus::NullPointer, "null argument".into()));
        }
        let t = &(*table).table;
        *rows = t.rows.len();
        *columns = t.columns.len();
        Ok(())
    })
}

/// The table as JSON, with rationals as strings.
///
/// # Safety
/// `table` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_pade_table_to_json(
    table: *const RpPadeTable,
    out: *mut *mut c_char,
) -> RpStatus {
    guard(|| {
        if table.is_null() || out.is_null() {
            return Err((RpStatus::NullPointer, "null argument".into()));
        }
        let s = serde_json::to_string(&(*table).table).expect("table serializes");
        out_string(s, out)
    })
}

/// The determinant of the table as a rational string such as `"1/2"`.
/// Fails with `VERIFICATION_FAILED` if it is not a nonzero constant.
///
/// # Safety
/// `table` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_delta_constant(
    table: *const RpPadeTable,
    out: *mut *mut c_char,
) -> RpStatus {
    guard(|| {
        if table.is_null() || out.is_null() {
            return Err((RpStatus::NullPointer, "null argument".into()));
        }
        let det = transform::delta_det(&(*table).table);
        let c = transform::require_nonzero_constant(&det).map_err(lib)?;
        out_string(rational::to_string(&c), out)
    })
}

/// Evaluates the criterion and writes the report as JSON. `passes` is set
/// to 1 when both hypotheses hold and 0 otherwise.
///
/// # Safety
/// String arguments must be valid C strings; `out_json` and `passes` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_criterion_evaluate(
    m: usize,
    r: usize,
    alphas: *const c_char,
    beta: *const c_char,
    place: *const c_char,
    out_json: *mut *mut c_char,
    passes: *mut c_int,
) -> RpStatus {
    guard(|| {
        if out_json.is_null() || passes.is_null() {
            return Err((RpStatus::NullPointer, "null argument".into()));
        }
        let cfg = config(m, r, read_str(alphas, "alphas")?)?;
        let beta = rational::parse(read_str(beta, "beta")?).map_err(lib)?;
        let place: Place = read_str(place, "place")?.parse().map_err(lib)?;
        let rep =
            criterion::evaluate_criterion(&cfg.alphas, &beta, m, r, place, false).map_err(lib)?;
        *passes = c_int::from(rep.passes());
        out_string(
            serde_json::to_string(&rep).expect("report serializes"),
            out_json,
        )
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn rp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
