//! C interface. Spectra live behind an opaque handle; every call returns an
//! [`LeStatus`] and writes results through out-pointers. The message of the
//! most recent failure on the calling thread is available from
//! [`le_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use locc_exponents::exponents::{critical_rates, ClassTag, ExponentCurve};
use locc_exponents::protocol::{
    build_hoeffding_collection, build_stein_collection, build_zero_error_collection, evaluate_test,
    MeasureCollection, ShellParams,
};
use locc_exponents::separable::sep_sandwich;
use locc_exponents::spectrum::renyi_entropy;
use locc_exponents::typelattice::one_way_log_beta_exact;
use locc_exponents::{Error, SchmidtSpectrum};

/// Opaque spectrum handle.
pub struct LeSpectrum(SchmidtSpectrum);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidSpectrum = 3,
    Uniform = 4,
    Budget = 5,
    EmptySet = 6,
    Infeasible = 7,
    ShellTooSmall = 8,
    OutOfRange = 9,
    Json = 10,
    Panic = 11,
    Other = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeClass {
    OneWay = 0,
    TwoWay = 1,
    Separable = 2,
    Global = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeConstruction {
    Hoeffding = 0,
    ZeroError = 1,
    Stein = 2,
}

/// Separable sandwich at one threshold. `r_tilde` is NaN when absent.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeSandwich {
    pub r_prime: f64,
    pub log_beta_value: f64,
    pub log_beta_bipartite: f64,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    pub r_min: f64,
    pub r_tilde: f64,
    pub exact: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LeStatus {
    match e {
        Error::InvalidSpectrum(_) | Error::InvalidDistribution(_) => LeStatus::InvalidSpectrum,
        Error::InvalidArgument(_) | Error::UnknownSuite(_) => LeStatus::InvalidArgument,
        Error::Uniform => LeStatus::Uniform,
        Error::Budget { .. } => LeStatus::Budget,
        Error::EmptySet(_) => LeStatus::EmptySet,
        Error::Infeasible(_) => LeStatus::Infeasible,
        Error::ShellTooSmall { .. } => LeStatus::ShellTooSmall,
        Error::RateOutOfRange { .. } | Error::NoCrossing(_) => LeStatus::OutOfRange,
        Error::Json(_) => LeStatus::Json,
        _ => LeStatus::Other,
    }
}

/// Runs `f`, mapping errors and panics to a status.
fn guard<F: FnOnce() -> Result<(), (LeStatus, String)>>(f: F) -> LeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LeStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            LeStatus::Panic
        }
    }
}

fn lift(e: Error) -> (LeStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LeStatus, String) {
    (LeStatus::NullPointer, format!("{what} is null"))
}

unsafe fn spec_ref<'a>(h: *const LeSpectrum) -> Result<&'a SchmidtSpectrum, (LeStatus, String)> {
    h.as_ref().map(|s| &s.0).ok_or_else(|| null("spectrum handle"))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), (LeStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`) and returns its full length, or 0 when
/// there is none.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn le_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let k = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, k);
                *buf.add(k) = 0;
            }
            bytes.len()
        }
    })
}

/// Creates a spectrum from `len = min(dim_a, dim_b)` coefficients.
///
/// # Safety
/// `lambdas` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_spectrum_new(
    lambdas: *const f64,
    len: usize,
    dim_a: usize,
    dim_b: usize,
    out: *mut *mut LeSpectrum,
) -> LeStatus {
    guard(|| {
        if lambdas.is_null() {
            return Err(null("lambdas"));
        }
        let v = std::slice::from_raw_parts(lambdas, len).to_vec();
        let s = SchmidtSpectrum::new(v, dim_a, dim_b).map_err(lift)?;
        write(out, Box::into_raw(Box::new(LeSpectrum(s))), "out")
    })
}

/// Releases a handle from [`le_spectrum_new`]. Null is ignored.
///
/// # Safety
/// `h` must come from [`le_spectrum_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn le_spectrum_free(h: *mut LeSpectrum) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of coefficients, or 0 for a null handle.
///
/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn le_spectrum_len(h: *const LeSpectrum) -> usize {
    h.as_ref().map_or(0, |s| s.0.lambdas().len())
}

/// Copies the (sorted) coefficients into `out[0..len]`.
///
/// # Safety
/// `out` must be writable for [`le_spectrum_len`] doubles.
#[no_mangle]
pub unsafe extern "C" fn le_spectrum_lambdas(h: *const LeSpectrum, out: *mut f64) -> LeStatus {
    guard(|| {
        let s = spec_ref(h)?;
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(s.lambdas().as_ptr(), out, s.lambdas().len());
        Ok(())
    })
}

/// Rényi entropy `H_α`.
///
/// # Safety
/// `h` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn le_renyi_entropy(h: *const LeSpectrum, alpha: f64, out: *mut f64) -> LeStatus {
    guard(|| {
        let v = renyi_entropy(spec_ref(h)?, alpha).map_err(lift)?;
        write(out, v, "out")
    })
}

/// Hoeffding exponent of a measurement class at rate `r`.
///
/// # Safety
/// `h` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn le_hoeffding(h: *const LeSpectrum, class: LeClass, r: f64, out: *mut f64) -> LeStatus {
    guard(|| {
        if !(r >= 0.0) {
            return Err((LeStatus::InvalidArgument, format!("rate {r} must be non-negative")));
        }
        let tag = match class {
            LeClass::OneWay => ClassTag::OneWay,
            LeClass::TwoWay => ClassTag::TwoWay,
            LeClass::Separable => ClassTag::Separable,
            LeClass::Global => ClassTag::Global,
        };
        write(out, ExponentCurve::new(spec_ref(h)?, tag).evaluate(r), "out")
    })
}

/// Rates where the one-way and two-way curves reach their plateaus.
///
/// # Safety
/// `h` must be a live handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn le_critical_rates(h: *const LeSpectrum, r_one_way: *mut f64, r_two_way: *mut f64) -> LeStatus {
    guard(|| {
        let (a, b) = critical_rates(spec_ref(h)?);
        write(r_one_way, a, "r_one_way")?;
        write(r_two_way, b, "r_two_way")
    })
}

/// Exact optimal one-way `log β` at type-1 level `alpha` for `n` copies.
///
/// # Safety
/// `h` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn le_one_way_log_beta(h: *const LeSpectrum, n: usize, alpha: f64, out: *mut f64) -> LeStatus {
    guard(|| {
        let v = one_way_log_beta_exact(spec_ref(h)?, n, alpha).map_err(lift)?;
        write(out, v, "out")
    })
}

/// Separable sandwich at threshold `r_prime` for `n` copies.
///
/// # Safety
/// `h` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn le_sep_sandwich(h: *const LeSpectrum, n: usize, r_prime: f64, out: *mut LeSandwich) -> LeStatus {
    guard(|| {
        let s = spec_ref(h)?;
        let res = sep_sandwich(s, n, r_prime).map_err(lift)?;
        let v = LeSandwich {
            r_prime: res.r_prime,
            log_beta_value: res.log_beta_value,
            log_beta_bipartite: res.log_beta_bipartite(s, n),
            alpha_lower: res.alpha_lower,
            alpha_upper: res.alpha_upper,
            r_min: res.r_min,
            r_tilde: res.r_tilde.unwrap_or(f64::NAN),
            exact: res.exact,
        };
        write(out, v, "out")
    })
}

/// Builds a measure collection and returns it as a JSON string to be
/// released with [`le_string_free`]. `param` is the rate `r` for
/// Hoeffding, the target type-1 error for Stein, and ignored otherwise.
///
/// # Safety
/// `h` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn le_build_collection(
    h: *const LeSpectrum,
    kind: LeConstruction,
    n: usize,
    param: f64,
    out: *mut *mut c_char,
) -> LeStatus {
    guard(|| {
        let s = spec_ref(h)?;
        let coll = match kind {
            LeConstruction::Hoeffding => build_hoeffding_collection(s, n, param),
            LeConstruction::ZeroError => build_zero_error_collection(s, n),
            LeConstruction::Stein => ShellParams::defaults(s).and_then(|p| build_stein_collection(s, n, param, p)),
        }
        .map_err(lift)?;
        let js = serde_json::to_string(&coll).map_err(|e| lift(e.into()))?;
        let c = CString::new(js).map_err(|e| (LeStatus::Other, e.to_string()))?;
        write(out, c.into_raw(), "out")
    })
}

/// Exact type-1 error and `log β` of a JSON collection.
///
/// # Safety
/// `h` must be a live handle; `json` a NUL-terminated UTF-8 string;
/// outputs writable.
#[no_mangle]
pub unsafe extern "C" fn le_evaluate_collection(
    h: *const LeSpectrum,
    json: *const c_char,
    alpha: *mut f64,
    log_beta: *mut f64,
) -> LeStatus {
    guard(|| {
        let s = spec_ref(h)?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (LeStatus::InvalidArgument, e.to_string()))?;
        let coll: MeasureCollection = serde_json::from_str(text).map_err(|e| lift(e.into()))?;
        let o = evaluate_test(s, &coll).map_err(lift)?;
        write(alpha, o.alpha, "alpha")?;
        write(log_beta, o.log_beta, "log_beta")
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn le_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
