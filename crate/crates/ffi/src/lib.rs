//! C ABI over `causal-spaces`.
//!
//! Spaces live behind the opaque [`CsSpace`] handle. Every fallible function returns a
//! [`CsStatus`]; on failure, [`cs_last_error`] describes the most recent error on the
//! calling thread. Strings returned through `char **` out-parameters are owned by the
//! caller and released with [`cs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use causal_spaces::causal::{intervene_hard, validate_causal_space, CausalSpace};
use causal_spaces::cli::{parse_event, parse_subset, SpaceDocument};
use causal_spaces::compilers::{compile_scm, ScmSpec};
use causal_spaces::effects::{classify_effect, EffectClass};
use causal_spaces::gaussian::brownian_csv;
use causal_spaces::measure::Dist;
use causal_spaces::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Domain = 4,
    InvalidDistribution = 5,
    InvalidSpace = 6,
    NullSet = 7,
    Contract = 8,
    Cyclic = 9,
    Singular = 10,
    Internal = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsEffectClass {
    None = 0,
    Active = 1,
    Dormant = 2,
}

/// Opaque handle to a finite causal space.
pub struct CsSpace {
    inner: CausalSpace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CsStatus {
    match err {
        Error::Parse(_) => CsStatus::Parse,
        Error::Domain(_) | Error::Dimension(_) => CsStatus::Domain,
        Error::InvalidDistribution(_) => CsStatus::InvalidDistribution,
        Error::InvalidSpace(_) => CsStatus::InvalidSpace,
        Error::NullSet { .. } => CsStatus::NullSet,
        Error::Contract(_) => CsStatus::Contract,
        Error::Cyclic { .. } | Error::NotTopological(_) => CsStatus::Cyclic,
        Error::Singular(_) => CsStatus::Singular,
        Error::Internal(_) => CsStatus::Internal,
    }
}

struct Failure(CsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(CsStatus::Parse, format!("line {} column {}: {e}", e.line(), e.column()))
    }
}

/// Runs `body`, converting errors and panics into a status plus the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CsStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(CsStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(CsStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn space<'a>(p: *const CsSpace) -> Result<&'a CausalSpace, Failure> {
    p.as_ref()
        .map(|s| &s.inner)
        .ok_or_else(|| Failure(CsStatus::NullPointer, "space handle is NULL".into()))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(CsStatus::NullPointer, "output pointer is NULL".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure(CsStatus::Internal, e.to_string()))?;
    write_out(out, c.into_raw())
}

unsafe fn write_space(out: *mut *mut CsSpace, cs: CausalSpace) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(CsStatus::NullPointer, "output pointer is NULL".into()));
    }
    out.write(Box::into_raw(Box::new(CsSpace { inner: cs })));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a space document. The axioms are not checked; see [`cs_space_validate`].
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_space_from_json(json: *const c_char, out: *mut *mut CsSpace) -> CsStatus {
    guard(|| {
        let doc: SpaceDocument = serde_json::from_str(text(json, "json")?)?;
        write_space(out, doc.to_space()?)
    })
}

/// Compiles an SCM document.
///
/// # Safety
/// As for [`cs_space_from_json`].
#[no_mangle]
pub unsafe extern "C" fn cs_space_from_scm_json(json: *const c_char, out: *mut *mut CsSpace) -> CsStatus {
    guard(|| {
        let spec: ScmSpec = serde_json::from_str(text(json, "json")?)?;
        write_space(out, compile_scm(&spec)?)
    })
}

/// Serializes the space as a document listing every kernel.
///
/// # Safety
/// `cs` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_space_to_json(cs: *const CsSpace, out: *mut *mut c_char) -> CsStatus {
    guard(|| {
        let doc = SpaceDocument::from_space(space(cs)?);
        write_string(out, serde_json::to_string(&doc)?)
    })
}

/// Checks both axioms. `report` may be NULL; otherwise it receives the JSON report.
///
/// # Safety
/// `cs` must be NULL or a live handle; `valid` must be NULL or writable;
/// `report` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_space_validate(cs: *const CsSpace, valid: *mut bool, report: *mut *mut c_char) -> CsStatus {
    guard(|| {
        let r = validate_causal_space(space(cs)?);
        write_out(valid, r.is_valid())?;
        if !report.is_null() {
            write_string(report, serde_json::to_string(&r)?)?;
        }
        Ok(())
    })
}

/// Number of atoms of Ω, the length of the array [`cs_space_p`] fills.
///
/// # Safety
/// `cs` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_space_atoms(cs: *const CsSpace, out: *mut usize) -> CsStatus {
    guard(|| {
        let cs = space(cs)?;
        write_out(out, cs.space().atoms(cs.space().full()))
    })
}

/// Copies ℙ, row-major in ascending component index, into `buf[0..len]`.
///
/// # Safety
/// `cs` must be NULL or a live handle; `buf` must be NULL or hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_space_p(cs: *const CsSpace, buf: *mut f64, len: usize) -> CsStatus {
    guard(|| {
        let w = space(cs)?.p().weights();
        if buf.is_null() {
            return Err(Failure(CsStatus::NullPointer, "buffer is NULL".into()));
        }
        if len != w.len() {
            return Err(Failure(CsStatus::Domain, format!("buffer holds {len} values, ℙ has {}", w.len())));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(w);
        Ok(())
    })
}

/// Probability under ℙ of an event expression such as `"X=1 & Y in {0,2}"`.
///
/// # Safety
/// `cs` must be NULL or a live handle; `event` must be NULL or NUL-terminated;
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_space_probability(cs: *const CsSpace, event: *const c_char, out: *mut f64) -> CsStatus {
    guard(|| {
        let cs = space(cs)?;
        let a = parse_event(cs.space(), text(event, "event")?)?;
        write_out(out, cs.prob(&a)?)
    })
}

/// Hard intervention on the components listed in `on` (indices or names, e.g. `"0,2"`)
/// with measure `q[0..q_len]` on Ω_U, row-major. Writes a new handle to `out`.
///
/// # Safety
/// `cs` must be NULL or a live handle; `on` must be NULL or NUL-terminated;
/// `q` must be NULL or hold `q_len` doubles; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_space_intervene_hard(
    cs: *const CsSpace,
    on: *const c_char,
    q: *const f64,
    q_len: usize,
    out: *mut *mut CsSpace,
) -> CsStatus {
    guard(|| {
        let cs = space(cs)?;
        let u = parse_subset(cs.space(), text(on, "on")?)?;
        if q.is_null() {
            return Err(Failure(CsStatus::NullPointer, "q is NULL".into()));
        }
        let weights = std::slice::from_raw_parts(q, q_len).to_vec();
        let q = Dist::new(cs.space().clone(), u, weights)?;
        write_space(out, intervene_hard(cs, u, &q)?)
    })
}

/// Effect class of ℋ_U on an event.
///
/// # Safety
/// `cs` must be NULL or a live handle; `u` and `event` must be NULL or NUL-terminated;
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_space_classify(
    cs: *const CsSpace,
    u: *const c_char,
    event: *const c_char,
    out: *mut CsEffectClass,
) -> CsStatus {
    guard(|| {
        let cs = space(cs)?;
        let u = parse_subset(cs.space(), text(u, "u")?)?;
        let a = parse_event(cs.space(), text(event, "event")?)?;
        let class = match classify_effect(cs, u, &a)? {
            EffectClass::None => CsEffectClass::None,
            EffectClass::Active => CsEffectClass::Active,
            EffectClass::Dormant => CsEffectClass::Dormant,
        };
        write_out(out, class)
    })
}

/// Brownian grid of `steps` points on `(0, horizon]`, intervened and conditioned to
/// `value` at time `at`, as CSV with a header row.
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_brownian_csv(steps: usize, horizon: f64, at: f64, value: f64, out: *mut *mut c_char) -> CsStatus {
    guard(|| {
        let csv = brownian_csv(steps, horizon, at, value)?;
        write_string(out, csv)
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `cs` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_space_free(cs: *mut CsSpace) {
    if !cs.is_null() {
        drop(Box::from_raw(cs));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
