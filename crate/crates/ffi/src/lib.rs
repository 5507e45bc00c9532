//! C ABI for `symgrowth`.
//!
//! Objects cross the boundary as opaque handles (`SgInstance`,
//! `SgCertificate`) that must be released with their `_free` function.
//! Strings returned through out-parameters are owned by the caller and must be
//! released with [`sg_string_free`]. Every fallible call returns an
//! [`SgStatus`]; on failure [`sg_last_error_message`] describes the error for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use symgrowth::instances::generate_with;
use symgrowth::json::to_canonical_string;
use symgrowth::neighbourhood::{almost_invariant, theorem_for_instance};
use symgrowth::set::doubling_stats;
use symgrowth::{verify_certificate, Certificate, Error, GSet, InstanceSpec, Limits, Rational};

/// Status codes. The first four match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    /// The computation finished but a certificate did not verify.
    Unverified = 1,
    InvalidInput = 2,
    ResourceExceeded = 3,
    NullPointer = 4,
    Internal = 5,
}

/// An instance spec together with its generated set.
pub struct SgInstance {
    spec: InstanceSpec,
    set: GSet,
}

pub struct SgCertificate {
    cert: Certificate,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> SgStatus {
    match err {
        Error::ResourceExceeded { .. } => SgStatus::ResourceExceeded,
        Error::InvariantViolated(_) => SgStatus::Internal,
        _ => SgStatus::InvalidInput,
    }
}

fn fail(err: Error) -> SgStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn guard(f: impl FnOnce() -> SgStatus) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            SgStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SgStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(SgStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        SgStatus::InvalidInput
    })
}

unsafe fn put_string(out: *mut *mut c_char, text: String) -> SgStatus {
    match CString::new(text) {
        Ok(c) => {
            *out = c.into_raw();
            SgStatus::Ok
        }
        Err(_) => {
            set_error("output contains a NUL byte");
            SgStatus::Internal
        }
    }
}

fn limits() -> Result<Limits, Error> {
    Limits::from_env()
}

macro_rules! non_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            set_error(concat!("null argument: ", stringify!($p)));
            return SgStatus::NullPointer;
        })+
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses instance JSON (`{"group": ..., "set": ...}`) and generates its set.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_instance_load(json: *const c_char, out: *mut *mut SgInstance) -> SgStatus {
    guard(|| {
        non_null!(out);
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let loaded = limits().and_then(|l| {
            let spec = InstanceSpec::from_json(text)?;
            let set = generate_with(&spec, l)?;
            Ok(SgInstance { spec, set })
        });
        match loaded {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(inst));
                SgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `inst` must come from [`sg_instance_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn sg_instance_free(inst: *mut SgInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must be a live instance handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_instance_size(inst: *const SgInstance, out: *mut u64) -> SgStatus {
    guard(|| {
        non_null!(inst, out);
        *out = (*inst).set.len() as u64;
        SgStatus::Ok
    })
}

/// Doubling statistics as canonical JSON.
///
/// # Safety
/// `inst` must be a live instance handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_doubling_json(inst: *const SgInstance, out: *mut *mut c_char) -> SgStatus {
    guard(|| {
        non_null!(inst, out);
        match doubling_stats(&(*inst).set).and_then(|s| to_canonical_string(&s)) {
            Ok(text) => put_string(out, text),
            Err(e) => fail(e),
        }
    })
}

/// `Sym_eta(A)` as a JSON array of element encodings; `eta` is `"p/q"`.
///
/// # Safety
/// `inst` must be a live instance handle, `eta` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_sym_json(
    inst: *const SgInstance,
    eta: *const c_char,
    out: *mut *mut c_char,
) -> SgStatus {
    guard(|| {
        non_null!(inst, out);
        let eta = match read_str(eta).map(str::parse::<Rational>) {
            Ok(Ok(r)) => r,
            Ok(Err(e)) => return fail(e),
            Err(s) => return s,
        };
        let set = &(*inst).set;
        let members = symgrowth::sym_set(set, &eta).map(|s| {
            s.members()
                .iter()
                .map(|x| set.ctx().components(x))
                .collect::<Vec<_>>()
        });
        match members.and_then(|m| to_canonical_string(&m)) {
            Ok(text) => put_string(out, text),
            Err(e) => fail(e),
        }
    })
}

/// Builds a certificate at parameter `k`. Returns `SG_STATUS_UNVERIFIED`
/// (with the certificate still written to `out`) if its checks fail.
///
/// # Safety
/// `inst` must be a live instance handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_run(inst: *const SgInstance, k: u32, out: *mut *mut SgCertificate) -> SgStatus {
    guard(|| {
        non_null!(inst, out);
        let inst = &*inst;
        match theorem_for_instance(&inst.spec, &inst.set, k) {
            Ok(cert) => {
                let verified = cert.verified;
                *out = Box::into_raw(Box::new(SgCertificate { cert }));
                if verified {
                    SgStatus::Ok
                } else {
                    set_error("certificate checks failed");
                    SgStatus::Unverified
                }
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_certificate_from_json(
    json: *const c_char,
    out: *mut *mut SgCertificate,
) -> SgStatus {
    guard(|| {
        non_null!(out);
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match limits().and_then(|l| Certificate::from_json_with(text, l)) {
            Ok(cert) => {
                *out = Box::into_raw(Box::new(SgCertificate { cert }));
                SgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// 1 if the certificate's own checks all passed, 0 otherwise (or if null).
///
/// # Safety
/// `cert` must be a live certificate handle or null.
#[no_mangle]
pub unsafe extern "C" fn sg_certificate_verified(cert: *const SgCertificate) -> i32 {
    if cert.is_null() {
        return 0;
    }
    i32::from((*cert).cert.verified)
}

/// Canonical certificate JSON.
///
/// # Safety
/// `cert` must be a live certificate handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_certificate_to_json(
    cert: *const SgCertificate,
    out: *mut *mut c_char,
) -> SgStatus {
    guard(|| {
        non_null!(cert, out);
        match (*cert).cert.to_canonical_json() {
            Ok(text) => put_string(out, text),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `cert` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sg_certificate_free(cert: *mut SgCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Independent recomputation of `cert` against `inst`. Writes the report
/// JSON to `report` (may be null) and returns `SG_STATUS_OK` or
/// `SG_STATUS_UNVERIFIED`.
///
/// # Safety
/// `cert` and `inst` must be live handles; `report` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn sg_verify(
    cert: *const SgCertificate,
    inst: *const SgInstance,
    report: *mut *mut c_char,
) -> SgStatus {
    guard(|| {
        non_null!(cert, inst);
        let result = verify_certificate(&(*cert).cert, &(*inst).set);
        let rep = match result {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        if !report.is_null() {
            let text = match to_canonical_string(&rep) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let status = put_string(report, text);
            if status != SgStatus::Ok {
                return status;
            }
        }
        if rep.overall {
            SgStatus::Ok
        } else {
            set_error("certificate did not verify");
            SgStatus::Unverified
        }
    })
}

/// Almost-invariant pair at parameter `k` as JSON.
///
/// # Safety
/// `inst` must be a live instance handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_almost_invariant_json(
    inst: *const SgInstance,
    k: u32,
    out: *mut *mut c_char,
) -> SgStatus {
    guard(|| {
        non_null!(inst, out);
        let set = &(*inst).set;
        let result = almost_invariant(set, k).and_then(|inv| {
            let enc = |s: &GSet| s.iter().map(|x| s.ctx().components(x)).collect::<Vec<_>>();
            to_canonical_string(&serde_json::json!({
                "k": k.to_string(),
                "level": inv.level.to_string(),
                "ratio": inv.ratio,
                "s": enc(&inv.s),
                "astar": enc(&inv.astar),
                "chain": inv.chain.iter().map(u64::to_string).collect::<Vec<_>>(),
                "ledger": inv.ledger,
            }))
        });
        match result {
            Ok(text) => put_string(out, text),
            Err(e) => fail(e),
        }
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
