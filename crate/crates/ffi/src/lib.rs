//! C ABI over `qpke_sim`.
//!
//! Objects cross the boundary as opaque pointers created by `qs_*_new` style
//! functions and released by the matching `qs_*_free`. Fallible calls return a
//! [`QsStatus`]; the message for the most recent failure on the calling thread
//! is available from [`qs_last_error`]. Strings and buffers handed out by this
//! library must be released with [`qs_string_free`] and [`qs_buffer_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use qpke_sim::harness::{run_cli, Overrides, RunConfig};
use qpke_sim::params::SchemeParams;
use qpke_sim::primitives::RngStream;
use qpke_sim::qkd::{honest_session, QkdParams, QkdTranscript};
use qpke_sim::qpke::{ev_dec, ev_enc, ev_pkgen, ev_skgen, EvCiphertext, EvPublicKey, EvSecretKey, QpkeError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The ciphertext is the abort symbol.
    Abort = 3,
    /// The quantum public key was already used by an encryption.
    KeyConsumed = 4,
    Parse = 5,
    /// The experiment ran but at least one of its checks failed.
    CheckFailed = 6,
    Internal = 7,
}

/// Party selector for transcript outputs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsParty {
    Alice = 0,
    Bob = 1,
}

/// Bytes owned by this library.
#[repr(C)]
pub struct QsBuffer {
    pub data: *mut u8,
    pub len: usize,
}

pub struct QsRng {
    inner: RngStream,
}

/// Secret key plus its single-use quantum public key.
pub struct QsEvKeyPair {
    sk: EvSecretKey,
    pk: Option<EvPublicKey>,
}

pub struct QsEvCiphertext {
    inner: EvCiphertext,
}

pub struct QsTranscript {
    inner: QkdTranscript,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl ToString) {
    let msg = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: QsStatus, msg: impl ToString) -> QsStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> QsStatus) -> QsStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(QsStatus::Internal, "panic inside qpke_sim"))
}

fn qpke_status(e: &QpkeError) -> QsStatus {
    match e {
        QpkeError::AbortCiphertext | QpkeError::AbortAt(_) => QsStatus::Abort,
        QpkeError::Parse(_) => QsStatus::Parse,
        _ => QsStatus::InvalidArgument,
    }
}

fn scheme(lambda: usize, preimage_bits: usize) -> Result<SchemeParams, QsStatus> {
    SchemeParams::new(lambda, preimage_bits).map_err(|e| fail(QsStatus::InvalidArgument, e))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Deterministic random stream for `(seed, stream_id)`.
#[no_mangle]
pub extern "C" fn qs_rng_new(seed: u64, stream_id: u64) -> *mut QsRng {
    Box::into_raw(Box::new(QsRng {
        inner: RngStream::new(seed, stream_id),
    }))
}

/// # Safety
/// `rng` must be NULL or come from [`qs_rng_new`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn qs_rng_free(rng: *mut QsRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// Samples an everlasting key pair into `*out`.
///
/// # Safety
/// `rng` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_ev_keygen(
    lambda: usize,
    preimage_bits: usize,
    rng: *mut QsRng,
    out: *mut *mut QsEvKeyPair,
) -> QsStatus {
    guard(|| {
        let (Some(rng), false) = (rng.as_mut(), out.is_null()) else {
            return fail(QsStatus::NullPointer, "null rng or output pointer");
        };
        let params = match scheme(lambda, preimage_bits) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let pair = ev_skgen(&params, &mut rng.inner).and_then(|sk| Ok((ev_pkgen(&sk)?, sk)));
        match pair {
            Ok((pk, sk)) => {
                *out = Box::into_raw(Box::new(QsEvKeyPair { sk, pk: Some(pk) }));
                QsStatus::Ok
            }
            Err(e) => fail(qpke_status(&e), e),
        }
    })
}

/// # Safety
/// `kp` must be NULL or come from [`qs_ev_keygen`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn qs_ev_keypair_free(kp: *mut QsEvKeyPair) {
    if !kp.is_null() {
        drop(Box::from_raw(kp));
    }
}

/// Encrypts bit `m` (0 or 1) under the pair's public key. The quantum key is
/// consumed: a second call on the same pair returns `KeyConsumed`.
///
/// # Safety
/// `kp` and `rng` must be live handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_ev_encrypt(
    kp: *mut QsEvKeyPair,
    m: u8,
    rng: *mut QsRng,
    out: *mut *mut QsEvCiphertext,
) -> QsStatus {
    guard(|| {
        let (Some(kp), Some(rng), false) = (kp.as_mut(), rng.as_mut(), out.is_null()) else {
            return fail(QsStatus::NullPointer, "null key pair, rng or output pointer");
        };
        if m > 1 {
            return fail(QsStatus::InvalidArgument, format!("message must be 0 or 1, got {m}"));
        }
        let Some(pk) = kp.pk.take() else {
            return fail(QsStatus::KeyConsumed, "public key register already used");
        };
        match ev_enc(&pk.state, &pk.classical, m == 1, &mut rng.inner) {
            Ok(ct) => {
                *out = Box::into_raw(Box::new(QsEvCiphertext { inner: ct }));
                QsStatus::Ok
            }
            Err(e) => {
                kp.pk = Some(pk);
                fail(qpke_status(&e), e)
            }
        }
    })
}

/// # Safety
/// `ct` must be NULL or a live ciphertext handle.
#[no_mangle]
pub unsafe extern "C" fn qs_ev_ciphertext_free(ct: *mut QsEvCiphertext) {
    if !ct.is_null() {
        drop(Box::from_raw(ct));
    }
}

/// 1 if `ct` is the abort symbol, 0 otherwise (including NULL).
///
/// # Safety
/// `ct` must be NULL or a live ciphertext handle.
#[no_mangle]
pub unsafe extern "C" fn qs_ev_ciphertext_is_abort(ct: *const QsEvCiphertext) -> u8 {
    ct.as_ref().is_some_and(|c| c.inner.is_abort()) as u8
}

/// Text form of a ciphertext; free with [`qs_string_free`]. NULL on bad input.
///
/// # Safety
/// `ct` must be NULL or a live ciphertext handle.
#[no_mangle]
pub unsafe extern "C" fn qs_ev_ciphertext_to_string(ct: *const QsEvCiphertext) -> *mut c_char {
    match ct.as_ref() {
        Some(c) => into_c_string(c.inner.to_string()),
        None => ptr::null_mut(),
    }
}

/// Decrypts into `*m`; returns `Abort` for the abort symbol.
///
/// # Safety
/// `kp` and `ct` must be live handles and `m` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_ev_decrypt(kp: *const QsEvKeyPair, ct: *const QsEvCiphertext, m: *mut u8) -> QsStatus {
    guard(|| {
        let (Some(kp), Some(ct), false) = (kp.as_ref(), ct.as_ref(), m.is_null()) else {
            return fail(QsStatus::NullPointer, "null key pair, ciphertext or output pointer");
        };
        match ev_dec(&kp.sk, &ct.inner) {
            Ok(bit) => {
                *m = bit as u8;
                QsStatus::Ok
            }
            Err(e) => fail(qpke_status(&e), e),
        }
    })
}

/// Runs one honest QKD session and stores its transcript in `*out`.
///
/// # Safety
/// `rng` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_qkd_session(
    lambda: usize,
    preimage_bits: usize,
    rng: *mut QsRng,
    out: *mut *mut QsTranscript,
) -> QsStatus {
    guard(|| {
        let (Some(rng), false) = (rng.as_mut(), out.is_null()) else {
            return fail(QsStatus::NullPointer, "null rng or output pointer");
        };
        let params = match scheme(lambda, preimage_bits).and_then(|s| {
            QkdParams::new(s).map_err(|e| fail(QsStatus::InvalidArgument, e))
        }) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match honest_session(&params, &mut rng.inner) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(QsTranscript { inner: t }));
                QsStatus::Ok
            }
            Err(e) => fail(QsStatus::Internal, e),
        }
    })
}

/// # Safety
/// `t` must be NULL or a live transcript handle.
#[no_mangle]
pub unsafe extern "C" fn qs_transcript_free(t: *mut QsTranscript) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// 1 when both parties accepted with equal keys.
///
/// # Safety
/// `t` must be NULL or a live transcript handle.
#[no_mangle]
pub unsafe extern "C" fn qs_transcript_agree(t: *const QsTranscript) -> u8 {
    t.as_ref().is_some_and(|t| t.inner.agree()) as u8
}

/// A party's output as `key <hex>` or `REJECT`; free with [`qs_string_free`].
///
/// # Safety
/// `t` must be NULL or a live transcript handle.
#[no_mangle]
pub unsafe extern "C" fn qs_transcript_outcome(t: *const QsTranscript, party: QsParty) -> *mut c_char {
    match t.as_ref() {
        Some(t) => into_c_string(match party {
            QsParty::Alice => t.inner.alice.to_string(),
            QsParty::Bob => t.inner.bob.to_string(),
        }),
        None => ptr::null_mut(),
    }
}

/// Serializes a transcript; free the buffer with [`qs_buffer_free`].
///
/// # Safety
/// `t` must be a live transcript handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_transcript_encode(t: *const QsTranscript, out: *mut QsBuffer) -> QsStatus {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null()) else {
            return fail(QsStatus::NullPointer, "null transcript or output pointer");
        };
        let bytes = t.inner.encode().into_boxed_slice();
        let len = bytes.len();
        *out = QsBuffer {
            data: Box::into_raw(bytes).cast(),
            len,
        };
        QsStatus::Ok
    })
}

/// Parses `len` bytes at `data` into a transcript.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_transcript_decode(data: *const u8, len: usize, out: *mut *mut QsTranscript) -> QsStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            return fail(QsStatus::NullPointer, "null data or output pointer");
        }
        match QkdTranscript::decode(std::slice::from_raw_parts(data, len)) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(QsTranscript { inner: t }));
                QsStatus::Ok
            }
            Err(e) => fail(QsStatus::Parse, e),
        }
    })
}

/// # Safety
/// `buf` must come from this library and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn qs_buffer_free(buf: QsBuffer) {
    if !buf.data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(buf.data, buf.len)));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs an experiment described by `key = value` lines (the same keys as the
/// command-line config file). The report text is stored in `*report` even
/// when a check fails; free it with [`qs_string_free`].
///
/// # Safety
/// `config` must be a NUL-terminated string and `report` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_run_experiment(config: *const c_char, report: *mut *mut c_char) -> QsStatus {
    guard(|| {
        if config.is_null() || report.is_null() {
            return fail(QsStatus::NullPointer, "null config or report pointer");
        }
        let Ok(text) = CStr::from_ptr(config).to_str() else {
            return fail(QsStatus::Parse, "config is not UTF-8");
        };
        let cfg = match Overrides::parse_file(text).and_then(RunConfig::from_overrides) {
            Ok(c) => c,
            Err(e) => return fail(QsStatus::InvalidArgument, e),
        };
        match run_cli(&cfg) {
            Ok(out) => {
                *report = into_c_string(out.report.to_string());
                if out.passed() {
                    QsStatus::Ok
                } else {
                    fail(QsStatus::CheckFailed, "experiment checks failed")
                }
            }
            Err(e) => fail(QsStatus::InvalidArgument, e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_internal_errors() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, QsStatus::Internal);
        let msg = unsafe { CStr::from_ptr(qs_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "panic inside qpke_sim");
    }

    #[test]
    fn errors_are_per_thread() {
        fail(QsStatus::Parse, "here");
        let other = std::thread::spawn(|| qs_last_error().is_null()).join().unwrap();
        assert!(other);
        assert!(!qs_last_error().is_null());
    }

    #[test]
    fn interior_nul_is_sanitized() {
        fail(QsStatus::Parse, "a\0b");
        let msg = unsafe { CStr::from_ptr(qs_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }
}
