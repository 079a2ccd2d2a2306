//! C ABI for the corpus-filtering library: opaque model handles, status
//! codes and the partial-score algebra, so other languages can score
//! sentence pairs without shelling out to the CLI.
//!
//! Conventions:
//! - Every fallible function returns a [`ParsieveStatus`] and writes its
//!   result through an out-pointer on success.
//! - Strings are NUL-terminated UTF-8. Nothing allocated by this library
//!   crosses the boundary except handles, which are released with their
//!   matching `*_free` function.
//! - After a non-OK status, [`parsieve_last_error_message`] returns a
//!   description valid on the calling thread until its next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;

use parsieve::corpus::{tokenize, SentencePair};
use parsieve::error::Error;
use parsieve::langid::LangIdModel;
use parsieve::lexical::LexicalModel;
use parsieve::ngram::NGramModel;
use parsieve::scores::{self, AdqConfig, DomConfig};

/// Status codes mirroring the CLI exit-code contract, plus FFI-specific
/// argument failures.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParsieveStatus {
    Ok = 0,
    /// Invalid options or argument values.
    Usage = 1,
    /// Malformed or inconsistent input data.
    Data = 2,
    /// Missing, malformed or version-incompatible model artifact.
    Model = 3,
    /// A required pointer argument was NULL.
    NullArg = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(err: &Error) -> ParsieveStatus {
    set_error(&err.to_string());
    match err.exit_code() {
        1 => ParsieveStatus::Usage,
        3 => ParsieveStatus::Model,
        _ => ParsieveStatus::Data,
    }
}

fn fail_null() -> ParsieveStatus {
    set_error("required pointer argument was NULL");
    ParsieveStatus::NullArg
}

/// Message describing the last failure on this thread. The pointer stays
/// valid until the next failing call on the same thread. Never NULL.
#[no_mangle]
pub extern "C" fn parsieve_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn parsieve_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string or NULL.
unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, ParsieveStatus> {
    if ptr.is_null() {
        return Err(fail_null());
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument was not valid UTF-8");
        ParsieveStatus::InvalidUtf8
    })
}

unsafe fn handle_arg<'a, T>(ptr: *const T) -> Result<&'a T, ParsieveStatus> {
    if ptr.is_null() {
        return Err(fail_null());
    }
    Ok(&*ptr)
}

fn write_out<T>(out: *mut T, value: T) -> ParsieveStatus {
    if out.is_null() {
        return fail_null();
    }
    unsafe { out.write(value) };
    ParsieveStatus::Ok
}

macro_rules! ffi_try {
    ($expr:expr) => {
        match $expr {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

fn load_into<T, M>(
    path: *const c_char,
    out: *mut *mut T,
    loader: impl FnOnce(&Path) -> parsieve::Result<M>,
    wrap: impl FnOnce(M) -> T,
) -> ParsieveStatus {
    if out.is_null() {
        return fail_null();
    }
    let path = match unsafe { utf8_arg(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match loader(Path::new(path)) {
        Ok(model) => {
            unsafe { out.write(Box::into_raw(Box::new(wrap(model)))) };
            ParsieveStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

// ---------------------------------------------------------------------
// language identifier
// ---------------------------------------------------------------------

/// Opaque trained language identifier.
pub struct ParsieveLangid {
    model: LangIdModel,
}

/// Loads a language-identifier artifact.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn parsieve_langid_load(
    path: *const c_char,
    out: *mut *mut ParsieveLangid,
) -> ParsieveStatus {
    load_into(path, out, |p| LangIdModel::load(p), |model| ParsieveLangid { model })
}

/// Releases a handle returned by [`parsieve_langid_load`]. NULL is a no-op.
///
/// # Safety
/// `model` must originate from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn parsieve_langid_free(model: *mut ParsieveLangid) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Classifies one sentence, writing the language code (or "und") into
/// `out_code`, which must hold at least `cap` bytes including the NUL.
///
/// # Safety
/// Pointer arguments as documented; `out_code` must be writable for `cap`
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn parsieve_langid_classify(
    model: *const ParsieveLangid,
    sentence: *const c_char,
    out_code: *mut c_char,
    cap: usize,
) -> ParsieveStatus {
    let handle = ffi_try!(handle_arg(model));
    let sentence = ffi_try!(utf8_arg(sentence));
    if out_code.is_null() {
        return fail_null();
    }
    let code = handle.model.classify(sentence);
    if code.len() + 1 > cap {
        set_error("output buffer too small for language code");
        return ParsieveStatus::Usage;
    }
    std::ptr::copy_nonoverlapping(code.as_ptr(), out_code.cast(), code.len());
    *out_code.add(code.len()) = 0;
    ParsieveStatus::Ok
}

/// Hard pair gate: writes 1.0 iff the source classifies as `src_lang` and
/// the target as `trg_lang`, else 0.0.
///
/// # Safety
/// Pointer arguments as documented.
#[no_mangle]
pub unsafe extern "C" fn parsieve_langid_gate(
    model: *const ParsieveLangid,
    src: *const c_char,
    trg: *const c_char,
    src_lang: *const c_char,
    trg_lang: *const c_char,
    out_score: *mut f64,
) -> ParsieveStatus {
    let handle = ffi_try!(handle_arg(model));
    let pair = SentencePair {
        id: 0,
        src_raw: ffi_try!(utf8_arg(src)).to_string(),
        trg_raw: ffi_try!(utf8_arg(trg)).to_string(),
    };
    let src_lang = ffi_try!(utf8_arg(src_lang));
    let trg_lang = ffi_try!(utf8_arg(trg_lang));
    write_out(out_score, handle.model.lang_gate(&pair, src_lang, trg_lang))
}

// ---------------------------------------------------------------------
// n-gram language model
// ---------------------------------------------------------------------

/// Opaque word n-gram language model.
pub struct ParsieveNgram {
    model: NGramModel,
}

/// Loads an n-gram model artifact.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn parsieve_ngram_load(
    path: *const c_char,
    out: *mut *mut ParsieveNgram,
) -> ParsieveStatus {
    load_into(path, out, |p| NGramModel::load(p), |model| ParsieveNgram { model })
}

/// # Safety
/// `model` must originate from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn parsieve_ngram_free(model: *mut ParsieveNgram) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Word-normalized cross-entropy (nats/token) of a whitespace-tokenized
/// sentence. Empty sentences are a data error.
///
/// # Safety
/// Pointer arguments as documented.
#[no_mangle]
pub unsafe extern "C" fn parsieve_ngram_cross_entropy(
    model: *const ParsieveNgram,
    sentence: *const c_char,
    out_entropy: *mut f64,
) -> ParsieveStatus {
    let handle = ffi_try!(handle_arg(model));
    let sentence = ffi_try!(utf8_arg(sentence));
    match handle.model.cross_entropy(&tokenize(sentence)) {
        Ok(h) => write_out(out_entropy, h),
        Err(e) => fail(&e),
    }
}

/// exp(cross-entropy) of a sentence.
///
/// # Safety
/// Pointer arguments as documented.
#[no_mangle]
pub unsafe extern "C" fn parsieve_ngram_perplexity(
    model: *const ParsieveNgram,
    sentence: *const c_char,
    out_perplexity: *mut f64,
) -> ParsieveStatus {
    let handle = ffi_try!(handle_arg(model));
    let sentence = ffi_try!(utf8_arg(sentence));
    match handle.model.perplexity(&tokenize(sentence)) {
        Ok(pp) => write_out(out_perplexity, pp),
        Err(e) => fail(&e),
    }
}

// ---------------------------------------------------------------------
// lexical translation model
// ---------------------------------------------------------------------

/// Opaque IBM Model 1 translation table.
pub struct ParsieveIbm1 {
    model: LexicalModel,
}

/// Loads a lexical-model artifact.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn parsieve_ibm1_load(
    path: *const c_char,
    out: *mut *mut ParsieveIbm1,
) -> ParsieveStatus {
    load_into(path, out, |p| LexicalModel::load(p), |model| ParsieveIbm1 { model })
}

/// # Safety
/// `model` must originate from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn parsieve_ibm1_free(model: *mut ParsieveIbm1) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Word-normalized conditional cross-entropy H(trg|src) in nats/token.
/// Empty sentences are a data error.
///
/// # Safety
/// Pointer arguments as documented.
#[no_mangle]
pub unsafe extern "C" fn parsieve_ibm1_cond_cross_entropy(
    model: *const ParsieveIbm1,
    src: *const c_char,
    trg: *const c_char,
    out_entropy: *mut f64,
) -> ParsieveStatus {
    let handle = ffi_try!(handle_arg(model));
    let src = ffi_try!(utf8_arg(src));
    let trg = ffi_try!(utf8_arg(trg));
    match handle.model.cond_cross_entropy(&tokenize(src), &tokenize(trg)) {
        Ok(h) => write_out(out_entropy, h),
        Err(e) => fail(&e),
    }
}

// ---------------------------------------------------------------------
// score algebra
// ---------------------------------------------------------------------

/// Adequacy score in (0, 1] from two inverse conditional cross-entropies.
/// Pass nonzero flags for the standard configuration; zeroing one drops
/// the corresponding term.
///
/// # Safety
/// `out_score` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn parsieve_adq(
    h_fwd: f64,
    h_bwd: f64,
    use_abs_difference: bool,
    use_ce_weighting: bool,
    out_score: *mut f64,
) -> ParsieveStatus {
    let cfg = AdqConfig { use_abs_difference, use_ce_weighting };
    match scores::adq(h_fwd, h_bwd, cfg) {
        Ok(v) => write_out(out_score, v),
        Err(e) => fail(&e),
    }
}

/// Domain score in [0, 1]: perplexity ratio clipped to 1 and zeroed below
/// `cutoff` (which must lie in [0, 1]).
///
/// # Safety
/// `out_score` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn parsieve_dom(
    h_in: f64,
    h_out: f64,
    cutoff: f64,
    out_score: *mut f64,
) -> ParsieveStatus {
    let cfg = match DomConfig::new(cutoff) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e),
    };
    match scores::dom(h_in, h_out, cfg) {
        Ok(v) => write_out(out_score, v),
        Err(e) => fail(&e),
    }
}

/// Product of `len` partial scores, each clamped to [0, 1] first.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out_score` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn parsieve_combine(
    values: *const f64,
    len: usize,
    out_score: *mut f64,
) -> ParsieveStatus {
    if values.is_null() && len > 0 {
        return fail_null();
    }
    let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(values, len) };
    let named: Vec<(&str, f64)> = slice.iter().map(|v| ("partial", *v)).collect();
    match scores::combine(&named) {
        Ok(v) => write_out(out_score, v),
        Err(e) => fail(&e),
    }
}
