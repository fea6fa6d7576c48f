//! C ABI over the seatok core.
//!
//! Conventions:
//! - every fallible function returns a [`SeatokStatus`]; on failure the
//!   message and a kebab-case error code are available from
//!   [`seatok_last_error_message`] / [`seatok_last_error_code`] on the same
//!   thread until the next call;
//! - buffers returned through out-pointers are owned by the caller and must
//!   be released with the matching `*_free` function;
//! - a [`SeatokVocab`] handle is immutable and may be shared across threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use seatok::tokenizer::load_vocab;
use seatok::workflow::{self, ExtendRequest};
use seatok::{TokenSequence, Vocabulary};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeatokStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Inputs were rejected (malformed files, bad parameters).
    InvalidInput = 3,
    /// Processing failed (I/O, unencodable text, invalid ids).
    Runtime = 4,
    /// The library panicked; the handle involved should be discarded.
    Panic = 5,
}

/// Opaque vocabulary handle.
pub struct SeatokVocab {
    inner: Vocabulary,
}

/// Counts returned by [`seatok_extend`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SeatokExtendSummary {
    pub candidates: usize,
    pub kept: usize,
    pub pruned: usize,
    pub rejected: usize,
    pub vocab_size: usize,
}

struct LastError {
    code: CString,
    message: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

struct Failure {
    status: SeatokStatus,
    code: &'static str,
    message: String,
}

impl From<seatok::Error> for Failure {
    fn from(e: seatok::Error) -> Self {
        Failure {
            status: if e.is_validation() { SeatokStatus::InvalidInput } else { SeatokStatus::Runtime },
            code: e.code(),
            message: e.to_string(),
        }
    }
}

fn null_pointer(name: &str) -> Failure {
    Failure {
        status: SeatokStatus::NullPointer,
        code: "null-pointer",
        message: format!("{name} is null"),
    }
}

fn set_last_error(code: &str, message: &str) {
    let clean = |s: &str| CString::new(s.replace('\0', "\\0")).expect("interior NULs replaced");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(LastError {
            code: clean(code),
            message: clean(message),
        })
    });
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SeatokStatus {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SeatokStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(fail.code, &fail.message);
            fail.status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_owned());
            set_last_error("panic", &message);
            SeatokStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null_pointer(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| Failure {
        status: SeatokStatus::InvalidUtf8,
        code: "invalid-utf8",
        message: format!("{name}: {e}"),
    })
}

unsafe fn path_arg(ptr: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    str_arg(ptr, name).map(PathBuf::from)
}

unsafe fn vocab_arg<'a>(ptr: *const SeatokVocab) -> Result<&'a Vocabulary, Failure> {
    ptr.as_ref().map(|v| &v.inner).ok_or_else(|| null_pointer("vocab"))
}

// JSON escapes NUL, so serialized reports always convert.
fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior NUL").into_raw()
}

/// Kebab-case code of the last failure on this thread, or null.
#[no_mangle]
pub extern "C" fn seatok_last_error_code() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |e| e.code.as_ptr()))
}

/// Message of the last failure on this thread, or null.
#[no_mangle]
pub extern "C" fn seatok_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |e| e.message.as_ptr()))
}

/// Loads a vocabulary file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn seatok_vocab_load(path: *const c_char, out: *mut *mut SeatokVocab) -> SeatokStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        let vocab = load_vocab(path_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(SeatokVocab { inner: vocab }));
        Ok(())
    })
}

/// Releases a handle from [`seatok_vocab_load`]. Null is ignored.
///
/// # Safety
/// `vocab` must come from [`seatok_vocab_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn seatok_vocab_free(vocab: *mut SeatokVocab) {
    if !vocab.is_null() {
        drop(Box::from_raw(vocab));
    }
}

/// Number of tokens, or 0 for a null handle.
///
/// # Safety
/// `vocab` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seatok_vocab_len(vocab: *const SeatokVocab) -> usize {
    vocab.as_ref().map_or(0, |v| v.inner.len())
}

/// Encodes `len` bytes of UTF-8 text. On success `*ids_out` holds
/// `*ids_len` ids (null when empty) to be released with [`seatok_ids_free`].
///
/// # Safety
/// `text` must point to `len` readable bytes; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn seatok_encode(
    vocab: *const SeatokVocab,
    text: *const u8,
    len: usize,
    ids_out: *mut *mut u32,
    ids_len: *mut usize,
) -> SeatokStatus {
    guard(|| {
        let vocab = vocab_arg(vocab)?;
        if ids_out.is_null() || ids_len.is_null() {
            return Err(null_pointer("ids_out"));
        }
        let bytes: &[u8] = if len == 0 {
            &[]
        } else if text.is_null() {
            return Err(null_pointer("text"));
        } else {
            std::slice::from_raw_parts(text, len)
        };
        let text = std::str::from_utf8(bytes).map_err(|e| Failure {
            status: SeatokStatus::InvalidUtf8,
            code: "invalid-utf8",
            message: format!("text: {e}"),
        })?;
        let ids = vocab.tokenize(text)?.into_ids();
        *ids_len = ids.len();
        *ids_out = if ids.is_empty() {
            ptr::null_mut()
        } else {
            Box::into_raw(ids.into_boxed_slice()) as *mut u32
        };
        Ok(())
    })
}

/// Releases ids from [`seatok_encode`].
///
/// # Safety
/// `ids`/`len` must be exactly as returned by [`seatok_encode`].
#[no_mangle]
pub unsafe extern "C" fn seatok_ids_free(ids: *mut u32, len: usize) {
    if !ids.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(ids, len)));
    }
}

/// Decodes ids to UTF-8. `*text_out` holds `*text_len` bytes followed by a
/// NUL terminator (the text itself may contain NUL); release it with
/// [`seatok_text_free`].
///
/// # Safety
/// `ids` must point to `len` readable ids; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn seatok_decode(
    vocab: *const SeatokVocab,
    ids: *const u32,
    len: usize,
    text_out: *mut *mut c_char,
    text_len: *mut usize,
) -> SeatokStatus {
    guard(|| {
        let vocab = vocab_arg(vocab)?;
        if text_out.is_null() || text_len.is_null() {
            return Err(null_pointer("text_out"));
        }
        let ids: &[u32] = if len == 0 {
            &[]
        } else if ids.is_null() {
            return Err(null_pointer("ids"));
        } else {
            std::slice::from_raw_parts(ids, len)
        };
        let mut bytes = vocab.detokenize(&TokenSequence::new(ids.to_vec()))?.into_bytes();
        *text_len = bytes.len();
        bytes.push(0);
        *text_out = Box::into_raw(bytes.into_boxed_slice()) as *mut c_char;
        Ok(())
    })
}

/// Releases text from [`seatok_decode`].
///
/// # Safety
/// `text`/`len` must be exactly as returned by [`seatok_decode`].
#[no_mangle]
pub unsafe extern "C" fn seatok_text_free(text: *mut c_char, len: usize) {
    if !text.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(text as *mut u8, len + 1)));
    }
}

/// Releases a string from [`seatok_compression_ratio`]. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn seatok_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Extends `base` with `target` tokens found on `corpus` and writes the same
/// files as `seatok vocab extend` with default options: `out`, its
/// `.report.json` and its `.freq.tsv` siblings.
///
/// # Safety
/// Path arguments must be NUL-terminated strings; `summary` may be null.
#[no_mangle]
pub unsafe extern "C" fn seatok_extend(
    base: *const c_char,
    target: *const c_char,
    corpus: *const c_char,
    min_freq: u64,
    out: *const c_char,
    summary: *mut SeatokExtendSummary,
) -> SeatokStatus {
    guard(|| {
        let req = ExtendRequest::new(
            path_arg(base, "base")?,
            path_arg(target, "target")?,
            path_arg(corpus, "corpus")?,
            min_freq,
            path_arg(out, "out")?,
        );
        let s = workflow::extend_files(&req)?;
        if let Some(dst) = summary.as_mut() {
            *dst = SeatokExtendSummary {
                candidates: s.candidates,
                kept: s.kept,
                pruned: s.pruned,
                rejected: s.rejected,
                vocab_size: s.vocab_size,
            };
        }
        Ok(())
    })
}

/// Compression report of `subject` against `baseline` over a parallel
/// JSONL file, as the pretty JSON `seatok metrics ratio --out` writes for
/// one subject. Release `*json_out` with [`seatok_string_free`].
///
/// # Safety
/// Path arguments must be NUL-terminated strings; `json_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn seatok_compression_ratio(
    subject: *const c_char,
    baseline: *const c_char,
    parallel: *const c_char,
    json_out: *mut *mut c_char,
) -> SeatokStatus {
    guard(|| {
        if json_out.is_null() {
            return Err(null_pointer("json_out"));
        }
        let subjects = [("subject".to_owned(), path_arg(subject, "subject")?)];
        let reports = workflow::ratio_files(&subjects, &path_arg(baseline, "baseline")?, &path_arg(parallel, "parallel")?)?;
        let json = workflow::to_json_pretty(&reports["subject"])?;
        *json_out = into_c_string(json);
        Ok(())
    })
}
