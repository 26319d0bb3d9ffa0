//! C ABI over the relevance classifier, agreement metrics, and annotation
//! sessions.
//!
//! Every function returns a [`UfStatus`]. On failure a message is kept in
//! thread-local storage and can be read with [`uf_last_error`] until the next
//! call on the same thread. Strings handed out through `char **` out
//! parameters are owned by the caller and must be released with
//! [`uf_string_free`]. Handles are opaque and released with their `_free`
//! function. No panic crosses the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use unrest_filter::features::Vocabulary;
use unrest_filter::harness::Trained;
use unrest_filter::ingest::{self, AnalyzedTweet, NormalizationConfig, Tweet};
use unrest_filter::metrics::{self, RatingsMatrix};
use unrest_filter::service::{Session, SessionConfig};
use unrest_filter::svm::LinearModel;
use unrest_filter::{cli, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    UnknownId = 6,
    Untrained = 7,
    Degenerate = 8,
    Panic = 9,
}

/// A vocabulary and a trained model.
pub struct UfClassifier {
    trained: Trained,
    norm: NormalizationConfig,
}

/// A persistent annotation session.
pub struct UfSession {
    session: Session,
}

struct Fail {
    status: UfStatus,
    message: String,
}

impl Fail {
    fn new(status: UfStatus, message: impl Into<String>) -> Self {
        Fail {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => UfStatus::Io,
            Error::Record { .. } | Error::DuplicateId { .. } | Error::ModelFormat(_) | Error::Json(_) => {
                UfStatus::Parse
            }
            Error::ConfigFile { .. } => UfStatus::Parse,
            Error::UnknownId(_) => UfStatus::UnknownId,
            Error::Untrained => UfStatus::Untrained,
            Error::DegenerateTrainingSet(_) | Error::UndefinedIcc(_) | Error::EmptyEvaluation => UfStatus::Degenerate,
            _ => UfStatus::InvalidArgument,
        };
        Fail::new(status, e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::new(UfStatus::Parse, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', "\\0")).unwrap_or_default());
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> UfStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "unknown panic".into());
        Err(Fail::new(UfStatus::Panic, format!("panic: {msg}")))
    });
    match outcome {
        Ok(()) => {
            set_last_error(None);
            UfStatus::Ok
        }
        Err(f) => {
            set_last_error(Some(f.message));
            f.status
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail::new(UfStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::new(UfStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail::new(UfStatus::InvalidArgument, "output contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn write_json(out: *mut *mut c_char, v: &impl serde::Serialize) -> Result<(), Fail> {
    write_string(out, serde_json::to_string(v)?)
}

/// Message for the last failed call on this thread, or NULL after a
/// successful call. The pointer stays valid until the next call.
#[no_mangle]
pub extern "C" fn uf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned through a `char **` out parameter. NULL is a
/// no-op.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Normalizes `text` with the default configuration and writes the tokens as
/// a JSON array of strings.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out_json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uf_normalize(text: *const c_char, out_json: *mut *mut c_char) -> UfStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        non_null(out_json, "out_json")?;
        let tokens = ingest::normalize(text, &NormalizationConfig::default());
        write_json(out_json, &tokens)
    })
}

/// Loads a classifier from the `vocab.tsv` and `model.txt` written by the
/// `train` command.
///
/// # Safety
/// Paths must be NUL-terminated strings and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uf_classifier_load(
    vocab_path: *const c_char,
    model_path: *const c_char,
    out: *mut *mut UfClassifier,
) -> UfStatus {
    guard(|| {
        let vp = str_arg(vocab_path, "vocab_path")?;
        let mp = str_arg(model_path, "model_path")?;
        non_null(out, "out")?;
        let read = |p: &str| std::fs::read_to_string(p).map_err(|e| Fail::from(Error::io(Path::new(p), e)));
        *out = Box::into_raw(Box::new(classifier(&read(vp)?, &read(mp)?)?));
        Ok(())
    })
}

/// Builds a classifier from in-memory vocabulary and model text.
///
/// # Safety
/// Arguments must be NUL-terminated strings and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uf_classifier_from_text(
    vocab_text: *const c_char,
    model_text: *const c_char,
    out: *mut *mut UfClassifier,
) -> UfStatus {
    guard(|| {
        let v = str_arg(vocab_text, "vocab_text")?;
        let m = str_arg(model_text, "model_text")?;
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(classifier(v, m)?));
        Ok(())
    })
}

fn classifier(vocab: &str, model: &str) -> Result<UfClassifier, Fail> {
    let vocab = Vocabulary::from_text(vocab)?;
    let model = LinearModel::from_text(model, Some(vocab.len() as u32))?;
    Ok(UfClassifier {
        trained: Trained { vocab, model },
        norm: NormalizationConfig::default(),
    })
}

/// Number of features in the classifier's vocabulary.
///
/// # Safety
/// `c` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uf_classifier_vocab_size(c: *const UfClassifier, out: *mut usize) -> UfStatus {
    guard(|| {
        non_null(c, "classifier")?;
        non_null(out, "out")?;
        *out = (*c).trained.vocab.len();
        Ok(())
    })
}

/// Decision value `w·x + b` for raw text, normalized with the default
/// configuration and analyzed by whitespace. Scores at or above zero mean
/// relevant.
///
/// # Safety
/// `c` must be a live handle, `text` a NUL-terminated string, and `out` a
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uf_classifier_score_text(
    c: *const UfClassifier,
    text: *const c_char,
    out: *mut f64,
) -> UfStatus {
    guard(|| {
        non_null(c, "classifier")?;
        let text = str_arg(text, "text")?;
        non_null(out, "out")?;
        let c = &*c;
        let raw = AnalyzedTweet::passthrough(Tweet {
            id: String::new(),
            ts: 0,
            text: text.to_owned(),
            label: None,
        });
        *out = c.trained.score(&ingest::preprocess(&raw, &c.norm));
        Ok(())
    })
}

/// # Safety
/// `c` must be NULL or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uf_classifier_free(c: *mut UfClassifier) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

unsafe fn label_slices<'a>(a: *const i32, b: *const i32, n: usize) -> Result<(&'a [i32], &'a [i32]), Fail> {
    if n == 0 {
        return Err(Fail::from(Error::EmptyInput("label sequence")));
    }
    non_null(a, "a")?;
    non_null(b, "b")?;
    Ok((std::slice::from_raw_parts(a, n), std::slice::from_raw_parts(b, n)))
}

/// Cohen's kappa between two label sequences of length `n`.
///
/// # Safety
/// `a` and `b` must point to `n` readable values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn uf_cohen_kappa(a: *const i32, b: *const i32, n: usize, out: *mut f64) -> UfStatus {
    guard(|| {
        let (a, b) = label_slices(a, b, n)?;
        non_null(out, "out")?;
        *out = metrics::cohen_kappa(a, b)?;
        Ok(())
    })
}

/// Fraction of positions where two label sequences agree.
///
/// # Safety
/// As [`uf_cohen_kappa`].
#[no_mangle]
pub unsafe extern "C" fn uf_percent_agreement(a: *const i32, b: *const i32, n: usize, out: *mut f64) -> UfStatus {
    guard(|| {
        let (a, b) = label_slices(a, b, n)?;
        non_null(out, "out")?;
        *out = metrics::percent_agreement(a, b)?;
        Ok(())
    })
}

/// Single-rater absolute-agreement ICC of a row-major `items × raters`
/// matrix.
///
/// # Safety
/// `ratings` must point to `items * raters` readable values and `out` be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn uf_icc_absolute(ratings: *const f64, items: usize, raters: usize, out: *mut f64) -> UfStatus {
    guard(|| {
        non_null(ratings, "ratings")?;
        non_null(out, "out")?;
        let len = items
            .checked_mul(raters)
            .ok_or_else(|| Fail::new(UfStatus::InvalidArgument, "matrix too large"))?;
        let flat = std::slice::from_raw_parts(ratings, len);
        let rows: Vec<Vec<f64>> = flat.chunks(raters.max(1)).map(<[f64]>::to_vec).collect();
        *out = metrics::icc_absolute(&RatingsMatrix::new(&rows)?)?;
        Ok(())
    })
}

/// Creates a session in `dir` from a JSON-lines pool file. `holdout_path`
/// and `config_json` may be NULL; the default configuration is used when
/// `config_json` is NULL.
///
/// # Safety
/// Non-NULL strings must be NUL-terminated and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uf_session_create(
    dir: *const c_char,
    pool_path: *const c_char,
    holdout_path: *const c_char,
    config_json: *const c_char,
    out: *mut *mut UfSession,
) -> UfStatus {
    guard(|| {
        let dir = str_arg(dir, "dir")?;
        let pool = cli::read_corpus(Path::new(str_arg(pool_path, "pool_path")?))?;
        let holdout = if holdout_path.is_null() {
            Vec::new()
        } else {
            cli::read_corpus(Path::new(str_arg(holdout_path, "holdout_path")?))?
        };
        let config: SessionConfig = if config_json.is_null() {
            SessionConfig::default()
        } else {
            serde_json::from_str(str_arg(config_json, "config_json")?)?
        };
        non_null(out, "out")?;
        let session = Session::create(Path::new(dir), pool, holdout, config)?;
        *out = Box::into_raw(Box::new(UfSession { session }));
        Ok(())
    })
}

/// Reopens an existing session directory, recovering from an interrupted
/// run.
///
/// # Safety
/// `dir` must be NUL-terminated and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uf_session_open(dir: *const c_char, out: *mut *mut UfSession) -> UfStatus {
    guard(|| {
        let dir = str_arg(dir, "dir")?;
        non_null(out, "out")?;
        let session = Session::open(Path::new(dir))?;
        *out = Box::into_raw(Box::new(UfSession { session }));
        Ok(())
    })
}

/// Up to `n` unlabeled items to annotate next, as a JSON array.
///
/// # Safety
/// `s` must be a live handle and `out_json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uf_session_next_batch(s: *const UfSession, n: usize, out_json: *mut *mut c_char) -> UfStatus {
    guard(|| {
        non_null(s, "session")?;
        non_null(out_json, "out_json")?;
        write_json(out_json, &(*s).session.next_batch(n))
    })
}

/// Records a label (0 or 1) and writes the acknowledgement as JSON. The
/// label is durable once this returns `UF_STATUS_OK`. A retrain that falls
/// due is not run here; see [`uf_session_run_pending_retrains`].
///
/// # Safety
/// `s` must be a live handle, strings NUL-terminated, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn uf_session_submit_label(
    s: *const UfSession,
    id: *const c_char,
    label: i64,
    annotator: *const c_char,
    out_json: *mut *mut c_char,
) -> UfStatus {
    guard(|| {
        non_null(s, "session")?;
        let id = str_arg(id, "id")?;
        let annotator = str_arg(annotator, "annotator")?;
        non_null(out_json, "out_json")?;
        let ack = (*s).session.submit_label(id, label, annotator)?;
        write_json(out_json, &ack)
    })
}

/// Session status as JSON.
///
/// # Safety
/// `s` must be a live handle and `out_json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uf_session_status(s: *const UfSession, out_json: *mut *mut c_char) -> UfStatus {
    guard(|| {
        non_null(s, "session")?;
        non_null(out_json, "out_json")?;
        write_json(out_json, &(*s).session.status())
    })
}

/// Whether a retrain is due.
///
/// # Safety
/// `s` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uf_session_retrain_pending(s: *const UfSession, out: *mut bool) -> UfStatus {
    guard(|| {
        non_null(s, "session")?;
        non_null(out, "out")?;
        *out = (*s).session.retrain_pending();
        Ok(())
    })
}

/// Runs due retrains on the calling thread and reports how many ran.
///
/// # Safety
/// `s` must be a live handle and `out_ran` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn uf_session_run_pending_retrains(s: *const UfSession, out_ran: *mut usize) -> UfStatus {
    guard(|| {
        non_null(s, "session")?;
        let ran = (*s).session.run_pending_retrains()?;
        if !out_ran.is_null() {
            *out_ran = ran;
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uf_session_free(s: *mut UfSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
