//! C interface to `udlearn`.
//!
//! Every fallible function returns a [`UdlStatus`]; on failure the message
//! is available from [`udl_last_error`] on the same thread. Objects are
//! opaque handles released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use udlearn::error::Error;
use udlearn::eval::corpus_uas;
use udlearn::metrics::{MetricOptions, MetricReport};
use udlearn::parser::{parse_corpus, train, Hyperparameters, Model};
use udlearn::transform::{apply_transformation, TransformationId};
use udlearn::treebank::{parse_conllu, write_conllu, Sentence};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UdlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Format = 3,
    InvalidTree = 4,
    InvalidArgument = 5,
    Io = 6,
    Model = 7,
    Mismatch = 8,
    Panic = 9,
}

/// A list of sentences.
pub struct UdlCorpus {
    sentences: Vec<Sentence>,
}

/// A trained parser.
pub struct UdlModel {
    model: Model,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct UdlTransformStats {
    pub changed: bool,
    pub arcs_rewritten: usize,
    pub repairs_applied: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct UdlMetrics {
    /// False when the corpus has no arc between two words; `distance` is then NaN.
    pub has_distance: bool,
    pub distance: f64,
    pub predictability_bits: f64,
    pub derivation_perplexity: f64,
    pub derivation_complexity: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct UdlUas {
    pub correct: usize,
    pub total: usize,
    /// Percentage.
    pub uas: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UdlStatus {
    match e {
        Error::Format { .. } | Error::Json(_) | Error::Config { .. } => UdlStatus::Format,
        Error::InvalidTree { .. } => UdlStatus::InvalidTree,
        Error::Model { .. } => UdlStatus::Model,
        Error::InvalidArgument(_) => UdlStatus::InvalidArgument,
        Error::Mismatch { .. } => UdlStatus::Mismatch,
        Error::Io(_) => UdlStatus::Io,
    }
}

struct Failure(UdlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(UdlStatus::NullPointer, format!("{} is null", what))
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UdlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            UdlStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            UdlStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(UdlStatus::InvalidUtf8, format!("{} is not UTF-8", what)))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(null(what))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn udl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Free a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn udl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse CoNLL-U text into a new corpus.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn udl_corpus_parse(text: *const c_char, out: *mut *mut UdlCorpus) -> UdlStatus {
    guard(|| {
        out_arg(out, "out")?;
        let sentences = parse_conllu(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(UdlCorpus { sentences }));
        Ok(())
    })
}

/// Read a CoNLL-U file into a new corpus.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn udl_corpus_read(path: *const c_char, out: *mut *mut UdlCorpus) -> UdlStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = std::fs::read_to_string(str_arg(path, "path")?).map_err(Error::from)?;
        let sentences = parse_conllu(&text)?;
        *out = Box::into_raw(Box::new(UdlCorpus { sentences }));
        Ok(())
    })
}

/// # Safety
/// `corpus` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn udl_corpus_free(corpus: *mut UdlCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of sentences; 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn udl_corpus_len(corpus: *const UdlCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.sentences.len())
}

/// Number of tokens over all sentences; 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn udl_corpus_token_count(corpus: *const UdlCorpus) -> usize {
    corpus
        .as_ref()
        .map_or(0, |c| c.sentences.iter().map(Sentence::len).sum())
}

/// Serialise to CoNLL-U. Free the result with [`udl_string_free`].
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn udl_corpus_write(corpus: *const UdlCorpus, out: *mut *mut c_char) -> UdlStatus {
    guard(|| {
        out_arg(out, "out")?;
        let corpus = ref_arg(corpus, "corpus")?;
        let text = write_conllu(&corpus.sentences)?;
        let c = CString::new(text)
            .map_err(|_| Failure(UdlStatus::InvalidArgument, "text contains NUL".to_string()))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// Apply a transformation by name (`case`, `mark`, `det`, `mwe`, `name`,
/// `copula`, `coordination`) into a new corpus.
///
/// # Safety
/// `corpus` must be a live handle, `name` a NUL-terminated string, and both
/// out pointers writable. `stats` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn udl_transform(
    corpus: *const UdlCorpus,
    name: *const c_char,
    out: *mut *mut UdlCorpus,
    stats: *mut UdlTransformStats,
) -> UdlStatus {
    guard(|| {
        out_arg(out, "out")?;
        let corpus = ref_arg(corpus, "corpus")?;
        let id: TransformationId = str_arg(name, "name")?.parse()?;
        let result = apply_transformation(&corpus.sentences, id)?;
        if !stats.is_null() {
            *stats = UdlTransformStats {
                changed: result.changed,
                arcs_rewritten: result.arcs_rewritten,
                repairs_applied: result.repairs_applied,
            };
        }
        *out = Box::into_raw(Box::new(UdlCorpus {
            sentences: result.sentences,
        }));
        Ok(())
    })
}

/// Learnability metrics with default options.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn udl_metrics(corpus: *const UdlCorpus, out: *mut UdlMetrics) -> UdlStatus {
    guard(|| {
        out_arg(out, "out")?;
        let corpus = ref_arg(corpus, "corpus")?;
        if corpus.sentences.is_empty() {
            return Err(Failure(UdlStatus::InvalidArgument, "empty corpus".to_string()));
        }
        let r = MetricReport::compute("", &corpus.sentences, MetricOptions::default());
        *out = UdlMetrics {
            has_distance: r.distance.is_some(),
            distance: r.distance.unwrap_or(f64::NAN),
            predictability_bits: r.predictability_bits,
            derivation_perplexity: r.derivation_perplexity,
            derivation_complexity: r.derivation_complexity,
        };
        Ok(())
    })
}

/// Train a parser. `dev` may be NULL.
///
/// # Safety
/// `train_set` must be a live handle, `dev` NULL or a live handle, and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn udl_train(
    train_set: *const UdlCorpus,
    dev: *const UdlCorpus,
    epochs: usize,
    seed: u64,
    explore_k: usize,
    explore_p: f64,
    out: *mut *mut UdlModel,
) -> UdlStatus {
    guard(|| {
        out_arg(out, "out")?;
        let train_set = ref_arg(train_set, "train")?;
        let dev_sentences: &[Sentence] = dev.as_ref().map_or(&[], |d| &d.sentences);
        let hp = Hyperparameters {
            epochs,
            explore_k,
            explore_p,
        };
        let model = train(&train_set.sentences, dev_sentences, &hp, seed)?;
        *out = Box::into_raw(Box::new(UdlModel { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn udl_model_free(model: *mut UdlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn udl_model_save(model: *const UdlModel, path: *const c_char) -> UdlStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        model.model.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn udl_model_load(path: *const c_char, out: *mut *mut UdlModel) -> UdlStatus {
    guard(|| {
        out_arg(out, "out")?;
        let model = Model::load(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(UdlModel { model }));
        Ok(())
    })
}

/// Parse every sentence of `corpus` into a new corpus.
///
/// # Safety
/// `model` and `corpus` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn udl_parse(
    model: *const UdlModel,
    corpus: *const UdlCorpus,
    out: *mut *mut UdlCorpus,
) -> UdlStatus {
    guard(|| {
        out_arg(out, "out")?;
        let model = ref_arg(model, "model")?;
        let corpus = ref_arg(corpus, "corpus")?;
        let sentences = parse_corpus(&model.model, &corpus.sentences);
        *out = Box::into_raw(Box::new(UdlCorpus { sentences }));
        Ok(())
    })
}

/// Unlabeled attachment score of `predicted` against `gold`, punctuation
/// excluded.
///
/// # Safety
/// Both corpora must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn udl_evaluate(
    gold: *const UdlCorpus,
    predicted: *const UdlCorpus,
    out: *mut UdlUas,
) -> UdlStatus {
    guard(|| {
        out_arg(out, "out")?;
        let gold = ref_arg(gold, "gold")?;
        let predicted = ref_arg(predicted, "predicted")?;
        let count = corpus_uas(&gold.sentences, &predicted.sentences)?;
        *out = UdlUas {
            correct: count.correct,
            total: count.total,
            uas: count.percent(),
        };
        Ok(())
    })
}
