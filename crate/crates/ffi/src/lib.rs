//! C ABI for crickpred.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns a [`CpStatus`];
//! on failure, [`cp_last_error`] describes the most recent error on the
//! calling thread. Strings returned through `char **` out-parameters are
//! heap-allocated and released with [`cp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use crickpred::ahp::{weights_from_matrix, PairwiseMatrix};
use crickpred::featurize::{Histories, WeightVectors};
use crickpred::ingest::{parse_batting_csv, parse_bowling_csv, parse_rosters_csv, Rosters};
use crickpred::learners::{LearnerError, TrainedModel};
use crickpred::predict::{PredictError, PredictionRequest, Predictor};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    UnsupportedVersion = 5,
    SchemaMismatch = 6,
    UnknownPlayer = 7,
    InvalidArgument = 8,
    BufferTooSmall = 9,
    ModelNotLoaded = 10,
    Internal = 11,
}

/// A trained model.
pub struct CpModel {
    model: TrainedModel,
    names: Vec<CString>,
}

/// Innings histories, rosters and loaded models for player predictions.
pub struct CpPredictor {
    predictor: Predictor,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(CpStatus, String);

impl Failure {
    fn new(status: CpStatus, message: impl Into<String>) -> Self {
        Failure(status, message.into())
    }
}

impl From<LearnerError> for Failure {
    fn from(e: LearnerError) -> Self {
        let status = match e {
            LearnerError::Io { .. } => CpStatus::Io,
            LearnerError::Version { .. } => CpStatus::UnsupportedVersion,
            LearnerError::Deserialize(_) => CpStatus::Parse,
            LearnerError::SchemaMismatch(_) => CpStatus::SchemaMismatch,
            LearnerError::MissingValues { .. } => CpStatus::InvalidArgument,
            _ => CpStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

impl From<PredictError> for Failure {
    fn from(e: PredictError) -> Self {
        let status = match &e {
            PredictError::ModelNotLoaded(_) => CpStatus::ModelNotLoaded,
            PredictError::UnknownPlayer(_) | PredictError::UnknownTeam(_) => CpStatus::UnknownPlayer,
            PredictError::Invalid(_) => CpStatus::InvalidArgument,
            PredictError::Learner(LearnerError::SchemaMismatch(_)) => CpStatus::SchemaMismatch,
            PredictError::Featurize(_) | PredictError::Learner(_) => CpStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CpStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("panic inside crickpred");
            CpStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(CpStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(CpStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

fn out_ptr<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::new(CpStatus::NullArgument, format!("{name} is null")));
    }
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| Failure::new(CpStatus::Internal, "output holds a NUL byte"))
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next crickpred call on the same thread.
#[no_mangle]
pub extern "C" fn cp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn wrap_model(model: TrainedModel) -> *mut CpModel {
    let names = model.schema.features.iter().map(|f| CString::new(f.name.as_str()).unwrap_or_default()).collect();
    Box::into_raw(Box::new(CpModel { model, names }))
}

/// Loads a model file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cp_model_load(path: *const c_char, out: *mut *mut CpModel) -> CpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let model = TrainedModel::load(str_arg(path, "path")?)?;
        *out = wrap_model(model);
        Ok(())
    })
}

/// Parses a model from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cp_model_from_json(json: *const c_char, out: *mut *mut CpModel) -> CpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let model = TrainedModel::from_json(str_arg(json, "json")?)?;
        *out = wrap_model(model);
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cp_model_free(model: *mut CpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of classes, or 0 for a null model.
///
/// # Safety
/// `model` must be null or a live model.
#[no_mangle]
pub unsafe extern "C" fn cp_model_n_classes(model: *const CpModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.n_classes())
}

/// Number of features, or 0 for a null model.
///
/// # Safety
/// `model` must be null or a live model.
#[no_mangle]
pub unsafe extern "C" fn cp_model_n_features(model: *const CpModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.schema.len())
}

/// Learner token ("nb", "tree", "rf" or "svm") as a static string, or null.
///
/// # Safety
/// `model` must be null or a live model.
#[no_mangle]
pub unsafe extern "C" fn cp_model_kind(model: *const CpModel) -> *const c_char {
    match model.as_ref().map(|m| m.model.kind().token()) {
        Some("nb") => c"nb".as_ptr(),
        Some("tree") => c"tree".as_ptr(),
        Some("rf") => c"rf".as_ptr(),
        Some("svm") => c"svm".as_ptr(),
        _ => ptr::null(),
    }
}

/// Name of feature `index`, valid while the model lives; null when out of
/// range.
///
/// # Safety
/// `model` must be null or a live model.
#[no_mangle]
pub unsafe extern "C" fn cp_model_feature_name(model: *const CpModel, index: usize) -> *const c_char {
    model.as_ref().and_then(|m| m.names.get(index)).map_or(ptr::null(), |n| n.as_ptr())
}

/// Encodes a categorical token of feature `index` as the value a row
/// carries. Unseen tokens get a value no training row had.
///
/// # Safety
/// `model` must be a live model, `token` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cp_model_encode_token(
    model: *const CpModel,
    index: usize,
    token: *const c_char,
    out: *mut f64,
) -> CpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| Failure::new(CpStatus::NullArgument, "model is null"))?;
        out_ptr(out, "out")?;
        let feature = m
            .model
            .schema
            .features
            .get(index)
            .ok_or_else(|| Failure::new(CpStatus::InvalidArgument, format!("no feature {index}")))?;
        if feature.is_numeric() {
            return Err(Failure::new(CpStatus::InvalidArgument, format!("{} is numeric", feature.name)));
        }
        *out = m.model.schema.encode_token(index, str_arg(token, "token")?);
        Ok(())
    })
}

/// Predicts one encoded row of `n_values` features. NaN marks a missing
/// numeric value, filled with the model's training means. Writes the
/// 1-based class to `out_class` and `n_classes` probabilities to
/// `out_probabilities` (which may be null when `probabilities_len` is 0).
///
/// # Safety
/// `values` must hold `n_values` doubles, `out_class` must be writable and
/// `out_probabilities` must hold `probabilities_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cp_model_predict(
    model: *const CpModel,
    values: *const f64,
    n_values: usize,
    out_class: *mut u8,
    out_probabilities: *mut f64,
    probabilities_len: usize,
) -> CpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| Failure::new(CpStatus::NullArgument, "model is null"))?;
        if values.is_null() && n_values > 0 {
            return Err(Failure::new(CpStatus::NullArgument, "values is null"));
        }
        out_ptr(out_class, "out_class")?;
        let mut row = if n_values == 0 { Vec::new() } else { std::slice::from_raw_parts(values, n_values).to_vec() };
        if row.len() != m.model.schema.len() {
            return Err(Failure::new(
                CpStatus::SchemaMismatch,
                format!("row has {} values, model expects {}", row.len(), m.model.schema.len()),
            ));
        }
        for (j, v) in row.iter_mut().enumerate() {
            if v.is_nan() && m.model.schema.features[j].is_numeric() {
                *v = m.model.impute.as_ref().and_then(|s| s.global_means[j]).unwrap_or(0.0);
            }
        }
        let p = m.model.predict(&row)?;
        if probabilities_len > 0 {
            if out_probabilities.is_null() {
                return Err(Failure::new(CpStatus::NullArgument, "out_probabilities is null"));
            }
            if probabilities_len < p.probabilities.len() {
                return Err(Failure::new(
                    CpStatus::BufferTooSmall,
                    format!("need {} probabilities, buffer holds {probabilities_len}", p.probabilities.len()),
                ));
            }
            std::slice::from_raw_parts_mut(out_probabilities, p.probabilities.len()).copy_from_slice(&p.probabilities);
        }
        *out_class = p.class;
        Ok(())
    })
}

/// Opens a data directory holding batting.csv, bowling.csv and optionally
/// rosters.csv. `weights_path` may be null for the built-in weights.
///
/// # Safety
/// String arguments must be NUL-terminated (or null where allowed) and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cp_predictor_open(
    data_dir: *const c_char,
    weights_path: *const c_char,
    out: *mut *mut CpPredictor,
) -> CpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let dir = Path::new(str_arg(data_dir, "data_dir")?);
        let io = |e: crickpred::ingest::IngestError| Failure::new(CpStatus::Io, e.to_string());
        let batting = parse_batting_csv(dir.join("batting.csv")).map_err(io)?;
        let bowling = parse_bowling_csv(dir.join("bowling.csv")).map_err(io)?;
        let roster_path = dir.join("rosters.csv");
        let rosters =
            if roster_path.exists() { parse_rosters_csv(roster_path).map_err(io)? } else { Rosters::default() };
        let weights = if weights_path.is_null() {
            WeightVectors::paper_default()
        } else {
            WeightVectors::load(str_arg(weights_path, "weights_path")?)
                .map_err(|e| Failure::new(CpStatus::Parse, e.to_string()))?
        };
        let predictor = Predictor::new(Histories::new(batting, bowling), rosters, weights);
        *out = Box::into_raw(Box::new(CpPredictor { predictor }));
        Ok(())
    })
}

/// Copies a model into the predictor, replacing any model for its target.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn cp_predictor_add_model(predictor: *mut CpPredictor, model: *const CpModel) -> CpStatus {
    guard(|| {
        let p = predictor.as_mut().ok_or_else(|| Failure::new(CpStatus::NullArgument, "predictor is null"))?;
        let m = model.as_ref().ok_or_else(|| Failure::new(CpStatus::NullArgument, "model is null"))?;
        p.predictor.add_model(m.model.clone())?;
        Ok(())
    })
}

/// Answers a JSON prediction request (player_id, target, context) with a
/// JSON response written to `*out_json`.
///
/// # Safety
/// `predictor` must be live, `request_json` NUL-terminated and `out_json`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cp_predictor_predict_json(
    predictor: *const CpPredictor,
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> CpStatus {
    guard(|| {
        let p = predictor.as_ref().ok_or_else(|| Failure::new(CpStatus::NullArgument, "predictor is null"))?;
        out_ptr(out_json, "out_json")?;
        let request: PredictionRequest = serde_json::from_str(str_arg(request_json, "request_json")?)
            .map_err(|e| Failure::new(CpStatus::Parse, e.to_string()))?;
        let response = p.predictor.predict(&request)?;
        let body = serde_json::to_string(&response).map_err(|e| Failure::new(CpStatus::Internal, e.to_string()))?;
        *out_json = into_c_string(body)?;
        Ok(())
    })
}

/// Releases a predictor. Null is ignored.
///
/// # Safety
/// `predictor` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cp_predictor_free(predictor: *mut CpPredictor) {
    if !predictor.is_null() {
        drop(Box::from_raw(predictor));
    }
}

/// Priority weights of an `n` x `n` row-major pairwise comparison matrix.
/// Writes `n` weights to `out_weights` and the consistency ratio to
/// `out_cr`.
///
/// # Safety
/// `matrix` must hold `n * n` doubles, `out_weights` `n` doubles, and
/// `out_cr` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cp_ahp_weights(
    matrix: *const f64,
    n: usize,
    out_weights: *mut f64,
    out_cr: *mut f64,
) -> CpStatus {
    guard(|| {
        if matrix.is_null() || out_weights.is_null() {
            return Err(Failure::new(CpStatus::NullArgument, "matrix and out_weights must be non-null"));
        }
        out_ptr(out_cr, "out_cr")?;
        let flat = std::slice::from_raw_parts(matrix, n * n);
        let rows = flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let m = PairwiseMatrix::new(rows).map_err(|e| Failure::new(CpStatus::InvalidArgument, e.to_string()))?;
        let pv = weights_from_matrix(&m).map_err(|e| Failure::new(CpStatus::InvalidArgument, e.to_string()))?;
        std::slice::from_raw_parts_mut(out_weights, n).copy_from_slice(&pv.weights);
        *out_cr = pv.consistency_ratio;
        Ok(())
    })
}
