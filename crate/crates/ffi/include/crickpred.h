#ifndef CRICKPRED_H
#define CRICKPRED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CpStatus {
  CP_STATUS_OK = 0,
  CP_STATUS_NULL_ARGUMENT = 1,
  CP_STATUS_INVALID_UTF8 = 2,
  CP_STATUS_IO = 3,
  CP_STATUS_PARSE = 4,
  CP_STATUS_UNSUPPORTED_VERSION = 5,
  CP_STATUS_SCHEMA_MISMATCH = 6,
  CP_STATUS_UNKNOWN_PLAYER = 7,
  CP_STATUS_INVALID_ARGUMENT = 8,
  CP_STATUS_BUFFER_TOO_SMALL = 9,
  CP_STATUS_MODEL_NOT_LOADED = 10,
  CP_STATUS_INTERNAL = 11,
} CpStatus;

/**
 * A trained model.
 */
typedef struct CpModel CpModel;

/**
 * Innings histories, rosters and loaded models for player predictions.
 */
typedef struct CpPredictor CpPredictor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next crickpred call on the same thread.
 */
const char *cp_last_error(void);

/**
 * Library version as a static string.
 */
const char *cp_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void cp_string_free(char *s);

/**
 * Loads a model file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CpStatus cp_model_load(const char *path, struct CpModel **out);

/**
 * Parses a model from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CpStatus cp_model_from_json(const char *json, struct CpModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be freed twice.
 */
void cp_model_free(struct CpModel *model);

/**
 * Number of classes, or 0 for a null model.
 *
 * # Safety
 * `model` must be null or a live model.
 */
size_t cp_model_n_classes(const struct CpModel *model);

/**
 * Number of features, or 0 for a null model.
 *
 * # Safety
 * `model` must be null or a live model.
 */
size_t cp_model_n_features(const struct CpModel *model);

/**
 * Learner token ("nb", "tree", "rf" or "svm") as a static string, or null.
 *
 * # Safety
 * `model` must be null or a live model.
 */
const char *cp_model_kind(const struct CpModel *model);

/**
 * Name of feature `index`, valid while the model lives; null when out of
 * range.
 *
 * # Safety
 * `model` must be null or a live model.
 */
const char *cp_model_feature_name(const struct CpModel *model, size_t index);

/**
 * Encodes a categorical token of feature `index` as the value a row
 * carries. Unseen tokens get a value no training row had.
 *
 * # Safety
 * `model` must be a live model, `token` a NUL-terminated string and `out`
 * writable.
 */
enum CpStatus cp_model_encode_token(const struct CpModel *model,
                                    size_t index,
                                    const char *token,
                                    double *out);

/**
 * Predicts one encoded row of `n_values` features. NaN marks a missing
 * numeric value, filled with the model's training means. Writes the
 * 1-based class to `out_class` and `n_classes` probabilities to
 * `out_probabilities` (which may be null when `probabilities_len` is 0).
 *
 * # Safety
 * `values` must hold `n_values` doubles, `out_class` must be writable and
 * `out_probabilities` must hold `probabilities_len` doubles.
 */
enum CpStatus cp_model_predict(const struct CpModel *model,
                               const double *values,
                               size_t n_values,
                               uint8_t *out_class,
                               double *out_probabilities,
                               size_t probabilities_len);

/**
 * Opens a data directory holding batting.csv, bowling.csv and optionally
 * rosters.csv. `weights_path` may be null for the built-in weights.
 *
 * # Safety
 * String arguments must be NUL-terminated (or null where allowed) and
 * `out` writable.
 */
enum CpStatus cp_predictor_open(const char *data_dir,
                                const char *weights_path,
                                struct CpPredictor **out);

/**
 * Copies a model into the predictor, replacing any model for its target.
 *
 * # Safety
 * Both handles must be live.
 */
enum CpStatus cp_predictor_add_model(struct CpPredictor *predictor, const struct CpModel *model);

/**
 * Answers a JSON prediction request (player_id, target, context) with a
 * JSON response written to `*out_json`.
 *
 * # Safety
 * `predictor` must be live, `request_json` NUL-terminated and `out_json`
 * writable.
 */
enum CpStatus cp_predictor_predict_json(const struct CpPredictor *predictor,
                                        const char *request_json,
                                        char **out_json);

/**
 * Releases a predictor. Null is ignored.
 *
 * # Safety
 * `predictor` must come from this library and not be freed twice.
 */
void cp_predictor_free(struct CpPredictor *predictor);

/**
 * Priority weights of an `n` x `n` row-major pairwise comparison matrix.
 * Writes `n` weights to `out_weights` and the consistency ratio to
 * `out_cr`.
 *
 * # Safety
 * `matrix` must hold `n * n` doubles, `out_weights` `n` doubles, and
 * `out_cr` must be writable.
 */
enum CpStatus cp_ahp_weights(const double *matrix, size_t n, double *out_weights, double *out_cr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRICKPRED_H */
