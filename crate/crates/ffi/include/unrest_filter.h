#ifndef UNREST_FILTER_H
#define UNREST_FILTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UfStatus {
  UF_STATUS_OK = 0,
  UF_STATUS_NULL_ARGUMENT = 1,
  UF_STATUS_INVALID_UTF8 = 2,
  UF_STATUS_INVALID_ARGUMENT = 3,
  UF_STATUS_IO = 4,
  UF_STATUS_PARSE = 5,
  UF_STATUS_UNKNOWN_ID = 6,
  UF_STATUS_UNTRAINED = 7,
  UF_STATUS_DEGENERATE = 8,
  UF_STATUS_PANIC = 9,
} UfStatus;

/**
 * A vocabulary and a trained model.
 */
typedef struct UfClassifier UfClassifier;

/**
 * A persistent annotation session.
 */
typedef struct UfSession UfSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a
 * successful call. The pointer stays valid until the next call.
 */
const char *uf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *uf_version(void);

/**
 * Releases a string returned through a `char **` out parameter. NULL is a
 * no-op.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void uf_string_free(char *s);

/**
 * Normalizes `text` with the default configuration and writes the tokens as
 * a JSON array of strings.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out_json` a writable pointer.
 */
enum UfStatus uf_normalize(const char *text, char **out_json);

/**
 * Loads a classifier from the `vocab.tsv` and `model.txt` written by the
 * `train` command.
 *
 * # Safety
 * Paths must be NUL-terminated strings and `out` a writable pointer.
 */
enum UfStatus uf_classifier_load(const char *vocab_path,
                                 const char *model_path,
                                 struct UfClassifier **out);

/**
 * Builds a classifier from in-memory vocabulary and model text.
 *
 * # Safety
 * Arguments must be NUL-terminated strings and `out` a writable pointer.
 */
enum UfStatus uf_classifier_from_text(const char *vocab_text,
                                      const char *model_text,
                                      struct UfClassifier **out);

/**
 * Number of features in the classifier's vocabulary.
 *
 * # Safety
 * `c` must be a live handle and `out` a writable pointer.
 */
enum UfStatus uf_classifier_vocab_size(const struct UfClassifier *c, size_t *out);

/**
 * Decision value `w·x + b` for raw text, normalized with the default
 * configuration and analyzed by whitespace. Scores at or above zero mean
 * relevant.
 *
 * # Safety
 * `c` must be a live handle, `text` a NUL-terminated string, and `out` a
 * writable pointer.
 */
enum UfStatus uf_classifier_score_text(const struct UfClassifier *c, const char *text, double *out);

/**
 * # Safety
 * `c` must be NULL or a handle from this library, not used afterwards.
 */
void uf_classifier_free(struct UfClassifier *c);

/**
 * Cohen's kappa between two label sequences of length `n`.
 *
 * # Safety
 * `a` and `b` must point to `n` readable values and `out` be writable.
 */
enum UfStatus uf_cohen_kappa(const int32_t *a, const int32_t *b, size_t n, double *out);

/**
 * Fraction of positions where two label sequences agree.
 *
 * # Safety
 * As [`uf_cohen_kappa`].
 */
enum UfStatus uf_percent_agreement(const int32_t *a, const int32_t *b, size_t n, double *out);

/**
 * Single-rater absolute-agreement ICC of a row-major `items × raters`
 * matrix.
 *
 * # Safety
 * `ratings` must point to `items * raters` readable values and `out` be
 * writable.
 */
enum UfStatus uf_icc_absolute(const double *ratings, size_t items, size_t raters, double *out);

/**
 * Creates a session in `dir` from a JSON-lines pool file. `holdout_path`
 * and `config_json` may be NULL; the default configuration is used when
 * `config_json` is NULL.
 *
 * # Safety
 * Non-NULL strings must be NUL-terminated and `out` a writable pointer.
 */
enum UfStatus uf_session_create(const char *dir,
                                const char *pool_path,
                                const char *holdout_path,
                                const char *config_json,
                                struct UfSession **out);

/**
 * Reopens an existing session directory, recovering from an interrupted
 * run.
 *
 * # Safety
 * `dir` must be NUL-terminated and `out` a writable pointer.
 */
enum UfStatus uf_session_open(const char *dir, struct UfSession **out);

/**
 * Up to `n` unlabeled items to annotate next, as a JSON array.
 *
 * # Safety
 * `s` must be a live handle and `out_json` a writable pointer.
 */
enum UfStatus uf_session_next_batch(const struct UfSession *s, size_t n, char **out_json);

/**
 * Records a label (0 or 1) and writes the acknowledgement as JSON. The
 * label is durable once this returns `UF_STATUS_OK`. A retrain that falls
 * due is not run here; see [`uf_session_run_pending_retrains`].
 *
 * # Safety
 * `s` must be a live handle, strings NUL-terminated, `out_json` writable.
 */
enum UfStatus uf_session_submit_label(const struct UfSession *s,
                                      const char *id,
                                      int64_t label,
                                      const char *annotator,
                                      char **out_json);

/**
 * Session status as JSON.
 *
 * # Safety
 * `s` must be a live handle and `out_json` a writable pointer.
 */
enum UfStatus uf_session_status(const struct UfSession *s, char **out_json);

/**
 * Whether a retrain is due.
 *
 * # Safety
 * `s` must be a live handle and `out` a writable pointer.
 */
enum UfStatus uf_session_retrain_pending(const struct UfSession *s, bool *out);

/**
 * Runs due retrains on the calling thread and reports how many ran.
 *
 * # Safety
 * `s` must be a live handle and `out_ran` NULL or writable.
 */
enum UfStatus uf_session_run_pending_retrains(const struct UfSession *s, size_t *out_ran);

/**
 * # Safety
 * `s` must be NULL or a handle from this library, not used afterwards.
 */
void uf_session_free(struct UfSession *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNREST_FILTER_H */
