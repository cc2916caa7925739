#ifndef CJL_H
#define CJL_H

/* Generated by cbindgen from the cjl-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CjlDialect {
  CJL_DIALECT_LPC_PLUS = 0,
  CJL_DIALECT_LPC_INT = 1,
  CJL_DIALECT_LPC_PRIME = 2,
  CJL_DIALECT_LPC_K_PLUS = 3,
  CJL_DIALECT_J4C_PLUS = 4,
  CJL_DIALECT_JC_PLUS = 5,
  CJL_DIALECT_L = 6,
  CJL_DIALECT_JRC = 7,
} CjlDialect;

// Result code of every fallible call.
typedef enum CjlStatus {
  CJL_STATUS_OK = 0,
  CJL_STATUS_NULL_ARGUMENT = 1,
  CJL_STATUS_INVALID_UTF8 = 2,
  CJL_STATUS_SYNTAX = 3,
  CJL_STATUS_MODEL = 4,
  CJL_STATUS_DIALECT = 5,
  CJL_STATUS_TABLEAU = 6,
  CJL_STATUS_DERIVATION = 7,
  CJL_STATUS_PANIC = 99,
} CjlStatus;

// Tableau outcome.
typedef enum CjlVerdict {
  CJL_VERDICT_CLOSED = 0,
  CJL_VERDICT_OPEN = 1,
  CJL_VERDICT_EXHAUSTED = 2,
} CjlVerdict;

// Parsed formula together with the dialect it was parsed in.
typedef struct CjlFormula CjlFormula;

// Finite Kripke or Routley model.
typedef struct CjlModel CjlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *cjl_version(void);

// Message describing the last failure on this thread, or null after a successful call.
//
// # Safety
// The returned pointer is valid until the next `cjl_*` call on the same thread and must not be freed.
const char *cjl_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a pointer obtained from this library that has not been freed yet.
void cjl_string_free(char *s);

// Parses `text` in `dialect` and stores a new formula handle in `*out`.
//
// # Safety
// `text` must be a valid nul-terminated string and `out` a valid pointer to writable storage.
enum CjlStatus cjl_formula_parse(const char *text,
                                 enum CjlDialect dialect,
                                 struct CjlFormula **out);

// Canonical text of a formula, written to `*out` as an owned string.
//
// # Safety
// `formula` must be a live handle and `out` a valid pointer to writable storage.
enum CjlStatus cjl_formula_to_string(const struct CjlFormula *formula, char **out);

// Releases a formula handle.
//
// # Safety
// `formula` must be null or a handle from [`cjl_formula_parse`] that has not been freed yet.
void cjl_formula_free(struct CjlFormula *formula);

// Loads a model from its JSON document and stores a new handle in `*out`.
//
// # Safety
// `json` must be a valid nul-terminated string and `out` a valid pointer to writable storage.
enum CjlStatus cjl_model_from_json(const char *json, struct CjlModel **out);

// Releases a model handle.
//
// # Safety
// `model` must be null or a handle from [`cjl_model_from_json`] that has not been freed yet.
void cjl_model_free(struct CjlModel *model);

// Evaluates `formula` at the named state and writes the truth value to `*out`.
//
// # Safety
// `model` and `formula` must be live handles, `state` a valid nul-terminated string and `out`
// a valid pointer to writable storage.
enum CjlStatus cjl_model_eval(const struct CjlModel *model,
                              const char *state,
                              const struct CjlFormula *formula,
                              bool *out);

// Checks the frame conditions of `profile` over the subformula closure of `queries` and
// writes whether all of them hold to `*out`. Routley models take the JRC profile only. The condition report is left in [`cjl_last_error`]
// only when a condition fails.
//
// # Safety
// `model` must be a live handle, `queries` must point to `len` live formula handles (or be
// null when `len` is 0) and `out` must be a valid pointer to writable storage.
enum CjlStatus cjl_model_check_conditions(const struct CjlModel *model,
                                          enum CjlDialect profile,
                                          const struct CjlFormula *const *queries,
                                          uintptr_t len,
                                          bool *out);

// Runs the JRC tableau on `premises ⊢ goal` and writes the verdict to `*out`.
//
// # Safety
// `premises` must point to `len` live formula handles (or be null when `len` is 0), `goal`
// must be a live handle and `out` a valid pointer to writable storage.
enum CjlStatus cjl_prove(const struct CjlFormula *const *premises,
                         uintptr_t len,
                         const struct CjlFormula *goal,
                         uint32_t max_fresh_labels,
                         uintptr_t max_steps,
                         enum CjlVerdict *out);

// Searches for a countermodel of at most `bound` states to `premises ⊢ goal` in the goal's
// dialect. Writes its JSON document to `*out`, or null when there is none.
//
// # Safety
// `premises` must point to `len` live formula handles (or be null when `len` is 0), `goal`
// must be a live handle and `out` a valid pointer to writable storage.
enum CjlStatus cjl_falsify(const struct CjlFormula *const *premises,
                           uintptr_t len,
                           const struct CjlFormula *goal,
                           uintptr_t bound,
                           char **out);

// Checks a derivation in text form against an empty constant specification and writes
// whether it is accepted to `*out`. The rejection reason is left in [`cjl_last_error`].
//
// # Safety
// `text` must be a valid nul-terminated string and `out` a valid pointer to writable storage.
enum CjlStatus cjl_check_derivation(const char *text, enum CjlDialect dialect, bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CJL_H */
