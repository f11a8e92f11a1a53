#ifndef CAUSAL_SPACES_H
#define CAUSAL_SPACES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_UTF8 = 2,
  CS_STATUS_PARSE = 3,
  CS_STATUS_DOMAIN = 4,
  CS_STATUS_INVALID_DISTRIBUTION = 5,
  CS_STATUS_INVALID_SPACE = 6,
  CS_STATUS_NULL_SET = 7,
  CS_STATUS_CONTRACT = 8,
  CS_STATUS_CYCLIC = 9,
  CS_STATUS_SINGULAR = 10,
  CS_STATUS_INTERNAL = 11,
  CS_STATUS_PANIC = 12,
} CsStatus;

typedef enum CsEffectClass {
  CS_EFFECT_CLASS_NONE = 0,
  CS_EFFECT_CLASS_ACTIVE = 1,
  CS_EFFECT_CLASS_DORMANT = 2,
} CsEffectClass;

/**
 * Opaque handle to a finite causal space.
 */
typedef struct CsSpace CsSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *cs_last_error(void);

/**
 * Parses a space document. The axioms are not checked; see [`cs_space_validate`].
 *
 * # Safety
 * `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
 */
enum CsStatus cs_space_from_json(const char *json, struct CsSpace **out);

/**
 * Compiles an SCM document.
 *
 * # Safety
 * As for [`cs_space_from_json`].
 */
enum CsStatus cs_space_from_scm_json(const char *json, struct CsSpace **out);

/**
 * Serializes the space as a document listing every kernel.
 *
 * # Safety
 * `cs` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum CsStatus cs_space_to_json(const struct CsSpace *cs, char **out);

/**
 * Checks both axioms. `report` may be NULL; otherwise it receives the JSON report.
 *
 * # Safety
 * `cs` must be NULL or a live handle; `valid` must be NULL or writable;
 * `report` must be NULL or writable.
 */
enum CsStatus cs_space_validate(const struct CsSpace *cs, bool *valid, char **report);

/**
 * Number of atoms of Ω, the length of the array [`cs_space_p`] fills.
 *
 * # Safety
 * `cs` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum CsStatus cs_space_atoms(const struct CsSpace *cs, size_t *out);

/**
 * Copies ℙ, row-major in ascending component index, into `buf[0..len]`.
 *
 * # Safety
 * `cs` must be NULL or a live handle; `buf` must be NULL or hold `len` doubles.
 */
enum CsStatus cs_space_p(const struct CsSpace *cs, double *buf, size_t len);

/**
 * Probability under ℙ of an event expression such as `"X=1 & Y in {0,2}"`.
 *
 * # Safety
 * `cs` must be NULL or a live handle; `event` must be NULL or NUL-terminated;
 * `out` must be NULL or writable.
 */
enum CsStatus cs_space_probability(const struct CsSpace *cs, const char *event, double *out);

/**
 * Hard intervention on the components listed in `on` (indices or names, e.g. `"0,2"`)
 * with measure `q[0..q_len]` on Ω_U, row-major. Writes a new handle to `out`.
 *
 * # Safety
 * `cs` must be NULL or a live handle; `on` must be NULL or NUL-terminated;
 * `q` must be NULL or hold `q_len` doubles; `out` must be NULL or writable.
 */
enum CsStatus cs_space_intervene_hard(const struct CsSpace *cs,
                                      const char *on,
                                      const double *q,
                                      size_t q_len,
                                      struct CsSpace **out);

/**
 * Effect class of ℋ_U on an event.
 *
 * # Safety
 * `cs` must be NULL or a live handle; `u` and `event` must be NULL or NUL-terminated;
 * `out` must be NULL or writable.
 */
enum CsStatus cs_space_classify(const struct CsSpace *cs,
                                const char *u,
                                const char *event,
                                enum CsEffectClass *out);

/**
 * Brownian grid of `steps` points on `(0, horizon]`, intervened and conditioned to
 * `value` at time `at`, as CSV with a header row.
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum CsStatus cs_brownian_csv(size_t steps, double horizon, double at, double value, char **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `cs` must be NULL or a handle from this library not yet freed.
 */
void cs_space_free(struct CsSpace *cs);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void cs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAUSAL_SPACES_H */
