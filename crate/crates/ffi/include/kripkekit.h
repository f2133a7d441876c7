#ifndef KRIPKEKIT_H
#define KRIPKEKIT_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KkStatus {
  KK_STATUS_OK = 0,
  KK_STATUS_NULL_ARGUMENT = 1,
  KK_STATUS_INVALID_UTF8 = 2,
  KK_STATUS_JSON = 3,
  KK_STATUS_SCHEMA = 4,
  KK_STATUS_PARSE = 5,
  KK_STATUS_INVALID_STRUCTURE = 6,
  KK_STATUS_UNKNOWN_NAME = 7,
  KK_STATUS_NOT_CAUCHY_COMPLETE = 8,
  KK_STATUS_UNKNOWN_SUITE = 9,
  KK_STATUS_IO = 10,
  KK_STATUS_PANIC = 11,
} KkStatus;

/**
 * A finite category.
 */
typedef struct KkCategory KkCategory;

/**
 * A Kripke model: a poset frame, an optional bimodule and a valuation.
 */
typedef struct KkModel KkModel;

/**
 * A presheaf model over a Cauchy-complete finite category.
 */
typedef struct KkModel2d KkModel2d;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or null.
 * The pointer stays valid until the next call on the same thread.
 */
const char *kk_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void kk_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *kk_version(void);

/**
 * Parses a Kripke model document. With `close`, the relation is replaced
 * by the least bimodule containing it.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out_model` must be writable.
 */
enum KkStatus kk_model_from_json(const char *json, bool close, struct KkModel **out_model);

/**
 * # Safety
 * `model` must come from [`kk_model_from_json`] or be null.
 */
void kk_model_free(struct KkModel *model);

/**
 * Does `formula` hold at `world`? Both semantics are computed and must agree.
 *
 * # Safety
 * Pointers must be valid; strings nul-terminated.
 */
enum KkStatus kk_model_check(const struct KkModel *model,
                             const char *world,
                             const char *formula,
                             bool *out_holds);

/**
 * The truth set of `formula` as a JSON array of world names.
 *
 * # Safety
 * Pointers must be valid; free the result with [`kk_string_free`].
 */
enum KkStatus kk_model_interp(const struct KkModel *model, const char *formula, char **out_json);

/**
 * Parses a presheaf model document. Fails with
 * `KK_STATUS_NOT_CAUCHY_COMPLETE` when the base needs completing first.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out_model` must be writable.
 */
enum KkStatus kk_model2d_from_json(const char *json, struct KkModel2d **out_model);

/**
 * # Safety
 * `model` must come from [`kk_model2d_from_json`] or be null.
 */
void kk_model2d_free(struct KkModel2d *model);

/**
 * The proofs of `formula` at object `world`: their number, and optionally
 * their labels as a JSON array (pass null for `out_json` to skip).
 *
 * # Safety
 * Pointers must be valid; free any returned string with [`kk_string_free`].
 */
enum KkStatus kk_model2d_proofs(const struct KkModel2d *model,
                                const char *world,
                                const char *formula,
                                size_t *out_count,
                                char **out_json);

/**
 * # Safety
 * `json` must be a nul-terminated string; `out_category` must be writable.
 */
enum KkStatus kk_category_from_json(const char *json, struct KkCategory **out_category);

/**
 * # Safety
 * `category` must come from this library or be null.
 */
void kk_category_free(struct KkCategory *category);

/**
 * Object and arrow counts.
 *
 * # Safety
 * Pointers must be valid.
 */
enum KkStatus kk_category_size(const struct KkCategory *category,
                               size_t *out_objects,
                               size_t *out_arrows);

/**
 * Whether every idempotent splits.
 *
 * # Safety
 * Pointers must be valid.
 */
enum KkStatus kk_category_is_cauchy_complete(const struct KkCategory *category, bool *out_complete);

/**
 * The Karoubi envelope, as a new handle.
 *
 * # Safety
 * Pointers must be valid; free the result with [`kk_category_free`].
 */
enum KkStatus kk_category_complete(const struct KkCategory *category,
                                   struct KkCategory **out_category);

/**
 * The category as a JSON document in the input format.
 *
 * # Safety
 * Pointers must be valid; free the result with [`kk_string_free`].
 */
enum KkStatus kk_category_to_json(const struct KkCategory *category, char **out_json);

/**
 * Runs a verification suite. `out_passed` is true when every case
 * passed; the full report, seed included, goes to `out_json` if non-null.
 *
 * # Safety
 * Pointers must be valid; free any returned string with [`kk_string_free`].
 */
enum KkStatus kk_verify(const char *suite,
                        size_t size_cap,
                        uint64_t seed,
                        size_t count,
                        bool *out_passed,
                        char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* KRIPKEKIT_H */
