#ifndef AMAC_H
#define AMAC_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum AmacStatus {
  AMAC_STATUS_OK = 0,
  AMAC_STATUS_NULL_POINTER = 1,
  AMAC_STATUS_INVALID_ARGUMENT = 2,
  AMAC_STATUS_INVALID_DISTRIBUTION = 3,
  AMAC_STATUS_INVALID_CHANNEL = 4,
  AMAC_STATUS_SHAPE_MISMATCH = 5,
  AMAC_STATUS_UNSUPPORTED = 6,
  AMAC_STATUS_NUMERICAL = 7,
  AMAC_STATUS_CAPACITY_EXCEEDED = 8,
  AMAC_STATUS_CONFIG = 9,
  AMAC_STATUS_IO = 10,
  AMAC_STATUS_PANIC = 11,
} AmacStatus;

/**
 * Opaque channel handle.
 */
typedef struct AmacChannel AmacChannel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *amac_last_error_message(void);

/**
 * Library version, static string.
 */
const char *amac_version(void);

/**
 * Builds a channel from its transition table, row-major with `x_1`
 * slowest and `y` fastest (`prod(inputs) * outputs` entries).
 *
 * # Safety
 * `inputs` must point to `senders` values and `transition` to
 * `transition_len` values; `out` must be writable.
 */
enum AmacStatus amac_channel_new(const size_t *inputs,
                                 size_t senders,
                                 size_t outputs,
                                 const double *transition,
                                 size_t transition_len,
                                 struct AmacChannel **out);

/**
 * The two-sender binary channel of the even-delay example.
 *
 * # Safety
 * `out` must be writable.
 */
enum AmacStatus amac_channel_example4(struct AmacChannel **out);

/**
 * Binary symmetric channel with crossover `eps`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AmacStatus amac_channel_bsc(double eps, struct AmacChannel **out);

/**
 * Releases a channel; null is ignored.
 *
 * # Safety
 * `channel` must come from this library and not be used afterwards.
 */
void amac_channel_free(struct AmacChannel *channel);

/**
 * Number of senders, 0 for null.
 *
 * # Safety
 * `channel` must be null or a live handle.
 */
size_t amac_channel_num_senders(const struct AmacChannel *channel);

/**
 * Writes the polytope bounds `b(S) = I(X_S; Y | X_{S^c})` for every
 * non-empty subset, `out[mask - 1]`, `2^K - 1` entries.
 *
 * # Safety
 * `input` must point to `input_len` values (marginals concatenated in
 * sender order) and `out` to `out_len` writable values.
 */
enum AmacStatus amac_polytope_bounds(const struct AmacChannel *channel,
                                     const double *input,
                                     size_t input_len,
                                     double *out,
                                     size_t out_len);

/**
 * Successive-decoding vertex for a 0-based decoding order.
 *
 * # Safety
 * `input` must point to `input_len` values, `order` and `out` to `K` values.
 */
enum AmacStatus amac_vertex(const struct AmacChannel *channel,
                            const double *input,
                            size_t input_len,
                            const size_t *order,
                            double *out);

/**
 * Whether `rates` lies in the union of polytopes over product inputs, by
 * the default grid-and-refine search. Writes 1 or 0 to `member`.
 *
 * # Safety
 * `rates` must point to `K` values; `member` must be writable.
 */
enum AmacStatus amac_union_contains(const struct AmacChannel *channel,
                                    const double *rates,
                                    int32_t *member);

/**
 * Runs a JSON experiment config (any task) and writes its artifacts to
 * `out_dir`. On success `summary` receives a JSON string naming the files;
 * release it with [`amac_string_free`]. Relative channel files resolve
 * against the working directory.
 *
 * # Safety
 * Strings must be NUL-terminated; `summary` must be writable.
 */
enum AmacStatus amac_run_config(const char *config_json, const char *out_dir, char **summary);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void amac_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AMAC_H */
