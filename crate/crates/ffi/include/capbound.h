#ifndef CAPBOUND_H
#define CAPBOUND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum CbStatus {
  CB_STATUS_OK = 0,
  CB_STATUS_NULL_POINTER = 1,
  CB_STATUS_INVALID_UTF8 = 2,
  // Malformed input, unphysical map or state, bad options.
  CB_STATUS_VALIDATION = 3,
  // The SDP solver failed or a bound chain came out inconsistent.
  CB_STATUS_SOLVER = 4,
  CB_STATUS_PANIC = 5,
} CbStatus;

// Single-letter quantity of a channel computed by [`cb_channel_quantity`].
typedef enum CbQuantity {
  // Coherent information, heuristic lower bound.
  CB_QUANTITY_Q1 = 0,
  // Private information, heuristic lower bound.
  CB_QUANTITY_P1 = 1,
  // Holevo information.
  CB_QUANTITY_CHI = 2,
  // Entanglement-assisted capacity.
  CB_QUANTITY_CE = 3,
  // log2 of the diamond norm of the transpose composed with the channel.
  CB_QUANTITY_TRANSPOSE_BOUND = 4,
  // Diamond distance to the nearest degradable composition.
  CB_QUANTITY_EPS_DEGRADABLE = 5,
  // Same for antidegradable.
  CB_QUANTITY_EPS_ANTIDEGRADABLE = 6,
} CbQuantity;

// Opaque channel handle.
typedef struct CbChannel CbChannel;

// Opaque bipartite state handle.
typedef struct CbState CbState;

// Optimizer and solver settings. Obtain defaults from [`cb_options_default`].
typedef struct CbOptions {
  size_t restarts;
  size_t max_iter;
  double tol;
  uint64_t seed;
  size_t budget;
  double sdp_tol;
  uint32_t sdp_max_iter;
} CbOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *cb_version(void);

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next call on the same thread.
const char *cb_last_error_message(void);

struct CbOptions cb_options_default(void);

// Frees a string returned by the library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void cb_string_free(char *s);

// Parses a channel from its JSON form (`dim_in`, `dim_out`, `kraus`).
//
// # Safety
// `json` must be NUL-terminated; `out` must be writable.
enum CbStatus cb_channel_from_json(const char *json, struct CbChannel **out);

// Builds a named channel family, e.g. `erasure` with params `{d, p}`.
//
// # Safety
// `name` must be NUL-terminated; `params` must hold `n_params` values.
enum CbStatus cb_channel_builtin(const char *name,
                                 const double *params,
                                 size_t n_params,
                                 struct CbChannel **out);

// Builds a channel from `count` Kraus operators, each `dim_out x dim_in`,
// row-major with interleaved real and imaginary parts.
//
// # Safety
// `data` must hold `2 * count * dim_out * dim_in` values.
enum CbStatus cb_channel_from_kraus(size_t dim_in,
                                    size_t dim_out,
                                    size_t count,
                                    const double *data,
                                    struct CbChannel **out);

// # Safety
// `ch` must come from this library and not have been freed. NULL is ignored.
void cb_channel_free(struct CbChannel *ch);

// # Safety
// `ch` must be a live handle; each out pointer must be NULL or writable.
enum CbStatus cb_channel_dims(const struct CbChannel *ch,
                              size_t *dim_in,
                              size_t *dim_out,
                              size_t *dim_env);

// Complementary channel to the environment.
//
// # Safety
// `ch` must be a live handle; `out` must be writable.
enum CbStatus cb_channel_complement(const struct CbChannel *ch, struct CbChannel **out);

// JSON form of the channel; free with [`cb_string_free`].
//
// # Safety
// `ch` must be a live handle; `out` must be writable.
enum CbStatus cb_channel_to_json(const struct CbChannel *ch, char **out);

// Parses a bipartite state from JSON (`dim_a`, `dim_b`, `rho`).
//
// # Safety
// `json` must be NUL-terminated; `out` must be writable.
enum CbStatus cb_state_from_json(const char *json, struct CbState **out);

// Builds a state on `A ⊗ B` from a row-major density matrix with interleaved
// real and imaginary parts.
//
// # Safety
// `data` must hold `2 * (dim_a * dim_b)^2` values.
enum CbStatus cb_state_from_density(size_t dim_a,
                                    size_t dim_b,
                                    const double *data,
                                    struct CbState **out);

// # Safety
// `st` must come from this library and not have been freed. NULL is ignored.
void cb_state_free(struct CbState *st);

// Evaluates one quantity. `opts` may be NULL for defaults.
//
// # Safety
// `ch` must be a live handle; `out` must be writable.
enum CbStatus cb_channel_quantity(const struct CbChannel *ch,
                                  enum CbQuantity quantity,
                                  const struct CbOptions *opts,
                                  double *out);

// Diamond norm of the difference of two channels with equal dimensions.
//
// # Safety
// `a` and `b` must be live handles; `out` must be writable.
enum CbStatus cb_diamond_distance(const struct CbChannel *a,
                                  const struct CbChannel *b,
                                  const struct CbOptions *opts,
                                  double *out);

// Full bound report, same JSON as `capbound bounds --format json`.
// `side_channel` of 0 skips the symmetric side-channel chains.
//
// # Safety
// `ch` must be a live handle; `out` must be writable.
enum CbStatus cb_bounds_json(const struct CbChannel *ch,
                             const struct CbOptions *opts,
                             size_t side_channel,
                             char **out);

// Approximate degradability report, same JSON as `capbound degradability`.
//
// # Safety
// `ch` must be a live handle; `out` must be writable.
enum CbStatus cb_degradability_json(const struct CbChannel *ch,
                                    const struct CbOptions *opts,
                                    char **out);

// Distillation bounds for a state, same JSON as `capbound state-bounds`.
//
// # Safety
// `st` must be a live handle; `out` must be writable.
enum CbStatus cb_state_bounds_json(const struct CbState *st,
                                   const struct CbOptions *opts,
                                   bool orders,
                                   char **out);

// Runs the bi-PPT search. `config_json` holds a search configuration; absent
// fields take their defaults, and NULL means all defaults.
//
// # Safety
// `config_json` must be NULL or NUL-terminated; `out` must be writable.
enum CbStatus cb_search_bippt_json(const char *config_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAPBOUND_H */
