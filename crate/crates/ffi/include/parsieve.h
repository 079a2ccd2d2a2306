#ifndef PARSIEVE_H
#define PARSIEVE_H

/* Generated by cbindgen from the parsieve-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes mirroring the CLI exit-code contract, plus FFI-specific
// argument failures.
typedef enum parsieve_status {
  PARSIEVE_STATUS_OK = 0,
  // Invalid options or argument values.
  PARSIEVE_STATUS_USAGE = 1,
  // Malformed or inconsistent input data.
  PARSIEVE_STATUS_DATA = 2,
  // Missing, malformed or version-incompatible model artifact.
  PARSIEVE_STATUS_MODEL = 3,
  // A required pointer argument was NULL.
  PARSIEVE_STATUS_NULL_ARG = 4,
  // A string argument was not valid UTF-8.
  PARSIEVE_STATUS_INVALID_UTF8 = 5,
} parsieve_status;

// Opaque IBM Model 1 translation table.
typedef struct parsieve_ibm1_t parsieve_ibm1_t;

// Opaque trained language identifier.
typedef struct parsieve_langid_t parsieve_langid_t;

// Opaque word n-gram language model.
typedef struct parsieve_ngram_t parsieve_ngram_t;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread. The pointer stays
// valid until the next failing call on the same thread. Never NULL.
const char *parsieve_last_error_message(void);

// Library version as a static string; do not free.
const char *parsieve_version(void);

// Loads a language-identifier artifact.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` must be valid for
// writes.
enum parsieve_status parsieve_langid_load(const char *path, struct parsieve_langid_t **out);

// Releases a handle returned by [`parsieve_langid_load`]. NULL is a no-op.
//
// # Safety
// `model` must originate from this library and not be used afterwards.
void parsieve_langid_free(struct parsieve_langid_t *model);

// Classifies one sentence, writing the language code (or "und") into
// `out_code`, which must hold at least `cap` bytes including the NUL.
//
// # Safety
// Pointer arguments as documented; `out_code` must be writable for `cap`
// bytes.
enum parsieve_status parsieve_langid_classify(const struct parsieve_langid_t *model,
                                              const char *sentence,
                                              char *out_code,
                                              uintptr_t cap);

// Hard pair gate: writes 1.0 iff the source classifies as `src_lang` and
// the target as `trg_lang`, else 0.0.
//
// # Safety
// Pointer arguments as documented.
enum parsieve_status parsieve_langid_gate(const struct parsieve_langid_t *model,
                                          const char *src,
                                          const char *trg,
                                          const char *src_lang,
                                          const char *trg_lang,
                                          double *out_score);

// Loads an n-gram model artifact.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` must be valid for
// writes.
enum parsieve_status parsieve_ngram_load(const char *path, struct parsieve_ngram_t **out);

// # Safety
// `model` must originate from this library and not be used afterwards.
void parsieve_ngram_free(struct parsieve_ngram_t *model);

// Word-normalized cross-entropy (nats/token) of a whitespace-tokenized
// sentence. Empty sentences are a data error.
//
// # Safety
// Pointer arguments as documented.
enum parsieve_status parsieve_ngram_cross_entropy(const struct parsieve_ngram_t *model,
                                                  const char *sentence,
                                                  double *out_entropy);

// exp(cross-entropy) of a sentence.
//
// # Safety
// Pointer arguments as documented.
enum parsieve_status parsieve_ngram_perplexity(const struct parsieve_ngram_t *model,
                                               const char *sentence,
                                               double *out_perplexity);

// Loads a lexical-model artifact.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` must be valid for
// writes.
enum parsieve_status parsieve_ibm1_load(const char *path, struct parsieve_ibm1_t **out);

// # Safety
// `model` must originate from this library and not be used afterwards.
void parsieve_ibm1_free(struct parsieve_ibm1_t *model);

// Word-normalized conditional cross-entropy H(trg|src) in nats/token.
// Empty sentences are a data error.
//
// # Safety
// Pointer arguments as documented.
enum parsieve_status parsieve_ibm1_cond_cross_entropy(const struct parsieve_ibm1_t *model,
                                                      const char *src,
                                                      const char *trg,
                                                      double *out_entropy);

// Adequacy score in (0, 1] from two inverse conditional cross-entropies.
// Pass nonzero flags for the standard configuration; zeroing one drops
// the corresponding term.
//
// # Safety
// `out_score` must be valid for writes.
enum parsieve_status parsieve_adq(double h_fwd,
                                  double h_bwd,
                                  bool use_abs_difference,
                                  bool use_ce_weighting,
                                  double *out_score);

// Domain score in [0, 1]: perplexity ratio clipped to 1 and zeroed below
// `cutoff` (which must lie in [0, 1]).
//
// # Safety
// `out_score` must be valid for writes.
enum parsieve_status parsieve_dom(double h_in, double h_out, double cutoff, double *out_score);

// Product of `len` partial scores, each clamped to [0, 1] first.
//
// # Safety
// `values` must point to `len` readable doubles; `out_score` must be
// valid for writes.
enum parsieve_status parsieve_combine(const double *values, uintptr_t len, double *out_score);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARSIEVE_H */
