#ifndef LINSYS_H
#define LINSYS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LinsysFreeness {
  LINSYS_FREENESS_STRONG = 0,
  LINSYS_FREENESS_WEAK = 1,
} LinsysFreeness;

typedef enum LinsysStatus {
  LINSYS_STATUS_OK = 0,
  LINSYS_STATUS_NULL_POINTER = 1,
  LINSYS_STATUS_INVALID_UTF8 = 2,
  LINSYS_STATUS_SYNTAX = 3,
  LINSYS_STATUS_INVALID_ARGUMENT = 4,
  LINSYS_STATUS_NOT_PRIME = 5,
  LINSYS_STATUS_UNBALANCED = 6,
  LINSYS_STATUS_REDUCIBLE = 7,
  LINSYS_STATUS_NOT_DOMINANT = 8,
  LINSYS_STATUS_TOO_LARGE = 9,
  LINSYS_STATUS_GUARD_EXCEEDED = 10,
  LINSYS_STATUS_PRECONDITION = 11,
  LINSYS_STATUS_NOT_FOUND = 12,
  LINSYS_STATUS_PANIC = 13,
} LinsysStatus;

// Opaque system handle.
typedef struct LinsysSystem LinsysSystem;

typedef struct LinsysParameters {
  size_t r1;
  size_t r2;
  size_t l;
  size_t m_max;
  bool irreducible;
} LinsysParameters;

typedef struct LinsysBound {
  double value;
  double tolerance;
} LinsysBound;

typedef struct LinsysSearchResult {
  size_t value;
  uint64_t nodes_explored;
  bool exhaustive;
} LinsysSearchResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *linsys_last_error(void);

// Parses `.lineq` text into a new handle.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum LinsysStatus linsys_system_parse(const char *text, struct LinsysSystem **out);

// Looks up a built-in system such as `SW` or `STAR3`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum LinsysStatus linsys_system_builtin(const char *name, struct LinsysSystem **out);

// # Safety
// `system` must come from this library and not be used afterwards.
void linsys_system_free(struct LinsysSystem *system);

// Number of variables, or 0 for a null handle.
//
// # Safety
// `system` must be null or a live handle.
size_t linsys_system_variable_count(const struct LinsysSystem *system);

// Number of equations, or 0 for a null handle.
//
// # Safety
// `system` must be null or a live handle.
size_t linsys_system_equation_count(const struct LinsysSystem *system);

// Canonical text of the system; free with `linsys_string_free`.
//
// # Safety
// `system` must be a live handle and `out` a valid pointer.
enum LinsysStatus linsys_system_render(const struct LinsysSystem *system, char **out);

// # Safety
// `s` must be null or a string returned by this library.
void linsys_string_free(char *s);

// # Safety
// `system` must be a live handle and `out` a valid pointer.
enum LinsysStatus linsys_system_parameters(const struct LinsysSystem *system,
                                           struct LinsysParameters *out);

// `Λ_{m,α,h}` with its tolerance.
//
// # Safety
// `out` must be a valid pointer.
enum LinsysStatus linsys_lambda(uint64_t m, double alpha, uint64_t h, struct LinsysBound *out);

// `C̃_{(r1,r2,L,m)}(d)` with its tolerance.
//
// # Safety
// `out` must be a valid pointer.
enum LinsysStatus linsys_c_tilde(uint64_t r1,
                                 uint64_t r2,
                                 uint64_t l,
                                 uint64_t m,
                                 uint64_t d,
                                 struct LinsysBound *out);

// Writes `r1/2 + r2/e - L` to `margin` and whether it is positive to `holds`.
//
// # Safety
// `holds` and `margin` must be valid pointers.
enum LinsysStatus linsys_star_inequality(size_t r1,
                                         size_t r2,
                                         size_t l,
                                         bool *holds,
                                         double *margin);

// Upper bound on strongly free subsets of `F_p^n`; `value` is the bound
// and `tolerance` that of its base.
//
// # Safety
// `system` must be a live handle and `out` a valid pointer.
enum LinsysStatus linsys_upper_bound_strong(const struct LinsysSystem *system,
                                            uint64_t p,
                                            uint32_t n,
                                            struct LinsysBound *out);

// Largest dominant coefficient of the greedy reduction sequence and whether
// it ends in the one-variable empty system. Returns `NotDominant` when no
// equation is dominant.
//
// # Safety
// `system` must be a live handle; `b_tilde` and `reaches_empty_one` valid pointers.
enum LinsysStatus linsys_reduction_b_tilde(const struct LinsysSystem *system,
                                           uint64_t *b_tilde,
                                           bool *reaches_empty_one);

// Exact largest free subset of `F_p^n`; `workers = 0` uses the default pool.
//
// # Safety
// `system` must be a live handle and `out` a valid pointer.
enum LinsysStatus linsys_max_free(const struct LinsysSystem *system,
                                  uint64_t p,
                                  size_t n,
                                  enum LinsysFreeness kind,
                                  size_t workers,
                                  struct LinsysSearchResult *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LINSYS_H */
