#ifndef LOCC_EXPONENTS_H
#define LOCC_EXPONENTS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LeClass {
  LE_CLASS_ONE_WAY = 0,
  LE_CLASS_TWO_WAY = 1,
  LE_CLASS_SEPARABLE = 2,
  LE_CLASS_GLOBAL = 3,
} LeClass;

typedef enum LeConstruction {
  LE_CONSTRUCTION_HOEFFDING = 0,
  LE_CONSTRUCTION_ZERO_ERROR = 1,
  LE_CONSTRUCTION_STEIN = 2,
} LeConstruction;

typedef enum LeStatus {
  LE_STATUS_OK = 0,
  LE_STATUS_NULL_POINTER = 1,
  LE_STATUS_INVALID_ARGUMENT = 2,
  LE_STATUS_INVALID_SPECTRUM = 3,
  LE_STATUS_UNIFORM = 4,
  LE_STATUS_BUDGET = 5,
  LE_STATUS_EMPTY_SET = 6,
  LE_STATUS_INFEASIBLE = 7,
  LE_STATUS_SHELL_TOO_SMALL = 8,
  LE_STATUS_OUT_OF_RANGE = 9,
  LE_STATUS_JSON = 10,
  LE_STATUS_PANIC = 11,
  LE_STATUS_OTHER = 12,
} LeStatus;

// Opaque spectrum handle.
typedef struct LeSpectrum LeSpectrum;

// Separable sandwich at one threshold. `r_tilde` is NaN when absent.
typedef struct LeSandwich {
  double r_prime;
  double log_beta_value;
  double log_beta_bipartite;
  double alpha_lower;
  double alpha_upper;
  double r_min;
  double r_tilde;
  bool exact;
} LeSandwich;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL
// terminated, truncated to `len`) and returns its full length, or 0 when
// there is none.
//
// # Safety
// `buf` must be valid for `len` bytes or null.
size_t le_last_error(char *buf, size_t len);

// Creates a spectrum from `len = min(dim_a, dim_b)` coefficients.
//
// # Safety
// `lambdas` must point to `len` doubles; `out` must be writable.
enum LeStatus le_spectrum_new(const double *lambdas,
                              size_t len,
                              size_t dim_a,
                              size_t dim_b,
                              struct LeSpectrum **out);

// Releases a handle from [`le_spectrum_new`]. Null is ignored.
//
// # Safety
// `h` must come from [`le_spectrum_new`] and not be used afterwards.
void le_spectrum_free(struct LeSpectrum *h);

// Number of coefficients, or 0 for a null handle.
//
// # Safety
// `h` must be a live handle or null.
size_t le_spectrum_len(const struct LeSpectrum *h);

// Copies the (sorted) coefficients into `out[0..len]`.
//
// # Safety
// `out` must be writable for [`le_spectrum_len`] doubles.
enum LeStatus le_spectrum_lambdas(const struct LeSpectrum *h, double *out);

// Rényi entropy `H_α`.
//
// # Safety
// `h` must be a live handle; `out` writable.
enum LeStatus le_renyi_entropy(const struct LeSpectrum *h, double alpha, double *out);

// Hoeffding exponent of a measurement class at rate `r`.
//
// # Safety
// `h` must be a live handle; `out` writable.
enum LeStatus le_hoeffding(const struct LeSpectrum *h, enum LeClass class_, double r, double *out);

// Rates where the one-way and two-way curves reach their plateaus.
//
// # Safety
// `h` must be a live handle; both outputs writable.
enum LeStatus le_critical_rates(const struct LeSpectrum *h, double *r_one_way, double *r_two_way);

// Exact optimal one-way `log β` at type-1 level `alpha` for `n` copies.
//
// # Safety
// `h` must be a live handle; `out` writable.
enum LeStatus le_one_way_log_beta(const struct LeSpectrum *h, size_t n, double alpha, double *out);

// Separable sandwich at threshold `r_prime` for `n` copies.
//
// # Safety
// `h` must be a live handle; `out` writable.
enum LeStatus le_sep_sandwich(const struct LeSpectrum *h,
                              size_t n,
                              double r_prime,
                              struct LeSandwich *out);

// Builds a measure collection and returns it as a JSON string to be
// released with [`le_string_free`]. `param` is the rate `r` for
// Hoeffding, the target type-1 error for Stein, and ignored otherwise.
//
// # Safety
// `h` must be a live handle; `out` writable.
enum LeStatus le_build_collection(const struct LeSpectrum *h,
                                  enum LeConstruction kind,
                                  size_t n,
                                  double param,
                                  char **out);

// Exact type-1 error and `log β` of a JSON collection.
//
// # Safety
// `h` must be a live handle; `json` a NUL-terminated UTF-8 string;
// outputs writable.
enum LeStatus le_evaluate_collection(const struct LeSpectrum *h,
                                     const char *json,
                                     double *alpha,
                                     double *log_beta);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void le_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCC_EXPONENTS_H */
