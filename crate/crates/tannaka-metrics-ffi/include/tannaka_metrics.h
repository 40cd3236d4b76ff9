#ifndef TANNAKA_METRICS_H
#define TANNAKA_METRICS_H

/* Generated by cbindgen from the tannaka-metrics-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Representation family selector for stability calls.
typedef enum TmFamily {
  TM_FAMILY_IRREPS_ONLY = 0,
  TM_FAMILY_DIRECT_SUMS = 1,
} TmFamily;

// Metric selector for distance and stability calls.
typedef enum TmMetric {
  TM_METRIC_OPERATOR = 0,
  TM_METRIC_ARCLENGTH = 1,
} TmMetric;

// Status codes returned by fallible functions.
typedef enum TmStatus {
  // Success.
  TM_STATUS_OK = 0,
  // A pointer argument was null or an index was out of range.
  TM_STATUS_INVALID_ARGUMENT = 1,
  // Input data failed validation (not a group, not a length, ...).
  TM_STATUS_INVALID_INPUT = 2,
  // The computation itself failed; see `tm_last_error`.
  TM_STATUS_COMPUTATION = 3,
} TmStatus;

// Opaque finite group handle.
typedef struct TmGroup TmGroup;

// Opaque length-function handle, tied to the group it was built from.
typedef struct TmLength TmLength;

// Opaque stability-report handle.
typedef struct TmReport TmReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent error on this thread. The pointer is
// valid until the next failing call on the same thread. Never null.
const char *tm_last_error(void);

// Library version as a static UTF-8 string (never freed).
const char *tm_version(void);

// Cyclic group of order `n`. Returns null on failure.
struct TmGroup *tm_group_cyclic(size_t n);

// Dihedral group with `n` rotations (order `2n`). Returns null on failure.
struct TmGroup *tm_group_dihedral(size_t n);

// Direct product of two groups. Returns null on failure.
//
// # Safety
// `a` and `b` must be valid group handles.
struct TmGroup *tm_group_product(const struct TmGroup *a, const struct TmGroup *b);

// Number of elements, or 0 for a null handle.
//
// # Safety
// `group` must be a valid group handle or null.
size_t tm_group_order(const struct TmGroup *group);

// Release a group handle (null is ignored).
//
// # Safety
// `group` must have come from a `tm_group_*` constructor and not have been
// freed already.
void tm_group_free(struct TmGroup *group);

// Word length over `gen_count` generator element indices with optional
// positive weights (pass null for unit weights).
//
// # Safety
// `group` must be valid; `gens` must point to `gen_count` readable entries;
// `weights` must be null or point to `gen_count` readable doubles.
enum TmStatus tm_length_word(const struct TmGroup *group,
                             const size_t *gens,
                             const double *weights,
                             size_t gen_count,
                             struct TmLength **out);

// Length function from explicit per-element values (`INFINITY` allowed).
//
// # Safety
// `group` must be valid; `values` must point to one readable double per
// group element.
enum TmStatus tm_length_values(const struct TmGroup *group,
                               const double *values,
                               size_t value_count,
                               struct TmLength **out);

// Value of the length at one element (`INFINITY` for elements outside the
// support).
//
// # Safety
// `length` must be valid; `out` must be writable.
enum TmStatus tm_length_value(const struct TmLength *length, size_t element, double *out);

// Release a length handle (null is ignored).
//
// # Safety
// `length` must have come from a `tm_length_*` constructor and not have
// been freed already.
void tm_length_free(struct TmLength *length);

// Run the double-dual stability check and produce a report handle.
//
// # Safety
// `group` and `length` must be valid handles built from the same group;
// `out` must be writable.
enum TmStatus tm_stability(const struct TmGroup *group,
                           const struct TmLength *length,
                           enum TmMetric metric,
                           enum TmFamily family,
                           struct TmReport **out);

// 1 when the report's verdict is stable, 0 otherwise (or for null).
//
// # Safety
// `report` must be a valid report handle or null.
int32_t tm_report_stable(const struct TmReport *report);

// Largest value of `length - double dual` over the group.
//
// # Safety
// `report` must be a valid report handle or null.
double tm_report_max_defect(const struct TmReport *report);

// Double-dual value at one element.
//
// # Safety
// `report` must be valid; `out` must be writable.
enum TmStatus tm_report_double_dual(const struct TmReport *report, size_t element, double *out);

// Full report as a JSON string; the pointer stays valid until the report
// handle is freed.
//
// # Safety
// `report` must be a valid report handle or null.
const char *tm_report_to_json(const struct TmReport *report);

// Release a report handle (null is ignored).
//
// # Safety
// `report` must have come from `tm_stability` and not have been freed
// already.
void tm_report_free(struct TmReport *report);

// Distance between two `dim x dim` unitaries given as interleaved
// column-major complex arrays (see the module docs for the layout).
//
// # Safety
// `u` and `v` must each point to `2 * dim * dim` readable doubles; `out`
// must be writable.
enum TmStatus tm_unitary_distance(enum TmMetric metric,
                                  const double *u,
                                  const double *v,
                                  size_t dim,
                                  double *out);

// Closed-form dual length `sqrt(<p, A^{-1} p>)` of a character `p` against
// the quadratic form `A` (row-major `n x n`, symmetric positive definite).
//
// # Safety
// `form` must point to `n * n` readable doubles; `p` to `n`; `out` must be
// writable.
enum TmStatus tm_lattice_dual_length(const double *form, const double *p, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TANNAKA_METRICS_H */
