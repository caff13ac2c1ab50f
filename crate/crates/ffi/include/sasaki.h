#ifndef SASAKI_H
#define SASAKI_H

/* Generated by cbindgen from sasaki-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  // A required pointer argument was NULL.
  SG_STATUS_NULL_ARGUMENT = 1,
  // An argument failed validation (dimension, range, encoding).
  SG_STATUS_INVALID_ARGUMENT = 2,
  // A point left the chart or patch domain.
  SG_STATUS_DOMAIN_ERROR = 3,
  // A matrix inversion failed (degenerate metric or frame).
  SG_STATUS_SINGULAR = 4,
  // Unknown scenario or builtin name.
  SG_STATUS_NOT_FOUND = 5,
  // Any other runtime failure; see `sg_last_error_message`.
  SG_STATUS_RUNTIME_ERROR = 6,
} SgStatus;

// Opaque manifold handle.
typedef struct SgManifold SgManifold;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or NULL when
// no failure has been recorded. The pointer stays valid until the next
// failing call on the same thread.
const char *sg_last_error_message(void);

// Release a string returned by this library.
//
// # Safety
// `s` must have been returned by a `sasaki` call and not freed before.
void sg_string_free(char *s);

// Flat `R^n`.
//
// # Safety
// `out` must be a valid pointer.
enum SgStatus sg_manifold_euclidean(size_t dim, struct SgManifold **out);

// Constant-curvature conformal chart (curvature of either sign).
//
// # Safety
// `out` must be a valid pointer.
enum SgStatus sg_manifold_conformal(size_t dim, double curvature, struct SgManifold **out);

// Band of half-width `half_width` around the unit-sphere equator
// (coordinates θ, φ; requires `0 < half_width < π/2`).
//
// # Safety
// `out` must be a valid pointer.
enum SgStatus sg_manifold_sphere_band(double half_width, struct SgManifold **out);

// Destroy a manifold handle.
//
// # Safety
// `m` must be a handle from a `sg_manifold_*` constructor, not yet freed.
void sg_manifold_free(struct SgManifold *m);

// Chart dimension of the manifold (0 for a NULL handle).
//
// # Safety
// `m` must be a live manifold handle or NULL.
size_t sg_manifold_dim(const struct SgManifold *m);

// Metric matrix at `x`, written row-major into `out` (`dim*dim` entries).
//
// # Safety
// `x` must point to `dim` readable doubles and `out` to `dim*dim` writable
// doubles.
enum SgStatus sg_manifold_metric(const struct SgManifold *m, const double *x, double *out);

// Christoffel symbols at `x`, written into `out` with layout
// `out[(a*dim + b)*dim + c] = Γ^a_{bc}` (`dim^3` entries).
//
// # Safety
// `x` must point to `dim` readable doubles and `out` to `dim^3` writable
// doubles.
enum SgStatus sg_manifold_christoffel(const struct SgManifold *m, const double *x, double *out);

// Curvature operator `R(X, Y) Z` at `x`, written into `out` (`dim` entries).
//
// # Safety
// `x`, `xv`, `yv`, `zv` must each point to `dim` readable doubles and `out`
// to `dim` writable doubles.
enum SgStatus sg_manifold_curvature_op(const struct SgManifold *m,
                                       const double *x,
                                       const double *xv,
                                       const double *yv,
                                       const double *zv,
                                       double *out);

// Run a registered scenario; the JSON report is returned through
// `json_out`. `grid_points == 0` and non-positive tolerances select the
// defaults.
//
// # Safety
// `name` must be a NUL-terminated string and `json_out` a valid pointer.
enum SgStatus sg_scenario_run(const char *name,
                              uint32_t grid_points,
                              double tol_pass,
                              double tol_fail,
                              char **json_out);

// Integrate the bundle geodesic from `(x0, xdot0, xi0, xidot0)` to
// `sigma_end` with fixed RK4 steps and return the CSV trace
// (`sigma,x1..xn,xdot1..xdotn,xi1..xin,xidot1..xidotn,energy`).
// `truncated_out` receives 1 when the trace stopped at the chart boundary.
//
// # Safety
// The four state pointers must each point to `dim` readable doubles;
// `csv_out` must be valid; `truncated_out` may be NULL.
enum SgStatus sg_geodesic_trace_csv(const struct SgManifold *m,
                                    const double *x0,
                                    const double *xdot0,
                                    const double *xi0,
                                    const double *xidot0,
                                    double sigma_end,
                                    double step,
                                    char **csv_out,
                                    int32_t *truncated_out);

// Run the totally-geodesic residual sweep described by a JSON run
// configuration (the same schema the CLI accepts) and return the report.
//
// # Safety
// `config_json` must be a NUL-terminated string and `json_out` valid.
enum SgStatus sg_residual_from_config(const char *config_json, char **json_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SASAKI_H */
