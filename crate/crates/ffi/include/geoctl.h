#ifndef GEOCTL_H
#define GEOCTL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every entry point.
typedef enum GeoStatus {
  GEO_STATUS_OK = 0,
  GEO_STATUS_NULL_POINTER = 1,
  GEO_STATUS_INVALID_MANIFOLD = 2,
  GEO_STATUS_SHAPE_MISMATCH = 3,
  GEO_STATUS_CONSTRAINT_VIOLATION = 4,
  GEO_STATUS_NOT_TANGENT = 5,
  GEO_STATUS_INJECTIVITY_RADIUS_EXCEEDED = 6,
  GEO_STATUS_AT_CUT_LOCUS = 7,
  GEO_STATUS_CONFIG_INVALID = 8,
  GEO_STATUS_NUMERICAL = 9,
  GEO_STATUS_IO = 10,
  GEO_STATUS_INVALID_UTF8 = 11,
  GEO_STATUS_PANIC = 12,
} GeoStatus;

// Opaque manifold handle.
typedef struct GeoManifold GeoManifold;

// Opaque scenario report handle.
typedef struct GeoReport GeoReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Euclidean space `R^n`.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum GeoStatus geo_manifold_euclidean(size_t n, struct GeoManifold **out);

// Sphere `S^n` of the given radius embedded in `R^{n+1}`.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum GeoStatus geo_manifold_sphere(size_t n, double radius, struct GeoManifold **out);

// The rotation group SO(3).
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum GeoStatus geo_manifold_so3(struct GeoManifold **out);

// Symmetric positive-definite `n × n` matrices, affine-invariant metric.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum GeoStatus geo_manifold_spd(size_t n, struct GeoManifold **out);

// # Safety
// `m` must be null or a handle returned by a `geo_manifold_*` constructor
// that has not been freed.
void geo_manifold_free(struct GeoManifold *m);

// Ambient array shape of points and tangent vectors, and the intrinsic
// dimension.
//
// # Safety
// `m` must be a live handle; output pointers must be writable.
enum GeoStatus geo_manifold_ambient_shape(const struct GeoManifold *m,
                                          size_t *rows,
                                          size_t *cols,
                                          size_t *dim);

// `out = exp_p(v)`.
//
// # Safety
// `m` must be a live handle; arrays must hold `rows × cols` doubles.
enum GeoStatus geo_exp(const struct GeoManifold *m, const double *p, const double *v, double *out);

// `out = log_p(q)`.
//
// # Safety
// `m` must be a live handle; arrays must hold `rows × cols` doubles.
enum GeoStatus geo_log(const struct GeoManifold *m, const double *p, const double *q, double *out);

// Geodesic distance `d(p, q)`.
//
// # Safety
// `m` must be a live handle; arrays must hold `rows × cols` doubles and
// `out` must be writable.
enum GeoStatus geo_dist(const struct GeoManifold *m, const double *p, const double *q, double *out);

// Metric inner product `⟨u, v⟩_p`.
//
// # Safety
// `m` must be a live handle; arrays must hold `rows × cols` doubles and
// `out` must be writable.
enum GeoStatus geo_inner(const struct GeoManifold *m,
                         const double *p,
                         const double *u,
                         const double *v,
                         double *out);

// Parallel transport of `v ∈ T_pM` to `q` along the minimizing geodesic.
//
// # Safety
// `m` must be a live handle; arrays must hold `rows × cols` doubles.
enum GeoStatus geo_transport(const struct GeoManifold *m,
                             const double *p,
                             const double *q,
                             const double *v,
                             double *out);

// Curvature `R(x, y) z` at `p`, with
// `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`.
//
// # Safety
// `m` must be a live handle; arrays must hold `rows × cols` doubles.
enum GeoStatus geo_curvature(const struct GeoManifold *m,
                             const double *p,
                             const double *x,
                             const double *y,
                             const double *z,
                             double *out);

// Run a scenario from its TOML text. Output files are written only when
// the configuration names an output directory.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum GeoStatus geo_scenario_run(const char *toml, struct GeoReport **out);

// 1 when every criterion of the run passed, 0 otherwise, -1 for null.
//
// # Safety
// `r` must be null or a live report handle.
int geo_report_passed(const struct GeoReport *r);

// The report as JSON, owned by the handle and valid until it is freed.
//
// # Safety
// `r` must be null or a live report handle.
const char *geo_report_json(const struct GeoReport *r);

// # Safety
// `r` must be null or a report handle that has not been freed.
void geo_report_free(struct GeoReport *r);

// Message for the most recent failure on this thread; empty after a
// success. Valid until the next call on the same thread.
const char *geo_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEOCTL_H */
