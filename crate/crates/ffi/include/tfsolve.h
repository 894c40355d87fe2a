#ifndef TFSOLVE_H
#define TFSOLVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result codes. The nonzero error classes match the CLI exit codes.
typedef enum TfsStatus {
  TFS_STATUS_OK = 0,
  TFS_STATUS_CONFIG = 2,
  TFS_STATUS_NUMERICAL = 3,
  TFS_STATUS_HYPOTHESIS = 4,
  TFS_STATUS_IO = 5,
  TFS_STATUS_NULL_POINTER = 6,
  TFS_STATUS_BUFFER_TOO_SMALL = 7,
  TFS_STATUS_PANIC = 8,
} TfsStatus;

// Outcome of an inversion.
typedef struct TfsInverse TfsInverse;

// A parsed problem description.
typedef struct TfsProblem TfsProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next `tfs_` call on the same thread.
const char *tfs_last_error(void);

// Library version as a static NUL-terminated string.
const char *tfs_version(void);

// `E_{α,β}(z)` for `α ∈ (0, 1]`, `z ≤ 0`.
//
// # Safety
// `out` must be valid for one write.
enum TfsStatus tfs_ml(double alpha, double beta, double z, double *out);

// Loads a TOML problem file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid for one write.
enum TfsStatus tfs_problem_from_file(const char *path, struct TfsProblem **out);

// Parses TOML text. Table paths resolve against `base_dir` (may be NULL for
// the working directory).
//
// # Safety
// `text` and a non-null `base_dir` must be NUL-terminated strings; `out`
// must be valid for one write.
enum TfsStatus tfs_problem_from_str(const char *text,
                                    const char *base_dir,
                                    struct TfsProblem **out);

// # Safety
// `problem` must come from a `tfs_problem_from_*` call and not be used
// afterwards. NULL is ignored.
void tfs_problem_free(struct TfsProblem *problem);

// Overrides the grid. `n = 0` selects the mode count automatically.
//
// # Safety
// `problem` must be a live handle.
enum TfsStatus tfs_problem_set_grid(struct TfsProblem *problem, size_t m, size_t k, size_t n);

// Hypothesis violations become warnings when `strict` is false.
//
// # Safety
// `problem` must be a live handle.
enum TfsStatus tfs_problem_set_strict(struct TfsProblem *problem, bool strict);

// Time nodes `t_0..t_K` of the problem grid.
//
// # Safety
// `problem` must be a live handle; `out` must hold `capacity` values or be
// NULL; `len` must be valid for one write.
enum TfsStatus tfs_problem_times(const struct TfsProblem *problem,
                                 double *out,
                                 size_t capacity,
                                 size_t *len);

// Eigenvalues of the spatial operator used by the solvers.
//
// # Safety
// As for [`tfs_problem_times`].
enum TfsStatus tfs_eigenvalues(const struct TfsProblem *problem,
                               double *out,
                               size_t capacity,
                               size_t *len);

// Observation `g(t_k)` of the direct solution for the problem's `f`.
//
// # Safety
// As for [`tfs_problem_times`].
enum TfsStatus tfs_direct_observe(const struct TfsProblem *problem,
                                  double *out,
                                  size_t capacity,
                                  size_t *len);

// Recovers `f` from the problem's own `g`.
//
// # Safety
// `problem` must be a live handle; `out` must be valid for one write.
enum TfsStatus tfs_invert(const struct TfsProblem *problem, struct TfsInverse **out);

// Recovers `f` from caller samples `g[0..len]` on the problem's time grid.
// Any `f` or `g` in the problem is ignored.
//
// # Safety
// `g` must point to `len` readable values; `problem` must be a live handle;
// `out` must be valid for one write.
enum TfsStatus tfs_invert_samples(const struct TfsProblem *problem,
                                  const double *g,
                                  size_t len,
                                  struct TfsInverse **out);

// Recovered `f(t_k)`.
//
// # Safety
// `inverse` must be a live handle; `out` must hold `capacity` values or be
// NULL; `len` must be valid for one write.
enum TfsStatus tfs_inverse_values(const struct TfsInverse *inverse,
                                  double *out,
                                  size_t capacity,
                                  size_t *len);

// Time nodes matching [`tfs_inverse_values`].
//
// # Safety
// As for [`tfs_inverse_values`].
enum TfsStatus tfs_inverse_times(const struct TfsInverse *inverse,
                                 double *out,
                                 size_t capacity,
                                 size_t *len);

// Named scalar diagnostic such as `second_kind_residual`,
// `first_kind_residual`, `compat_series_defect` or `picard_iterations`.
//
// # Safety
// `inverse` must be a live handle; `name` a NUL-terminated string; `out`
// valid for one write.
enum TfsStatus tfs_inverse_diagnostic(const struct TfsInverse *inverse,
                                      const char *name,
                                      double *out);

// # Safety
// `inverse` must come from `tfs_invert*` and not be used afterwards. NULL is
// ignored.
void tfs_inverse_free(struct TfsInverse *inverse);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TFSOLVE_H */
