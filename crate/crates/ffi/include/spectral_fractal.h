#ifndef SPECTRAL_FRACTAL_H
#define SPECTRAL_FRACTAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. Values 2 to 5 match the exit codes of the command-line tool.
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_NULL_POINTER = 1,
  SF_STATUS_INVALID_INPUT = 2,
  SF_STATUS_REFUSED = 3,
  SF_STATUS_INCONCLUSIVE = 4,
  SF_STATUS_CAP_EXCEEDED = 5,
  SF_STATUS_PANIC = 6,
} SfStatus;

// Outcome of the periodic zero-set analysis.
typedef enum SfZeroSet {
  SF_ZERO_SET_EMPTY = 0,
  SF_ZERO_SET_NON_EMPTY = 1,
  SF_ZERO_SET_UNDECIDED = 2,
} SfZeroSet;

// An affine pair `(R, B)`, optionally with a dual digit set `L`.
typedef struct SfProblem SfProblem;

// A finished report.
typedef struct SfReport SfReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message into `buf` (NUL-terminated, truncated to `len`).
// Returns the full message length without the terminator.
size_t sf_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *sf_version(void);

// Builds a problem from row-major arrays: `r` is `d x d`, `b` is `n x d`,
// `l` is `n_l x d` or null.
enum SfStatus sf_problem_new(size_t d,
                             const int64_t *r,
                             const int64_t *b,
                             size_t n,
                             const int64_t *l,
                             size_t n_l,
                             struct SfProblem **out);

// Parses a JSON problem file.
enum SfStatus sf_problem_from_json(const char *json, struct SfProblem **out);

void sf_problem_free(struct SfProblem *p);

// Unitarity defect of the Hadamard matrix; `valid` is set when it is within tolerance.
enum SfStatus sf_validate(const struct SfProblem *p, bool *valid, double *defect);

// `mu_hat(xi)` for `xi` of length `d`.
enum SfStatus sf_mu_hat(const struct SfProblem *p,
                        const double *xi,
                        size_t d,
                        double *re,
                        double *im);

// Decides the periodic zero set with the problem's configuration.
enum SfStatus sf_zero_set(const struct SfProblem *p, enum SfZeroSet *out);

// Runs a job given as JSON, e.g. `{"command": "spectrum"}` or
// `{"command": "frames", "levels": [2], "strategy": "greedy"}`.
enum SfStatus sf_run(const struct SfProblem *p, const char *job_json, struct SfReport **out);

// The report as JSON, owned by the handle.
const char *sf_report_json(const struct SfReport *r);

// Exit code the command-line tool would return for this report.
int32_t sf_report_exit_code(const struct SfReport *r);

void sf_report_free(struct SfReport *r);

// Replays a JSON report; `passed` is set when every check passes.
enum SfStatus sf_verify(const char *report_json, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRAL_FRACTAL_H */
