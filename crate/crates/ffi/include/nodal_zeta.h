#ifndef NODAL_ZETA_H
#define NODAL_ZETA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Values 1 to 5 match the exit codes of the command-line tool.
typedef enum NzStatus {
  NZ_STATUS_OK = 0,
  NZ_STATUS_PARSE = 1,
  NZ_STATUS_NOT_ODP = 2,
  NZ_STATUS_EQUISINGULARITY = 3,
  NZ_STATUS_PRECISION = 4,
  NZ_STATUS_INTERNAL = 5,
  NZ_STATUS_NULL_POINTER = 6,
  NZ_STATUS_INVALID_UTF8 = 7,
  NZ_STATUS_BUFFER_TOO_SMALL = 8,
} NzStatus;

// A parsed problem file.
typedef struct NzProblem NzProblem;

// A computed zeta function.
typedef struct NzZeta NzZeta;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a problem given as TOML text.
enum NzStatus nz_problem_parse(const char *text, struct NzProblem **out);

void nz_problem_free(struct NzProblem *problem);

// Computes the zeta function over F_p; `prime` 0 takes the prime from the problem file.
// `terms` 0 uses the certified truncation; `early_stop` nonzero grows the series until
// Q(T) repeats.
enum NzStatus nz_zeta_compute(const struct NzProblem *problem,
                              uint64_t prime,
                              size_t terms,
                              int32_t early_stop,
                              struct NzZeta **out);

void nz_zeta_free(struct NzZeta *zeta);

// Degree of Q(T).
size_t nz_zeta_degree(const struct NzZeta *zeta);

// 1 when the truncation met the formal bound, 0 for an early-stopped run.
int32_t nz_zeta_certified(const struct NzZeta *zeta);

// Coefficient of T^i in Q(T) as a decimal string.
enum NzStatus nz_zeta_coefficient(const struct NzZeta *zeta,
                                  size_t i,
                                  char *buf,
                                  size_t len,
                                  size_t *needed);

// The zeta function as text, e.g. `1/((1-T)(1-5T)^3(1-25T))`.
enum NzStatus nz_zeta_to_string(const struct NzZeta *zeta, char *buf, size_t len, size_t *needed);

// Q(T) in factored form.
enum NzStatus nz_zeta_factored(const struct NzZeta *zeta, char *buf, size_t len, size_t *needed);

// Number of points over F_{p^r}; `budget` 0 uses the default cap on p^{rn}.
enum NzStatus nz_count_points(const struct NzProblem *problem,
                              uint64_t prime,
                              uint32_t r,
                              uint64_t budget,
                              uint64_t *out);

// Message of the last failure on this thread.
enum NzStatus nz_last_error(char *buf, size_t len, size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NODAL_ZETA_H */
