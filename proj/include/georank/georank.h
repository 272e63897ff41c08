#ifndef GEORANK_H
#define GEORANK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GEORANK_API __declspec(dllexport)
#else
#define GEORANK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum georank_status {
  GEORANK_OK = 0,
  GEORANK_E_DIMENSION = 1,
  GEORANK_E_RANK = 2,
  GEORANK_E_SYMMETRY = 3,
  GEORANK_E_PRECONDITION = 4,
  GEORANK_E_SINGULAR = 5,
  GEORANK_E_CONDITIONING = 6,
  GEORANK_E_VARIANT = 7,
  GEORANK_E_EVALUATION = 8,
  GEORANK_E_ENUMERATION = 9,
  GEORANK_E_PARSE = 10,
  GEORANK_E_IO = 11,
  GEORANK_E_AMBIGUITY = 12,
  GEORANK_E_ARGUMENT = 100,
  GEORANK_E_INTERNAL = 101
} georank_status;

typedef struct georank_objective georank_objective;
typedef struct georank_point georank_point;

/* Message for the last failing call on this thread; empty after a successful call. */
GEORANK_API const char* georank_last_error(void);
GEORANK_API const char* georank_status_name(georank_status s);
GEORANK_API const char* georank_version(void);

/* Matrices are column-major. */
GEORANK_API georank_status georank_objective_approx(const double* M, int64_t p1, int64_t p2, int symmetric,
                                                    georank_objective** out);
GEORANK_API georank_status georank_objective_value(const georank_objective* obj, const double* X, double* out);
GEORANK_API void georank_objective_free(georank_objective* obj);

/* psd != 0 selects the symmetric PSD kind (p1 == p2). X must have rank exactly r. */
GEORANK_API georank_status georank_point_embed(const double* X, int64_t p1, int64_t p2, int64_t r, int psd,
                                               georank_point** out);
GEORANK_API void georank_point_free(georank_point* pt);

GEORANK_API georank_status georank_manifold_dim(const char* geometry, int64_t p1, int64_t p2, int64_t r,
                                                int64_t* out);

/* Riemannian gradient norm of obj at pt under (geometry, metric); quotient geometries use the
   canonical lift. */
GEORANK_API georank_status georank_grad_norm(const georank_point* pt, const georank_objective* obj,
                                             const char* geometry, const char* metric, double* out);

/* Descending Hessian eigenvalues. Writes min(capacity, dim) values and sets *count to dim. */
GEORANK_API georank_status georank_hessian_spectrum(const georank_point* pt, const georank_objective* obj,
                                                    const char* geometry, const char* metric, double* values,
                                                    int64_t capacity, int64_t* count);

GEORANK_API georank_status georank_spectrum_bounds(const georank_point* pt, const char* geometry,
                                                   const char* metric, double* alpha, double* beta);

GEORANK_API georank_status georank_classify(const georank_point* pt, const georank_objective* obj,
                                            const char* geometry, const char* metric, int* is_fosp,
                                            int* is_sosp, int* is_strict_saddle);

/* Runs one experiment command from JSON config text. Relative file paths in the config resolve
   against base_dir (NULL for the working directory). On GEORANK_OK *report receives a heap
   string to release with georank_string_free and *all_pass whether every check passed. */
GEORANK_API georank_status georank_run(const char* command, const char* config_json, const char* base_dir,
                                       uint64_t seed, int has_seed, int timestamps, char** report,
                                       int* all_pass);
GEORANK_API void georank_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
