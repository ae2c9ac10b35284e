#ifndef ABSQM_ABSQM_H
#define ABSQM_ABSQM_H

#include <stddef.h>
#include <stdint.h>

#if defined(ABSQM_BUILDING)
#define ABSQM_API __attribute__((visibility("default")))
#else
#define ABSQM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum absqm_status {
  ABSQM_OK = 0,
  ABSQM_ERR_CONFIG = 2,
  ABSQM_ERR_ASSERTION = 3,
  ABSQM_ERR_NUMERICAL = 4,
  ABSQM_ERR_CONTRACT = 5,
  ABSQM_ERR_DOMAIN = 6,
  ABSQM_ERR_RANGE = 7,
  ABSQM_ERR_IO = 8,
  ABSQM_ERR_INTERNAL = 9
} absqm_status;

typedef enum absqm_bessel_kind { ABSQM_BESSEL_J = 0, ABSQM_BESSEL_Y = 1, ABSQM_BESSEL_I = 2, ABSQM_BESSEL_K = 3 } absqm_bessel_kind;

typedef enum absqm_log_level { ABSQM_LOG_QUIET = 0, ABSQM_LOG_INFO = 1, ABSQM_LOG_DEBUG = 2 } absqm_log_level;

ABSQM_API const char* absqm_version(void);

/* Message of the last failing call on this thread; "" after a success. */
ABSQM_API const char* absqm_last_error(void);

ABSQM_API const char* absqm_status_name(absqm_status status);

ABSQM_API absqm_status absqm_bessel(absqm_bessel_kind kind, double order, double x, double* out);
ABSQM_API absqm_status absqm_bessel_derivative(absqm_bessel_kind kind, double order, double x, double* out);

/* ---- Aharonov-Bohm radial problem ---- */

typedef struct absqm_ab_config {
  double b;
  double B0;
  double C1;
  double uz;
  double phi0;
  double r_out;
  int n_r;
} absqm_ab_config;

ABSQM_API void absqm_ab_config_default(absqm_ab_config* cfg);

typedef struct absqm_ab_solution absqm_ab_solution;

ABSQM_API absqm_status absqm_ab_solve(const absqm_ab_config* cfg, int branch, absqm_ab_solution** out);
ABSQM_API void absqm_ab_solution_free(absqm_ab_solution* s);

ABSQM_API absqm_status absqm_ab_solution_energy(const absqm_ab_solution* s, double* E);
ABSQM_API absqm_status absqm_ab_solution_interior_mass(const absqm_ab_solution* s, double* mass);
/* Number of radial samples. */
ABSQM_API absqm_status absqm_ab_solution_size(const absqm_ab_solution* s, size_t* n);
/* Copies n samples of r, R and u_theta; any pointer may be NULL. */
ABSQM_API absqm_status absqm_ab_solution_profile(const absqm_ab_solution* s, double* r, double* R, double* u_theta,
                                                 size_t n);

/* ---- batch runs ---- */

ABSQM_API size_t absqm_command_count(void);
ABSQM_API const char* absqm_command_name(size_t i);

typedef struct absqm_run_request {
  const char* command;
  /* NULL or "" for built-in defaults. */
  const char* config_path;
  const char* out_dir;
  int has_seed;
  uint64_t seed;
  absqm_log_level log_level;
} absqm_run_request;

typedef struct absqm_run_result absqm_run_result;

/* Returns ABSQM_OK whenever the run completed, even if assertions failed;
 * the run's own outcome is absqm_run_result_exit_code. */
ABSQM_API absqm_status absqm_run(const absqm_run_request* request, absqm_run_result** out);
ABSQM_API void absqm_run_result_free(absqm_run_result* r);

/* 0 pass, 2 config or io error, 3 assertion failure, 4 numerical failure. */
ABSQM_API int absqm_run_result_exit_code(const absqm_run_result* r);
ABSQM_API const char* absqm_run_result_message(const absqm_run_result* r);
ABSQM_API size_t absqm_run_result_assertion_count(const absqm_run_result* r);
ABSQM_API absqm_status absqm_run_result_assertion(const absqm_run_result* r, size_t i, const char** name,
                                                  double* value, double* limit, double* margin, int* pass);

#ifdef __cplusplus
}
#endif

#endif
