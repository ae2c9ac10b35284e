#include "absqm/absqm.h"

#include <exception>
#include <string>

#include "absqm/aharonov_bohm.hpp"
#include "absqm/runner.hpp"

#ifndef ABSQM_VERSION
#define ABSQM_VERSION "0.0.0"
#endif

struct absqm_ab_solution {
  absqm::RadialABSolution value;
};

struct absqm_run_result {
  absqm::RunOutcome value;
};

namespace {

thread_local std::string last_error;

absqm_status status_of(absqm::ErrorKind kind) noexcept {
  using absqm::ErrorKind;
  switch (kind) {
    case ErrorKind::config:
      return ABSQM_ERR_CONFIG;
    case ErrorKind::assertion:
      return ABSQM_ERR_ASSERTION;
    case ErrorKind::stability:
    case ErrorKind::numerical:
    case ErrorKind::unwrap_failure:
    case ErrorKind::branch_not_found:
    case ErrorKind::path_dependence:
      return ABSQM_ERR_NUMERICAL;
    case ErrorKind::domain:
    case ErrorKind::chart_domain:
    case ErrorKind::not_evanescent:
      return ABSQM_ERR_DOMAIN;
    case ErrorKind::range:
      return ABSQM_ERR_RANGE;
    case ErrorKind::io:
      return ABSQM_ERR_IO;
    case ErrorKind::contract_violation:
    case ErrorKind::degenerate_input:
    case ErrorKind::insufficient_data:
      return ABSQM_ERR_CONTRACT;
  }
  return ABSQM_ERR_INTERNAL;
}

template <class F>
absqm_status guarded(F&& body) noexcept {
  try {
    body();
    last_error.clear();
    return ABSQM_OK;
  } catch (const absqm::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    last_error = e.what();
    return ABSQM_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return ABSQM_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) absqm::fail(absqm::ErrorKind::contract_violation, std::string(what) + " is NULL");
}

absqm::BesselKind bessel_kind(absqm_bessel_kind kind) {
  switch (kind) {
    case ABSQM_BESSEL_J:
      return absqm::BesselKind::J;
    case ABSQM_BESSEL_Y:
      return absqm::BesselKind::Y;
    case ABSQM_BESSEL_I:
      return absqm::BesselKind::I;
    case ABSQM_BESSEL_K:
      return absqm::BesselKind::K;
  }
  absqm::fail(absqm::ErrorKind::contract_violation, "unknown Bessel kind");
}

}  // namespace

extern "C" {

ABSQM_API const char* absqm_version(void) { return ABSQM_VERSION; }

ABSQM_API const char* absqm_last_error(void) { return last_error.c_str(); }

ABSQM_API const char* absqm_status_name(absqm_status status) {
  switch (status) {
    case ABSQM_OK:
      return "ok";
    case ABSQM_ERR_CONFIG:
      return "config";
    case ABSQM_ERR_ASSERTION:
      return "assertion";
    case ABSQM_ERR_NUMERICAL:
      return "numerical";
    case ABSQM_ERR_CONTRACT:
      return "contract";
    case ABSQM_ERR_DOMAIN:
      return "domain";
    case ABSQM_ERR_RANGE:
      return "range";
    case ABSQM_ERR_IO:
      return "io";
    case ABSQM_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

ABSQM_API absqm_status absqm_bessel(absqm_bessel_kind kind, double order, double x, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = absqm::bessel(bessel_kind(kind), order, x);
  });
}

ABSQM_API absqm_status absqm_bessel_derivative(absqm_bessel_kind kind, double order, double x, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = absqm::bessel_derivative(bessel_kind(kind), order, x);
  });
}

ABSQM_API void absqm_ab_config_default(absqm_ab_config* cfg) {
  if (!cfg) return;
  const absqm::ABConfig d;
  *cfg = {d.b, d.B0, d.C1, d.uz, d.phi0, d.r_out, d.n_r};
}

ABSQM_API absqm_status absqm_ab_solve(const absqm_ab_config* cfg, int branch, absqm_ab_solution** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = nullptr;
    absqm::ABConfig c;
    c.b = cfg->b;
    c.B0 = cfg->B0;
    c.C1 = cfg->C1;
    c.uz = cfg->uz;
    c.phi0 = cfg->phi0;
    c.r_out = cfg->r_out;
    c.n_r = cfg->n_r;
    *out = new absqm_ab_solution{absqm::solve_radial(c, branch)};
  });
}

ABSQM_API void absqm_ab_solution_free(absqm_ab_solution* s) { delete s; }

ABSQM_API absqm_status absqm_ab_solution_energy(const absqm_ab_solution* s, double* E) {
  return guarded([&] {
    need(s, "solution");
    need(E, "E");
    *E = s->value.E;
  });
}

ABSQM_API absqm_status absqm_ab_solution_interior_mass(const absqm_ab_solution* s, double* mass) {
  return guarded([&] {
    need(s, "solution");
    need(mass, "mass");
    *mass = s->value.interior_mass;
  });
}

ABSQM_API absqm_status absqm_ab_solution_size(const absqm_ab_solution* s, size_t* n) {
  return guarded([&] {
    need(s, "solution");
    need(n, "n");
    *n = s->value.r.size();
  });
}

ABSQM_API absqm_status absqm_ab_solution_profile(const absqm_ab_solution* s, double* r, double* R, double* u_theta,
                                                 size_t n) {
  return guarded([&] {
    need(s, "solution");
    const absqm::RadialABSolution& v = s->value;
    absqm::require(n == v.r.size(), absqm::ErrorKind::contract_violation,
                   "profile buffer holds " + std::to_string(n) + " samples, solution has " +
                       std::to_string(v.r.size()));
    for (size_t i = 0; i < n; ++i) {
      if (r) r[i] = v.r[i];
      if (R) R[i] = v.R[i];
      if (u_theta) u_theta[i] = v.u_theta[i];
    }
  });
}

ABSQM_API size_t absqm_command_count(void) { return absqm::command_names().size(); }

ABSQM_API const char* absqm_command_name(size_t i) {
  const auto& names = absqm::command_names();
  return i < names.size() ? names[i].c_str() : nullptr;
}

ABSQM_API absqm_status absqm_run(const absqm_run_request* request, absqm_run_result** out) {
  return guarded([&] {
    need(request, "request");
    need(out, "out");
    need(request->command, "request->command");
    need(request->out_dir, "request->out_dir");
    *out = nullptr;
    absqm::require(request->log_level >= ABSQM_LOG_QUIET && request->log_level <= ABSQM_LOG_DEBUG,
                   absqm::ErrorKind::contract_violation, "unknown log level");
    absqm::RunRequest r;
    r.command = request->command;
    r.config_path = request->config_path ? request->config_path : "";
    r.out_dir = request->out_dir;
    if (request->has_seed) r.seed = request->seed;
    r.log_level = static_cast<absqm::LogLevel>(request->log_level);
    *out = new absqm_run_result{absqm::run(r)};
  });
}

ABSQM_API void absqm_run_result_free(absqm_run_result* r) { delete r; }

ABSQM_API int absqm_run_result_exit_code(const absqm_run_result* r) { return r ? r->value.exit_code : 2; }

ABSQM_API const char* absqm_run_result_message(const absqm_run_result* r) {
  return r ? r->value.message.c_str() : "";
}

ABSQM_API size_t absqm_run_result_assertion_count(const absqm_run_result* r) {
  return r ? r->value.assertions.size() : 0;
}

ABSQM_API absqm_status absqm_run_result_assertion(const absqm_run_result* r, size_t i, const char** name,
                                                  double* value, double* limit, double* margin, int* pass) {
  return guarded([&] {
    need(r, "result");
    absqm::require(i < r->value.assertions.size(), absqm::ErrorKind::range, "assertion index out of range");
    const absqm::AssertionResult& a = r->value.assertions[i];
    if (name) *name = a.name.c_str();
    if (value) *value = a.value;
    if (limit) *limit = a.limit;
    if (margin) *margin = a.margin;
    if (pass) *pass = a.pass ? 1 : 0;
  });
}

}  // extern "C"
