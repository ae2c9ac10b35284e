#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "absqm/absqm.h"

namespace fs = std::filesystem;

TEST_CASE("version and status names") {
  CHECK(std::string(absqm_version()).size() >= 5);
  CHECK(std::string(absqm_status_name(ABSQM_OK)) == "ok");
  CHECK(std::string(absqm_status_name(ABSQM_ERR_RANGE)) == "range");
  CHECK(std::string(absqm_status_name(static_cast<absqm_status>(42))) == "unknown");
}

TEST_CASE("bessel through the C boundary") {
  double v = 0.0;
  REQUIRE(absqm_bessel(ABSQM_BESSEL_J, 0.0, 1.0, &v) == ABSQM_OK);
  CHECK(v == doctest::Approx(0.7651976865579666).epsilon(1e-14));
  REQUIRE(absqm_bessel(ABSQM_BESSEL_I, 1.0, 2.0, &v) == ABSQM_OK);
  CHECK(v == doctest::Approx(1.5906368546373291).epsilon(1e-14));
  REQUIRE(absqm_bessel_derivative(ABSQM_BESSEL_J, 0.0, 1.0, &v) == ABSQM_OK);
  CHECK(v == doctest::Approx(-0.4400505857449335).epsilon(1e-14));
  CHECK(std::string(absqm_last_error()).empty());

  CHECK(absqm_bessel(ABSQM_BESSEL_J, -1.0, 1.0, &v) == ABSQM_ERR_DOMAIN);
  CHECK(std::string(absqm_last_error()).find("order") != std::string::npos);
  CHECK(absqm_bessel(ABSQM_BESSEL_Y, 0.0, 0.0, &v) == ABSQM_ERR_DOMAIN);
  CHECK(absqm_bessel(ABSQM_BESSEL_J, 500.0, 1.0, &v) == ABSQM_ERR_RANGE);
  CHECK(absqm_bessel(ABSQM_BESSEL_J, 0.0, 1.0, nullptr) == ABSQM_ERR_CONTRACT);
  CHECK(absqm_bessel(static_cast<absqm_bessel_kind>(9), 0.0, 1.0, &v) == ABSQM_ERR_CONTRACT);
  REQUIRE(absqm_bessel(ABSQM_BESSEL_J, 0.0, 1.0, &v) == ABSQM_OK);
  CHECK(std::string(absqm_last_error()).empty());
}

TEST_CASE("last error is per thread") {
  double v = 0.0;
  REQUIRE(absqm_bessel(ABSQM_BESSEL_J, -1.0, 1.0, &v) == ABSQM_ERR_DOMAIN);
  std::string seen = "unset";
  std::thread([&] { seen = absqm_last_error(); }).join();
  CHECK(seen.empty());
  CHECK(!std::string(absqm_last_error()).empty());
}

TEST_CASE("Aharonov-Bohm solution handle") {
  absqm_ab_config cfg;
  absqm_ab_config_default(&cfg);
  cfg.B0 = 0.8;
  cfg.C1 = 0.3;
  cfg.uz = 0.2;
  absqm_ab_solution* s = nullptr;
  REQUIRE(absqm_ab_solve(&cfg, 0, &s) == ABSQM_OK);
  REQUIRE(s != nullptr);
  double E = 0.0, mass = 0.0;
  size_t n = 0;
  CHECK(absqm_ab_solution_energy(s, &E) == ABSQM_OK);
  CHECK(absqm_ab_solution_interior_mass(s, &mass) == ABSQM_OK);
  CHECK(absqm_ab_solution_size(s, &n) == ABSQM_OK);
  CHECK(E > 0.5 * cfg.uz * cfg.uz);
  CHECK(mass > 0.0);
  CHECK(mass < 1.0);
  CHECK(n == static_cast<size_t>(cfg.n_r));

  std::vector<double> r(n), R(n), u(n);
  REQUIRE(absqm_ab_solution_profile(s, r.data(), R.data(), u.data(), n) == ABSQM_OK);
  // Trapezoid normalisation of R^2 r on the sample grid.
  double norm = 0.5 * R[0] * R[0] * r[0] * r[0];
  for (size_t i = 1; i < n; ++i) norm += 0.5 * (R[i] * R[i] * r[i] + R[i - 1] * R[i - 1] * r[i - 1]) * (r[i] - r[i - 1]);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-3));
  const double c2 = cfg.C1 + 0.5 * cfg.B0 * cfg.b * cfg.b;
  for (size_t i = 0; i < n; ++i) {
    const double expect = r[i] < cfg.b ? 0.5 * cfg.B0 * r[i] + cfg.C1 / r[i] : c2 / r[i];
    CHECK(std::abs(u[i] - expect) < 1e-12);
  }
  CHECK(absqm_ab_solution_profile(s, r.data(), nullptr, nullptr, n) == ABSQM_OK);
  CHECK(absqm_ab_solution_profile(s, r.data(), R.data(), u.data(), n - 1) == ABSQM_ERR_CONTRACT);
  absqm_ab_solution_free(s);
  absqm_ab_solution_free(nullptr);

  cfg.r_out = 2.0;
  s = reinterpret_cast<absqm_ab_solution*>(0x1);
  CHECK(absqm_ab_solve(&cfg, 0, &s) != ABSQM_OK);
  CHECK(s == nullptr);
  CHECK(!std::string(absqm_last_error()).empty());
  CHECK(absqm_ab_solve(nullptr, 0, &s) == ABSQM_ERR_CONTRACT);
}

TEST_CASE("command table") {
  std::vector<std::string> names;
  for (size_t i = 0; i < absqm_command_count(); ++i) names.emplace_back(absqm_command_name(i));
  CHECK(names == std::vector<std::string>{"simulate", "dissipative", "ab-sweep", "kg-limit", "check"});
  CHECK(absqm_command_name(names.size()) == nullptr);
}

TEST_CASE("runs through the C boundary") {
  const fs::path base = fs::temp_directory_path() / "absqm_test_capi";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string cfg = (base / "small.json").string();
  std::ofstream(cfg) << R"({"check": {"grid": {"n": 256}, "states": 2, "uncertainty_states": 10,
    "triangle_triples": 5, "geodesic_pairs": 1, "geodesic_steps": 256, "assert": {"geodesic": 1e-3}}})";
  const std::string out = (base / "run").string();

  absqm_run_request req{"check", cfg.c_str(), out.c_str(), 1, 11, ABSQM_LOG_QUIET};
  absqm_run_result* res = nullptr;
  REQUIRE(absqm_run(&req, &res) == ABSQM_OK);
  CHECK(absqm_run_result_exit_code(res) == 0);
  const size_t count = absqm_run_result_assertion_count(res);
  CHECK(count >= 9);
  for (size_t i = 0; i < count; ++i) {
    const char* name = nullptr;
    double value = 0, limit = 0, margin = 0;
    int pass = 0;
    REQUIRE(absqm_run_result_assertion(res, i, &name, &value, &limit, &margin, &pass) == ABSQM_OK);
    CHECK(name != nullptr);
    CHECK(pass == 1);
    CHECK(margin >= 0.0);
  }
  CHECK(absqm_run_result_assertion(res, count, nullptr, nullptr, nullptr, nullptr, nullptr) == ABSQM_ERR_RANGE);
  absqm_run_result_free(res);
  CHECK(fs::exists(fs::path(out) / "manifest.json"));

  req.command = "unknown";
  REQUIRE(absqm_run(&req, &res) == ABSQM_OK);
  CHECK(absqm_run_result_exit_code(res) == 2);
  CHECK(std::string(absqm_run_result_message(res)).find("unknown command") != std::string::npos);
  absqm_run_result_free(res);

  req.command = nullptr;
  CHECK(absqm_run(&req, &res) == ABSQM_ERR_CONTRACT);
  CHECK(absqm_run(nullptr, &res) == ABSQM_ERR_CONTRACT);
  CHECK(absqm_run_result_exit_code(nullptr) == 2);
  CHECK(absqm_run_result_assertion_count(nullptr) == 0);
}
