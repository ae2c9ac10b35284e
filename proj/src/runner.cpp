#include "absqm/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>

#include "absqm/aharonov_bohm.hpp"
#include "absqm/dissipative.hpp"
#include "absqm/io.hpp"
#include "absqm/kleingordon.hpp"
#include "absqm/observables.hpp"

#ifndef ABSQM_VERSION
#define ABSQM_VERSION "0.0.0"
#endif

namespace absqm {

namespace fs = std::filesystem;
using io::ConfigSection;
using io::Json;

namespace {

constexpr std::uint64_t kDefaultSeed = 7;

struct Context {
  fs::path out;
  std::uint64_t seed = kDefaultSeed;
  LogLevel level = LogLevel::info;
  // Effective parameters, echoed into the manifest.
  Json params = Json::object();
  Json report = Json::object();
  std::vector<AssertionResult> assertions;
  std::vector<std::string> files;

  void log(const std::string& msg, LogLevel at = LogLevel::info) const {
    if (static_cast<int>(level) >= static_cast<int>(at)) std::clog << "[absqm] " << msg << '\n';
  }
  fs::path file(const std::string& name) {
    files.push_back(name);
    return out / name;
  }
  void check(AssertionResult a) {
    log(std::string(a.pass ? "pass " : "FAIL ") + a.name + " value " + io::format_number(a.value) + " limit " +
            io::format_number(a.limit),
        a.pass ? LogLevel::debug : LogLevel::info);
    assertions.push_back(std::move(a));
  }
  void check_true(const std::string& name, bool ok) { check(at_least(name, ok ? 1.0 : 0.0, 1.0)); }
};

// Reads a number and records it in the effective parameters.
struct Params {
  ConfigSection& cfg;
  Json& out;

  double number(const std::string& key, double fallback) { return (out[key] = cfg.number(key, fallback)).get<double>(); }
  long integer(const std::string& key, long fallback) { return (out[key] = cfg.integer(key, fallback)).get<long>(); }
  std::string string(const std::string& key, const std::string& fallback) {
    return (out[key] = cfg.string(key, fallback)).get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
    const std::vector<double> v = cfg.numbers(key, fallback);
    out[key] = v;
    return v;
  }
};

std::size_t positive_size(Params& p, const std::string& key, long fallback) {
  const long v = p.integer(key, fallback);
  if (v <= 0) p.cfg.reject(key, "must be positive");
  return static_cast<std::size_t>(v);
}

Grid read_grid(ConfigSection& parent, Json& params, double x_min, double x_max, long n, const std::string& boundary) {
  ConfigSection cfg = parent.section("grid");
  Json out = Json::object();
  Params p{cfg, out};
  const double lo = p.number("x_min", x_min), hi = p.number("x_max", x_max);
  const std::size_t size = positive_size(p, "n", n);
  const std::string b = p.string("boundary", boundary);
  cfg.finish();
  params["grid"] = out;
  Boundary kind;
  try {
    kind = boundary_from_string(b);
  } catch (const Error& e) {
    cfg.reject("boundary", e.what());
  }
  if (hi <= lo) cfg.reject("x_max", "must exceed x_min");
  return Grid(lo, hi, size, kind);
}

std::string indexed(const std::string& stem, std::size_t k, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", k);
  return stem + buf + ext;
}

// ---- simulate ---------------------------------------------------------------

void simulate(ConfigSection& cfg, Context& ctx) {
  Json& params = ctx.params;
  const Grid g = read_grid(cfg, params, -20.0, 20.0, 1024, "periodic");

  ConfigSection st = cfg.section("state");
  Json state = Json::object();
  Params ps{st, state};
  const double center = ps.number("center", -2.0), sigma = ps.number("sigma", 1.0);
  const double k0 = ps.number("k0", 0.5), chirp = ps.number("chirp", 0.1);
  st.finish();
  params["state"] = state;

  ConfigSection fd = cfg.section("field");
  Json field = Json::object();
  Params pf{fd, field};
  const double e0 = pf.number("e0", 0.5), a1 = pf.number("a1", 0.0);
  fd.finish();
  params["field"] = field;

  ConfigSection nl = cfg.section("nonlinear");
  Json nonlin = Json::object();
  Params pn{nl, nonlin};
  const std::string kind = pn.string("kind", "none");
  const double k = pn.number("k", 0.0), k1 = pn.number("k1", 0.0), k2 = pn.number("k2", 1.0);
  nl.finish();
  params["nonlinear"] = nonlin;

  Params p{cfg, params};
  EvolutionSpec spec;
  spec.dt = p.number("dt", 1e-3);
  spec.t_final = p.number("t_final", 1.0);
  const long every = p.integer("snapshot_every", 50);
  const double floor = p.number("rho_floor", kDefaultRhoFloor);
  // Residuals differentiate s, which carries R''/R; deep tails are round-off.
  const double residual_floor = p.number("residual_rho_floor", 1e-8);

  ConfigSection as = cfg.section("assert");
  Json limits = Json::object();
  Params pa{as, limits};
  const double lim_norm = pa.number("norm_drift", 1e-10);
  const double lim_ms = pa.number("mass_shell", 1e-6);
  const double lim_cont = pa.number("continuity", 1e-8);
  const double lim_force = pa.number("force", 1e-4);
  const double lim_ehr = pa.number("ehrenfest", 1e-4);
  const double lim_unc = pa.number("uncertainty", -1e-9);
  as.finish();
  params["assert"] = limits;
  cfg.finish();

  if (kind == "none") spec.nonlinear = NonlinearTerm::none();
  else if (kind == "nls") spec.nonlinear = NonlinearTerm::nls(k);
  else if (kind == "log_bbm") spec.nonlinear = NonlinearTerm::log_bbm(k1, k2);
  else nl.reject("kind", "expected none, nls or log_bbm, found " + kind);
  if (every < 1) cfg.reject("snapshot_every", "must be >= 1");

  spec.potential = GaugePotential::zero(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    spec.potential.a0[i] = -e0 * g.x(i);
    spec.potential.a1[i] = a1;
  }
  const WaveField w0{g, gaussian_packet(g, center, sigma, k0, chirp), 0.0, spec.potential, 0.0};
  ctx.log("simulate: evolving to t = " + io::format_number(spec.t_final));
  const Trajectory traj = evolve(w0, spec, static_cast<int>(every));
  const auto procs = extract_trajectory(traj, TimeDifferencing::stored, floor);
  const auto cores = extract_trajectory(traj, TimeDifferencing::stored, residual_floor);

  ctx.log("simulate: residuals and observables");
  const RealField e_field = static_electric_field(spec.potential, g);
  const ResidualSeries ms = residual_mass_shell(cores);
  const ResidualSeries ct = residual_continuity(cores, TimeDifferencing::stored);
  const ResidualSeries fc = residual_force(cores, e_field, TimeDifferencing::stored);
  require(ms.values.size() == procs.size() && ct.values.size() == procs.size() && fc.values.size() == procs.size(),
          ErrorKind::numerical, "simulate: residual series do not cover every snapshot");
  io::write_csv(ctx.file("residuals.csv"), {"time", "mass_shell", "continuity", "force"},
                {ms.times, ms.values, ct.values, fc.values});

  std::vector<std::vector<double>> obs(13);
  double norm_drift = 0.0, worst_margin = 1.0;
  for (std::size_t m = 0; m < procs.size(); ++m) {
    const MomentReport r = moments(procs[m]);
    const UncertaintyMargins u = uncertainty_report(r);
    const double norm = norm_squared(traj.snapshots[m].psi, g);
    norm_drift = std::max(norm_drift, std::abs(norm - 1.0));
    worst_margin = std::min({worst_margin, u.hat1, u.hat2, u.hat3});
    const double row[13] = {r.time, norm, r.Q, r.V, r.K, r.varQ, r.varV, r.T, r.P, r.Y, u.hat1, u.hat2, u.hat3};
    for (int c = 0; c < 13; ++c) obs[c].push_back(row[c]);
  }
  io::write_csv(ctx.file("observables.csv"),
                {"time", "norm", "Q", "V", "K", "varQ", "varV", "T", "P", "Y", "hat1", "hat2", "hat3"}, obs);

  for (std::size_t m = 0; m < procs.size(); ++m)
    io::write_snapshot_csv(ctx.file(indexed("snapshot_", m, ".csv")), traj.snapshots[m], procs[m],
                           Json{{"command", "simulate"}});

  const EhrenfestReport ehr = ehrenfest_check(procs, [e0](double, double) { return e0; });
  ctx.check(at_most("norm_drift", norm_drift, lim_norm));
  ctx.check(at_most("mass_shell_residual", ms.max(), lim_ms));
  ctx.check(at_most("continuity_residual", ct.max(), lim_cont));
  ctx.check(at_most("force_residual", fc.max(), lim_force));
  ctx.check(at_most("ehrenfest_velocity", ehr.velocity_deviation, lim_ehr));
  ctx.check(at_most("ehrenfest_acceleration", ehr.acceleration_deviation, lim_ehr));
  ctx.check(at_least("uncertainty_margin", worst_margin, lim_unc));
}

// ---- dissipative ------------------------------------------------------------

void dissipative(ConfigSection& cfg, Context& ctx) {
  Json& params = ctx.params;
  const Grid g = read_grid(cfg, params, -30.0, 30.0, 1024, "periodic");
  Params p{cfg, params};
  const double sigma = p.number("sigma", 1.0), q0 = p.number("q0", 0.0), v0 = p.number("v0", 1.0);
  DissipativeParams dp;
  dp.damping = p.number("damping", 1.0);
  dp.c_stab = p.number("c_stab", 0.1);
  dp.rho_floor = p.number("rho_floor", 1e-14);
  const double t_final = p.number("t_final", 60.0);
  const double interval = p.number("snapshot_interval", 0.25);
  const double t_transient = p.number("t_transient", 1.0);
  const std::vector<double> window = p.numbers("fit_window", {20.0, 60.0});
  const double t_laws = p.number("expectation_t_max", 5.0);
  const double t_dual = p.number("dual_t", 1.0);

  ConfigSection as = cfg.section("assert");
  Json limits = Json::object();
  Params pa{as, limits};
  const double lim_z = pa.number("z_star_min", 0.98);
  const double lim_zdot = pa.number("zdot_max", 1e-6);
  const double lim_h = pa.number("h_margin_min", -1e-9);
  const double lim_law = pa.number("expectation_max", 0.01);
  const double lim_dual = pa.number("dual_rho_max", 1e-4);
  const std::vector<double> slope_band = pa.numbers("slope_ratio", {0.85, 1.15});
  const std::vector<double> k_band = pa.numbers("k_ratio", {0.8, 1.2});
  as.finish();
  params["assert"] = limits;
  cfg.finish();
  if (window.size() != 2 || window[1] <= window[0]) cfg.reject("fit_window", "expected [t_min, t_max] with t_min < t_max");
  if (window[1] > t_final * (1.0 + 1e-12)) cfg.reject("fit_window", "ends after t_final");
  if (slope_band.size() != 2) as.reject("slope_ratio", "expected [low, high]");
  if (k_band.size() != 2) as.reject("k_ratio", "expected [low, high]");

  const double dt = dp.c_stab * g.dx() * g.dx();
  ctx.log("dissipative: absolute solver to t = " + io::format_number(t_final));
  const DissipativeRun run = run_absolute(gaussian_state(g, sigma, q0, v0), dt, t_final, interval, dp);
  const DissipativeDiagnostics d = diagnostics(run.snapshots, dp, t_transient);
  io::write_csv(ctx.file("diagnostics.csv"), {"t", "Q", "V", "X", "Y", "T", "P", "Z", "K"},
                {d.t, d.Q, d.V, d.X, d.Y, d.T, d.P, d.Z, d.K});
  const AsymptoticReport a = asymptotics(d, window[0], window[1]);
  const ExpectationFit laws = expectation_laws(d, t_laws);

  ctx.log("dissipative: dual-solver comparison at t = " + io::format_number(t_dual));
  const DissipativeRun short_run = run_absolute(gaussian_state(g, sigma, q0, v0), dt, t_dual, t_dual, dp);
  const auto wave = run_quasiwave(WaveField::make(g, gaussian_packet(g, q0, sigma, v0)), dt, t_dual, t_dual, dp);
  const DissipativeState& sa = short_run.snapshots.back();
  require(sa.grid == wave.back().grid, ErrorKind::numerical, "dissipative: dual runs ended on different grids");
  RealField gap(g.size());
  for (std::size_t i = 0; i < gap.size(); ++i) {
    const double e = sa.rho[i] - std::norm(wave.back().psi[i]);
    gap[i] = e * e;
  }
  const double dual = std::sqrt(integrate(gap, sa.grid));

  Json fit = Json::object();
  fit["Z_star"] = a.z_star;
  fit["z_drift"] = a.z_drift;
  fit["inconclusive"] = a.inconclusive;
  fit["x2_slope"] = a.x2_slope;
  fit["x2_intercept"] = a.x2_intercept;
  fit["slope_ratio"] = a.slope_ratio;
  fit["k_prefactor"] = a.k_prefactor;
  fit["k_ratio"] = a.k_ratio;
  fit["width_exponent"] = a.width_exponent;
  fit["k_exponent"] = a.k_exponent;
  fit["q_deviation"] = laws.q_deviation;
  fit["v_deviation"] = laws.v_deviation;
  fit["dual_rho_distance"] = dual;
  fit["domain_extensions"] = run.domain_extensions;
  io::write_json(ctx.file("fit.json"), fit);
  io::write_snapshot_csv(ctx.file("final_state.csv"), to_process(run.snapshots.back(), dp.rho_floor),
                         Json{{"command", "dissipative"}});

  ctx.check_true("asymptotic_window_conclusive", !a.inconclusive);
  ctx.check(at_least("Z_star", a.z_star, lim_z));
  ctx.check(at_least("x2_slope_over_Z_low", a.slope_ratio, slope_band[0]));
  ctx.check(at_most("x2_slope_over_Z_high", a.slope_ratio, slope_band[1]));
  ctx.check(at_least("k_ratio_low", a.k_ratio, k_band[0]));
  ctx.check(at_most("k_ratio_high", a.k_ratio, k_band[1]));
  ctx.check(at_most("zdot_max", d.zdot_max, lim_zdot));
  ctx.check(at_least("h1_margin", d.h1_min, lim_h));
  ctx.check(at_least("h2_margin", d.h2_min, lim_h));
  ctx.check(at_most("q_law_deviation", laws.q_deviation, lim_law));
  ctx.check(at_most("v_law_deviation", laws.v_deviation, lim_law));
  ctx.check(at_most("dual_solver_rho", dual, lim_dual));
}

// ---- ab-sweep ---------------------------------------------------------------

void ab_sweep(ConfigSection& cfg, Context& ctx) {
  Json& params = ctx.params;
  Params p{cfg, params};
  ABConfig ab;
  ab.b = p.number("b", 1.0);
  ab.B0 = p.number("B0", 0.8);
  ab.C1 = p.number("C1", 0.3);
  ab.uz = p.number("uz", 0.2);
  ab.r_out = p.number("r_out", 5.0);
  ab.n_r = static_cast<int>(p.integer("n_r", 400));
  const int branch = static_cast<int>(p.integer("branch", 0));
  const std::vector<double> ladder = p.numbers("phi0_ladder", {1e1, 1e2, 1e3, 1e4});
  ConfigSection as = cfg.section("assert");
  Json limits = Json::object();
  Params pa{as, limits};
  const double lim_jump = pa.number("jump_max", 1e-8);
  const double lim_res = pa.number("residual_max", 1e-7);
  const double lim_red = pa.number("reduction_min", 100.0);
  as.finish();
  params["assert"] = limits;
  cfg.finish();
  ab.phi0 = ladder.empty() ? 0.0 : ladder.front();
  try {
    ab.validate();
  } catch (const Error& e) {
    cfg.reject("", e.what());
  }

  ctx.log("ab-sweep: " + std::to_string(ladder.size()) + " wall heights");
  const WallSweepReport rep = wall_sweep(ab, ladder, branch);
  std::vector<std::vector<double>> cols(9);
  double worst_jump = 0.0, worst_res = 0.0;
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    ABConfig c = ab;
    c.phi0 = ladder[k];
    const RadialABSolution s = solve_radial(c, branch);
    const double res = radial_residual(s, c);
    worst_jump = std::max({worst_jump, std::abs(s.value_jump), std::abs(s.slope_jump)});
    worst_res = std::max(worst_res, res);
    const WallSweepRow& r = rep.rows[k];
    const double row[9] = {r.phi0, r.E, r.kappa, s.lambda, r.interior_mass, r.max_interior_R, s.value_jump, s.slope_jump, res};
    for (int j = 0; j < 9; ++j) cols[j].push_back(row[j]);
    io::write_csv(ctx.file(indexed("profile_", k, ".csv")), {"r", "R", "u_theta"}, {s.r, s.R, s.u_theta},
                  Json{{"phi0", c.phi0}, {"E", s.E}}.dump());
  }
  io::write_csv(ctx.file("sweep.csv"),
                {"phi0", "E", "kappa", "lambda", "interior_mass", "max_interior_R", "value_jump", "slope_jump",
                 "ode_residual"},
                cols);
  std::vector<std::vector<double>> ut(1 + rep.rows.size());
  ut[0] = rep.interior_r;
  std::vector<std::string> header{"r"};
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    ut[k + 1] = rep.rows[k].u_theta_interior;
    header.push_back(indexed("u_theta_", k, ""));
  }
  io::write_csv(ctx.file("u_theta_interior.csv"), header, ut);

  const double reduction = rep.rows.front().interior_mass / rep.rows.back().interior_mass;
  ctx.report["mass_exponent"] = rep.mass_exponent;
  ctx.check_true("interior_mass_decreasing", rep.mass_decreasing);
  ctx.check_true("u_theta_interior_identical", rep.u_theta_identical);
  ctx.check(at_least("interior_mass_reduction", reduction, lim_red));
  ctx.check(at_most("matching_jump", worst_jump, lim_jump));
  ctx.check(at_most("radial_ode_residual", worst_res, lim_res));
}

// ---- kg-limit ---------------------------------------------------------------

void kg_limit(ConfigSection& cfg, Context& ctx) {
  Json& params = ctx.params;
  const Grid g = read_grid(cfg, params, -40.0, 40.0, 256, "periodic");
  ConfigSection en = cfg.section("envelope");
  Json env = Json::object();
  Params pe{en, env};
  const double center = pe.number("center", 0.0), sigma = pe.number("sigma", 2.0), k0 = pe.number("k0", 1.0);
  en.finish();
  params["envelope"] = env;
  Params p{cfg, params};
  const std::vector<double> ladder = p.numbers("c_ladder", {5.0, 10.0, 20.0, 40.0});
  NRLimitSpec spec;
  spec.t = p.number("t", spec.t);
  spec.dt_c2 = p.number("dt_c2", spec.dt_c2);
  spec.nr_dt = p.number("nr_dt", spec.nr_dt);
  spec.bandwidth_fraction = p.number("bandwidth_fraction", spec.bandwidth_fraction);
  ConfigSection as = cfg.section("assert");
  Json limits = Json::object();
  Params pa{as, limits};
  const std::vector<double> band = pa.numbers("exponent", {1.7, 2.3});
  const double eps_c = pa.number("eps_c", 20.0);
  const double eps_lim = pa.number("eps_relative_max", 1e-2);
  as.finish();
  params["assert"] = limits;
  cfg.finish();
  if (band.size() != 2) as.reject("exponent", "expected [low, high]");
  if (g.boundary() != Boundary::periodic) cfg.section("grid").reject("boundary", "must be periodic");
  if (std::find(ladder.begin(), ladder.end(), eps_c) == ladder.end()) as.reject("eps_c", "must be one of c_ladder");

  const WaveField w = WaveField::make(g, gaussian_packet(g, center, sigma, k0));
  ctx.log("kg-limit: ladder of " + std::to_string(ladder.size()) + " values of c");
  const NRLimitReport rep = nr_limit_compare(w, ladder, spec);
  std::vector<std::vector<double>> cols(7);
  for (const NRLimitRow& r : rep.rows) {
    const double row[7] = {r.c, r.dt, r.distance, r.rho_distance, r.u_distance, r.eps_distance, r.eps_relative};
    for (int j = 0; j < 7; ++j) cols[j].push_back(row[j]);
  }
  io::write_csv(ctx.file("limit.csv"), {"c", "dt", "distance", "rho_distance", "u_distance", "eps_distance", "eps_relative"},
                cols);

  // Snapshot of the cheapest run for plotting.
  const double c = ladder.front();
  const KGField f0 = kg_from_envelope(w, c);
  const double dt = std::min({spec.dt_c2 / (c * c), 0.5 * g.dx() / c, kg_max_dt(g, c, f0.gauge)});
  const KGTrajectory tr = kg_evolve(f0, dt, spec.t, 1 << 30);
  io::write_snapshot_csv(ctx.file("kg_snapshot.csv"), kg_extract(tr.snapshots.back(), spec.rho_floor),
                         Json{{"command", "kg-limit"}});

  ctx.report["k_max"] = rep.k_max;
  ctx.report["exponent"] = rep.exponent;
  ctx.check(at_least("distance_exponent_low", rep.exponent, band[0]));
  ctx.check(at_most("distance_exponent_high", rep.exponent, band[1]));
  ctx.check_true("distance_monotone", rep.monotone);
  for (const NRLimitRow& r : rep.rows)
    if (r.c == eps_c) ctx.check(at_most("eps_relative_at_c", r.eps_relative, eps_lim));
}

// ---- check ------------------------------------------------------------------

AbsoluteProcess extract_with_rhs(const WaveField& w) {
  EvolutionSpec spec;
  spec.potential = w.gauge;
  return extract_absolute(w, rhs(w, spec));
}

void check_suite(ConfigSection& cfg, Context& ctx) {
  Json& params = ctx.params;
  const Grid g = read_grid(cfg, params, -20.0, 20.0, 1024, "periodic");
  Params p{cfg, params};
  const std::size_t n_states = positive_size(p, "states", 20);
  const std::size_t n_unc = positive_size(p, "uncertainty_states", 500);
  const std::size_t n_tri = positive_size(p, "triangle_triples", 200);
  const std::size_t n_geo = positive_size(p, "geodesic_pairs", 5);
  const int geo_steps = static_cast<int>(p.integer("geodesic_steps", 512));
  const double v_max = p.number("boost_max", 1.5);
  ConfigSection as = cfg.section("assert");
  Json limits = Json::object();
  Params pa{as, limits};
  const double lim_gauge = pa.number("gauge", 1e-9);
  const double lim_ray = pa.number("ray_roundoff", 1e-12);
  const double lim_boost = pa.number("boost", 1e-6);
  const double lim_cot = pa.number("cotensor", 1e-12);
  const double lim_unc = pa.number("uncertainty", -1e-9);
  const double lim_sat = pa.number("saturation", 1e-8);
  const double lim_geo = pa.number("geodesic", 1e-4);
  as.finish();
  params["assert"] = limits;
  cfg.finish();
  if (geo_steps < 2) cfg.reject("geodesic_steps", "must be at least 2");

  std::mt19937_64 rng(ctx.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double pi = std::numbers::pi;

  ctx.log("check: gauge, ray and boost invariance on " + std::to_string(n_states) + " states");
  std::vector<std::vector<double>> rows(7);
  double gauge_err = 0.0, ray_err = 0.0, ray_round = 0.0, boost_err = 0.0, cot_err = 0.0;
  for (std::size_t k = 0; k < n_states; ++k) {
    WaveField w = WaveField::make(g, random_gaussian_mixture(g, rng));
    for (std::size_t i = 0; i < g.size(); ++i) w.gauge.a0[i] = 0.01 * g.x(i) * g.x(i);
    const AbsoluteProcess a = extract_with_rhs(w);

    const double c1 = unit(rng), c2 = unit(rng), beta = unit(rng);
    RealField alpha(g.size()), alpha_t(g.size(), beta);
    for (std::size_t i = 0; i < g.size(); ++i)
      alpha[i] = c1 * std::sin(2 * pi * g.x(i) / g.length()) + c2 * std::cos(4 * pi * g.x(i) / g.length());
    const AbsoluteProcess b = extract_with_rhs(gauge_transform(w, alpha, alpha_t));
    double ge = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!a.flagged[i]) ge = std::max(ge, std::abs(a.rho[i] - b.rho[i]));
    ge = std::max({ge, weighted_rms_difference(a, a.u, b.u), weighted_rms_difference(a, a.s, b.s)});

    // Quarter turns are exact in floating point, so the fields must match bit for bit.
    WaveField turned = w;
    double re = 0.0;
    for (int q = 1; q < 4; ++q) {
      for (Complex& z : turned.psi) z = Complex(-z.imag(), z.real());
      const AbsoluteProcess r = extract_with_rhs(turned);
      if (r.rho != a.rho || r.u != a.u || r.eps != a.eps || r.s != a.s) re = 1.0;
    }
    const AbsoluteProcess r = extract_with_rhs(ray_phase(w, 2.0 * pi * unit(rng)));
    const double rr = std::max({weighted_rms_difference(a, a.rho, r.rho), weighted_rms_difference(a, a.u, r.u),
                                weighted_rms_difference(a, a.s, r.s)});

    // Shift by a whole number of cells so no interpolation error enters.
    double v = v_max * unit(rng);
    if (std::abs(v) < 0.05) v = 0.05;
    WaveField wt = w;
    wt.time = 3.0 * g.dx() / std::abs(v);
    const AbsoluteProcess p0 = extract_with_rhs(wt);
    const AbsoluteProcess q = extract_with_rhs(boost_transform(wt, v));
    const long shift = static_cast<long>(std::lround(v * wt.time / g.dx()));
    const double peak = *std::max_element(p0.rho.begin(), p0.rho.end());
    double be = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const long j = static_cast<long>(i) + shift;
      if (j < 0 || j >= static_cast<long>(g.size())) continue;
      const std::size_t s = static_cast<std::size_t>(j);
      if (p0.rho[s] < 1e-6 * peak) continue;
      be = std::max({be, std::abs(q.rho[i] - p0.rho[s]), std::abs(q.u[i] - (p0.u[s] - v)),
                     std::abs(q.eps[i] - (p0.eps[s] + v * p0.u[s] - 0.5 * v * v)), std::abs(q.s[i] - p0.s[s])});
    }
    const double ce = cotensor_boost_check(a, v);

    gauge_err = std::max(gauge_err, ge);
    ray_err = std::max(ray_err, re);
    ray_round = std::max(ray_round, rr);
    boost_err = std::max(boost_err, be);
    cot_err = std::max(cot_err, ce);
    const double row[7] = {static_cast<double>(k), v, ge, re, rr, be, ce};
    for (int j = 0; j < 7; ++j) rows[j].push_back(row[j]);
  }
  io::write_csv(ctx.file("invariance.csv"), {"state", "boost_v", "gauge_err", "ray_mismatch", "ray_err", "boost_err", "cotensor_err"}, rows);

  ctx.log("check: uncertainty margins on " + std::to_string(n_unc) + " states");
  std::vector<std::vector<double>> urows(5);
  double worst = 1.0;
  long ordering = 0;
  for (std::size_t k = 0; k < n_unc; ++k) {
    const UncertaintyMargins u = uncertainty_report(moments(extract_with_rhs(WaveField::make(g, random_gaussian_mixture(g, rng)))));
    worst = std::min({worst, u.hat1, u.hat2, u.hat3});
    if (u.hat3 > u.classical) ++ordering;
    const double row[5] = {static_cast<double>(k), u.hat1, u.hat2, u.hat3, u.classical};
    for (int j = 0; j < 5; ++j) urows[j].push_back(row[j]);
  }
  io::write_csv(ctx.file("uncertainty.csv"), {"state", "hat1", "hat2", "hat3", "classical"}, urows);
  double saturation = 0.0;
  for (double sigma : {0.6, 1.0, 1.7}) {
    const UncertaintyMargins u =
        uncertainty_report(moments(extract_with_rhs(WaveField::make(g, gaussian_packet(g, -1.0, sigma, 1.5)))));
    saturation = std::max(saturation, std::abs(u.hat3));
  }

  ctx.log("check: process geometry");
  long violations = 0;
  double tightest = 1e300;
  for (std::size_t k = 0; k < n_tri; ++k) {
    const WaveField a = WaveField::make(g, random_gaussian_mixture(g, rng));
    const WaveField b = WaveField::make(g, random_gaussian_mixture(g, rng));
    const WaveField c = WaveField::make(g, random_gaussian_mixture(g, rng));
    const double slack = process_distance(a, b) + process_distance(b, c) - process_distance(a, c);
    tightest = std::min(tightest, slack);
    if (slack < -1e-12) ++violations;
  }
  double geo_err = 0.0;
  const WaveField base = WaveField::make(g, random_gaussian_mixture(g, rng));
  for (std::size_t k = 0; k < n_geo;) {
    ComplexField mix = random_gaussian_mixture(g, rng);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += base.psi[i];
    normalize(mix, g);
    const WaveField b = WaveField::make(g, mix);
    if (overlap_magnitude(base, b) < 0.3) continue;
    ++k;
    geo_err = std::max(geo_err, std::abs(geodesic_length(base, b, geo_steps) - process_distance(base, b)));
  }

  ctx.report["triangle_min_slack"] = tightest;
  ctx.check(at_most("gauge_invariance", gauge_err, lim_gauge));
  ctx.check(at_most("ray_invariance_quarter_turns", ray_err, 0.0));
  ctx.check(at_most("ray_invariance_any_angle", ray_round, lim_ray));
  ctx.check(at_most("boost_covariance", boost_err, lim_boost));
  ctx.check(at_most("cotensor_boost", cot_err, lim_cot));
  ctx.check(at_least("uncertainty_margin", worst, lim_unc));
  ctx.check(at_most("hat3_above_classical", static_cast<double>(ordering), 0.0));
  ctx.check(at_most("gaussian_saturation", saturation, lim_sat));
  ctx.check(at_most("triangle_violations", static_cast<double>(violations), 0.0));
  ctx.check(at_most("geodesic_length", geo_err, lim_geo));
}

using Command = std::function<void(ConfigSection&, Context&)>;

const std::vector<std::pair<std::string, Command>>& commands() {
  static const std::vector<std::pair<std::string, Command>> table{
      {"simulate", simulate}, {"dissipative", dissipative}, {"ab-sweep", ab_sweep},
      {"kg-limit", kg_limit}, {"check", check_suite}};
  return table;
}

Json assertions_json(const std::vector<AssertionResult>& list) {
  Json out = Json::array();
  for (const AssertionResult& a : list)
    out.push_back(Json{{"name", a.name},
                       {"value", a.value},
                       {"limit", a.limit},
                       {"bound", a.upper ? "upper" : "lower"},
                       {"margin", a.margin},
                       {"pass", a.pass}});
  return out;
}

}  // namespace

AssertionResult at_most(std::string name, double value, double limit) {
  const double margin = limit - value;
  return {std::move(name), value, limit, true, margin, std::isfinite(value) && margin >= 0.0};
}

AssertionResult at_least(std::string name, double value, double limit) {
  const double margin = value - limit;
  return {std::move(name), value, limit, false, margin, std::isfinite(value) && margin >= 0.0};
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : commands()) out.push_back(c.first);
    return out;
  }();
  return names;
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::assertion:
      return 3;
    case ErrorKind::stability:
    case ErrorKind::numerical:
    case ErrorKind::unwrap_failure:
    case ErrorKind::branch_not_found:
    case ErrorKind::path_dependence:
      return 4;
    default:
      return 2;
  }
}

RunOutcome run(const RunRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  Context ctx;
  ctx.level = request.log_level;
  ctx.out = request.out_dir;
  bool dir_ready = false;
  try {
    const auto it = std::find_if(commands().begin(), commands().end(),
                                 [&](const auto& c) { return c.first == request.command; });
    require(it != commands().end(), ErrorKind::config, "unknown command '" + request.command + "'");
    require(!request.out_dir.empty(), ErrorKind::config, "an output directory is required");

    Json root = Json::object();
    std::string text, source = "<defaults>";
    if (!request.config_path.empty()) {
      source = request.config_path;
      text = io::read_text(request.config_path);
      root = io::parse_config(text, source);
    }
    ConfigSection top(root, "", source, text);
    const long seed = top.integer("seed", static_cast<long>(kDefaultSeed));
    if (seed < 0) top.reject("seed", "must be non-negative");
    ctx.seed = request.seed.value_or(static_cast<std::uint64_t>(seed));
    ConfigSection section = top.section(request.command);
    for (const auto& c : commands())
      if (c.first != request.command) top.section(c.first);
    top.finish();

    io::ensure_directory(ctx.out);
    dir_ready = true;
    ctx.log(request.command + ": output in " + ctx.out.string());
    it->second(section, ctx);

    const bool pass = std::all_of(ctx.assertions.begin(), ctx.assertions.end(), [](const auto& a) { return a.pass; });
    outcome.exit_code = pass ? 0 : 3;
    if (!pass) {
      std::string failed;
      for (const AssertionResult& a : ctx.assertions)
        if (!a.pass) failed += (failed.empty() ? "" : ", ") + a.name;
      outcome.message = "assertion failed: " + failed;
    } else {
      outcome.message = "all " + std::to_string(ctx.assertions.size()) + " assertions passed";
    }
  } catch (const Error& e) {
    outcome.exit_code = exit_code_for(e.kind());
    outcome.message = std::string(to_string(e.kind())) + ": " + e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = 4;
    outcome.message = std::string("internal: ") + e.what();
  }

  if (dir_ready) {
    try {
      Json report = Json::object();
      report["command"] = request.command;
      report["seed"] = ctx.seed;
      report["pass"] = outcome.exit_code == 0;
      report["exit_code"] = outcome.exit_code;
      report["message"] = outcome.message;
      report["assertions"] = assertions_json(ctx.assertions);
      for (const auto& item : ctx.report.items()) report["values"][item.key()] = item.value();
      io::write_json(ctx.file("report.json"), report);

      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      Json manifest = Json::object();
      manifest["command"] = request.command;
      manifest["version"] = ABSQM_VERSION;
      manifest["seed"] = ctx.seed;
      manifest["config_path"] = request.config_path;
      manifest["config"] = ctx.params;
      manifest["files"] = ctx.files;
      manifest["exit_code"] = outcome.exit_code;
      manifest["wall_time_s"] = wall;
      io::write_json(ctx.out / "manifest.json", manifest);
      ctx.files.push_back("manifest.json");
    } catch (const Error& e) {
      if (outcome.exit_code == 0) {
        outcome.exit_code = exit_code_for(e.kind());
        outcome.message = std::string(to_string(e.kind())) + ": " + e.what();
      }
    }
  }
  if (outcome.exit_code != 0) ctx.log(outcome.message, LogLevel::quiet);
  outcome.assertions = std::move(ctx.assertions);
  outcome.files = std::move(ctx.files);
  return outcome;
}

}  // namespace absqm
