#include <doctest.h>

#include <cmath>
#include <numbers>

#include "absqm/absolute.hpp"
#include "absqm/error.hpp"

using namespace absqm;
using std::numbers::pi;

namespace {

WaveField with_gauge(const Grid& g, ComplexField psi, double t, GaugePotential gauge) {
  return WaveField{g, std::move(psi), t, std::move(gauge), 0.0};
}

GaugePotential linear_potential(const Grid& g, double e0) {
  GaugePotential pot = GaugePotential::zero(g);
  for (std::size_t i = 0; i < g.size(); ++i) pot.a0[i] = -e0 * g.x(i);
  return pot;
}

// Plane wave accelerated by a constant field: k(t) = k0 + e0 t.
ComplexField volkov(const Grid& g, double k0, double e0, double t) {
  const double k = k0 + e0 * t;
  const double phase = (std::pow(k, 3) - std::pow(k0, 3)) / (6.0 * e0);
  ComplexField psi(g.size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::polar(0.3, k * g.x(i) - phase);
  return psi;
}

ComplexField volkov_rate(const Grid& g, double k0, double e0, double t) {
  const double k = k0 + e0 * t;
  ComplexField psi = volkov(g, k0, e0, t);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= Complex(0.0, e0 * g.x(i) - 0.5 * k * k);
  return psi;
}

struct StudyResult {
  double mass_shell, continuity, force;
};

// Chirped Gaussian in a linear potential, residual maxima over interior snapshots.
StudyResult refinement_run(std::size_t n, double dt) {
  const Grid g(-20.0, 20.0, n, Boundary::periodic);
  const double e0 = 0.5;
  EvolutionSpec spec;
  spec.potential = linear_potential(g, e0);
  spec.dt = dt;
  spec.t_final = 1.0;
  WaveField w0 = with_gauge(g, gaussian_packet(g, -2.0, 1.0, 0.5, 0.1), 0.0, spec.potential);
  const Trajectory traj = evolve(w0, spec, 10);
  const auto procs = extract_trajectory(traj, TimeDifferencing::centered);
  const RealField e = static_electric_field(spec.potential, g);
  const std::span<const AbsoluteProcess> inner(procs.data() + 1, procs.size() - 2);
  return {residual_mass_shell(inner).max(),
          residual_continuity(procs, TimeDifferencing::centered).max(),
          residual_force(procs, e, TimeDifferencing::centered).max()};
}

}  // namespace

TEST_CASE("mass shell of a plane wave vanishes") {
  const Grid g(0.0, 2 * pi, 64, Boundary::periodic);
  ComplexField psi(g.size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::polar(1 / std::sqrt(2 * pi), 2.0 * g.x(i));
  const WaveField w = WaveField::make(g, psi);
  const AbsoluteProcess p = extract_absolute(w, rhs(w, EvolutionSpec{}));
  CHECK(mass_shell_norm(p) < 1e-13);
  for (double r : residual_mass_shell(p)) CHECK(std::abs(r) < 1e-13);
}

TEST_CASE("harmonic ground state satisfies the mass shell") {
  const Grid g(-12.0, 12.0, 256, Boundary::periodic);
  GaugePotential pot = GaugePotential::zero(g);
  ComplexField psi(g.size()), rate(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    pot.a0[i] = 0.5 * x * x;
    psi[i] = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
    rate[i] = Complex(0.0, -0.5) * psi[i];
  }
  const AbsoluteProcess p = extract_absolute(with_gauge(g, psi, 0.0, pot), rate);
  CHECK(mass_shell_norm(p) < 1e-8);
}

TEST_CASE("perturbing s shifts the mass shell by the perturbation times R") {
  const Grid g(-12.0, 12.0, 256, Boundary::periodic);
  const WaveField w = WaveField::make(g, gaussian_packet(g, 0.5, 1.2, 0.7, 0.1));
  AbsoluteProcess p = extract_absolute(w, rhs(w, EvolutionSpec{}));
  const RealField before = residual_mass_shell(p);
  for (std::size_t i = 0; i < g.size(); ++i) p.s[i] += 0.01 * std::sin(g.x(i));
  const RealField after = residual_mass_shell(p);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(after[i] - before[i] - 0.01 * std::sin(g.x(i)) * p.r_amp[i]) < 1e-12);
}

TEST_CASE("continuity of a stationary state") {
  const Grid g(-12.0, 12.0, 256, Boundary::periodic);
  EvolutionSpec spec;
  spec.potential = GaugePotential::zero(g);
  for (std::size_t i = 0; i < g.size(); ++i) spec.potential.a0[i] = 0.5 * g.x(i) * g.x(i);
  spec.dt = 1e-3;
  spec.t_final = 0.05;
  ComplexField psi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) psi[i] = std::pow(pi, -0.25) * std::exp(-0.5 * g.x(i) * g.x(i));
  const Trajectory traj = evolve(with_gauge(g, psi, 0.0, spec.potential), spec, 10);
  for (TimeDifferencing mode : {TimeDifferencing::centered, TimeDifferencing::stored}) {
    const auto procs = extract_trajectory(traj, mode);
    const ResidualSeries r = residual_continuity(procs, mode);
    CHECK(r.values.size() == (mode == TimeDifferencing::centered ? procs.size() - 2 : procs.size()));
    CHECK(r.max() < 1e-9);
  }
}

TEST_CASE("injected density violation is reported as the residual") {
  const Grid g(-12.0, 12.0, 256, Boundary::periodic);
  const WaveField w = WaveField::make(g, gaussian_packet(g, 0.0, 1.0, 0.0));
  const AbsoluteProcess base = extract_absolute(w, ComplexField(g.size()));
  // rho grows linearly in time by t f(x) while j stays zero.
  std::vector<AbsoluteProcess> procs;
  RealField f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 1e-3 * std::exp(-g.x(i) * g.x(i));
  for (int k = 0; k < 5; ++k) {
    AbsoluteProcess p = base;
    p.time = 0.1 * k;
    for (std::size_t i = 0; i < g.size(); ++i) p.rho[i] += p.time * f[i];
    procs.push_back(p);
  }
  const ResidualSeries r = residual_continuity(procs, TimeDifferencing::centered);
  REQUIRE(r.values.size() == 3);
  for (double v : r.values) CHECK(std::abs(v - l2_norm(f, g)) < 1e-12);
}

TEST_CASE("too few snapshots are refused") {
  const Grid g(-12.0, 12.0, 128, Boundary::periodic);
  const WaveField w = WaveField::make(g, gaussian_packet(g, 0.0, 1.0, 0.0));
  Trajectory traj;
  traj.snapshots = {w, w};
  traj.rhs = {ComplexField(g.size()), ComplexField(g.size())};
  CHECK_THROWS_AS(extract_trajectory(traj, TimeDifferencing::centered), Error);
  const auto procs = extract_trajectory(traj, TimeDifferencing::stored);
  CHECK_THROWS_AS(residual_continuity(procs, TimeDifferencing::centered), Error);
  CHECK_NOTHROW(residual_continuity(procs, TimeDifferencing::stored));
}

TEST_CASE("force residual of a plane wave in a constant field") {
  const Grid g(0.0, 10.0, 512, Boundary::dirichlet_zero);
  const double k0 = 0.7, e0 = 0.4;
  const GaugePotential pot = linear_potential(g, e0);
  Trajectory traj;
  for (int k = 0; k < 4; ++k) {
    const double t = 1e-4 * k;
    traj.snapshots.push_back(with_gauge(g, volkov(g, k0, e0, t), t, pot));
    traj.rhs.push_back(volkov_rate(g, k0, e0, t));
  }
  const RealField e = static_electric_field(pot, g);
  for (double v : e) CHECK(std::abs(v - e0) < 1e-12);
  for (TimeDifferencing mode : {TimeDifferencing::stored, TimeDifferencing::centered}) {
    const auto procs = extract_trajectory(traj, mode);
    CHECK(residual_force(procs, e, mode).max() < 1e-6);
    CHECK(residual_continuity(procs, mode).max() < 1e-6);
  }
}

TEST_CASE("free plane wave has zero force residual") {
  const Grid g(0.0, 2 * pi, 64, Boundary::periodic);
  Trajectory traj;
  for (int k = 0; k < 3; ++k) {
    const double t = 0.05 * k;
    ComplexField psi(g.size()), rate(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      psi[i] = std::polar(1.0, 3.0 * g.x(i) - 4.5 * t);
      rate[i] = Complex(0.0, -4.5) * psi[i];
    }
    traj.snapshots.push_back(WaveField::make(g, psi, t));
    traj.rhs.push_back(rate);
  }
  const auto procs = extract_trajectory(traj, TimeDifferencing::stored);
  CHECK(residual_force(procs, RealField(g.size(), 0.0), TimeDifferencing::stored).max() < 1e-12);
}

TEST_CASE("residuals converge at second order under refinement") {
  const StudyResult coarse = refinement_run(512, 1e-3);
  const StudyResult fine = refinement_run(1024, 2.5e-4);
  const double order_ms = std::log(coarse.mass_shell / fine.mass_shell) / std::log(4.0);
  const double order_c = std::log(coarse.continuity / fine.continuity) / std::log(4.0);
  const double order_f = std::log(coarse.force / fine.force) / std::log(4.0);
  MESSAGE("orders " << order_ms << " " << order_c << " " << order_f);
  CHECK(order_ms >= 1.8);
  CHECK(order_c >= 1.8);
  CHECK(order_f >= 1.8);
}

TEST_CASE("stored rhs gives residuals at rounding level for an evolved Gaussian") {
  const Grid g(-20.0, 20.0, 256, Boundary::periodic);
  EvolutionSpec spec;
  spec.potential = linear_potential(g, 0.5);
  spec.dt = 2e-3;
  spec.t_final = 0.2;
  const Trajectory traj =
      evolve(with_gauge(g, gaussian_packet(g, -2.0, 1.0, 0.5, 0.1), 0.0, spec.potential), spec, 25);
  const auto procs = extract_trajectory(traj, TimeDifferencing::stored, 1e-8);
  CHECK(residual_continuity(procs, TimeDifferencing::stored).max() < 1e-10);
  CHECK(residual_mass_shell(procs).max() < 1e-6);
}

TEST_CASE("mass shell residual is boost invariant") {
  const Grid g(-20.0, 20.0, 512, Boundary::periodic);
  const WaveField w = WaveField::make(g, gaussian_packet(g, 0.0, 1.0, 0.4, 0.05));
  const double v = 0.6;
  const WaveField wb = boost_transform(w, v);
  const double before = mass_shell_norm(extract_absolute(w, rhs(w, EvolutionSpec{})));
  EvolutionSpec spec;
  spec.potential = wb.gauge;
  const double after = mass_shell_norm(extract_absolute(wb, rhs(wb, spec)));
  CHECK(std::abs(before - after) <= 1e-6);
}

TEST_CASE("cotensor build and recover") {
  const Grid g(0.0, 2 * pi, 32, Boundary::periodic);
  const double k = 2.0;
  ComplexField psi(g.size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::polar(1 / std::sqrt(2 * pi), k * g.x(i));
  const WaveField w = WaveField::make(g, psi);
  const AbsoluteProcess p = extract_absolute(w, rhs(w, EvolutionSpec{}));
  const CotensorField c = build_cotensor(p);
  for (const CotensorW& wi : c.w) {
    CHECK(wi.c[0][0][0] == doctest::Approx(-k * k / 2).epsilon(1e-12));
    CHECK(wi.c[1][0][0] == doctest::Approx(k).epsilon(1e-12));
  }
  RealField eps, u;
  recover_fields(c, eps, u);
  CHECK(eps == p.eps);
  CHECK(u == p.u);
}

TEST_CASE("integrated cotensor gives density averages of eps and u") {
  const Grid g(-15.0, 15.0, 256, Boundary::periodic);
  const WaveField w = WaveField::make(g, gaussian_packet(g, 1.0, 1.0, 0.8, 0.2));
  const AbsoluteProcess p = extract_absolute(w, rhs(w, EvolutionSpec{}));
  const CotensorW total = build_cotensor(p).integrated(g);
  RealField re(g.size()), ru(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    re[i] = p.rho[i] * p.eps[i];
    ru[i] = p.rho[i] * p.u[i];
  }
  CHECK(std::abs(total.eps() - integrate(re, g)) < 1e-10);
  CHECK(std::abs(total.u() - integrate(ru, g)) < 1e-10);
  // <u> of the packet is its momentum; -<eps> its kinetic energy.
  CHECK(std::abs(total.u() - 0.8) < 1e-10);
  const double kinetic = 0.5 * (0.8 * 0.8 + 0.25 + 4 * 0.2 * 0.2);
  CHECK(std::abs(-total.eps() - kinetic) < 1e-10);
}
