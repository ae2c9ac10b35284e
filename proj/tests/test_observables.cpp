#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "absqm/absolute.hpp"
#include "absqm/observables.hpp"
#include "oracles.hpp"

using namespace absqm;
using std::numbers::pi;

namespace {

AbsoluteProcess process_of(const WaveField& w) {
  EvolutionSpec spec;
  spec.potential = w.gauge;
  return extract_absolute(w, rhs(w, spec));
}

Grid wide_grid() { return Grid(-20.0, 20.0, 1024, Boundary::periodic); }

}  // namespace

TEST_CASE("moments of a plane-wave modulated Gaussian") {
  const Grid g = wide_grid();
  const double sigma = 1.3, k = 0.9;
  const MomentReport m = moments(process_of(WaveField::make(g, gaussian_packet(g, 0.4, sigma, k))));
  CHECK(m.Q == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(std::abs(m.V - k) < 1e-12);
  CHECK(std::abs(m.T) < 1e-12);
  CHECK(std::abs(m.P - 1.0 / (4 * sigma * sigma)) < 1e-12);
  CHECK(std::abs(m.varQ - sigma * sigma) < 1e-12);
  CHECK(std::abs(m.K - 0.5 * (k * k + 1.0 / (4 * sigma * sigma))) < 1e-10);
  CHECK(std::abs(m.varV - m.T - m.P) < 1e-15);
}

TEST_CASE("real symmetric state has no mean velocity and no correlation") {
  const Grid g = wide_grid();
  ComplexField psi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    psi[i] = std::exp(-(x - 2) * (x - 2)) + std::exp(-(x + 2) * (x + 2));
  }
  normalize(psi, g);
  const MomentReport m = moments(process_of(WaveField::make(g, psi)));
  CHECK(std::abs(m.V) < 1e-14);
  CHECK(std::abs(m.Y) < 1e-14);
  CHECK(std::abs(m.Q) < 1e-12);
}

TEST_CASE("chirped Gaussian correlation and spread") {
  const Grid g = wide_grid();
  for (double chirp : {-0.25, 0.1, 0.3}) {
    const double sigma = 1.1;
    const auto ref = oracle::chirped_gaussian(sigma, chirp);
    const MomentReport m = moments(process_of(WaveField::make(g, gaussian_packet(g, 0.0, sigma, 0.5, chirp))));
    CHECK(std::abs(m.Y - ref.y_corr) < 1e-10);
    CHECK(std::abs(m.T - ref.t_spread) < 1e-10);
    CHECK(std::abs(m.P - ref.p_amp) < 1e-10);
    CHECK(std::abs(m.varV - ref.var_v) < 1e-10);
    const UncertaintyMargins u = uncertainty_report(m);
    // Every Gaussian, chirped or not, meets all three bounds with equality;
    // the correlation shows up only in the classical margin.
    CHECK(std::abs(u.hat1) < 1e-8);
    CHECK(std::abs(u.hat2) < 1e-8);
    CHECK(std::abs(u.hat3) < 1e-8);
    CHECK(std::abs(u.classical - ref.y_corr * ref.y_corr) < 1e-8);
    CHECK(u.all_hold());
  }
}

TEST_CASE("Gaussian with constant velocity saturates the sharpest bound") {
  const Grid g = wide_grid();
  for (double sigma : {0.6, 1.0, 1.7}) {
    const MomentReport m = moments(process_of(WaveField::make(g, gaussian_packet(g, -1.0, sigma, 1.5))));
    const UncertaintyMargins u = uncertainty_report(m);
    CHECK(std::abs(u.hat3) < 1e-8);
    CHECK(std::abs(u.hat1) < 1e-8);
  }
}

TEST_CASE("random superpositions satisfy all inequalities") {
  const Grid g = wide_grid();
  std::mt19937_64 rng(2024);
  int violations = 0, ordering = 0;
  double worst = 1.0;
  for (int trial = 0; trial < 500; ++trial) {
    const MomentReport m = moments(process_of(WaveField::make(g, random_gaussian_mixture(g, rng))));
    const UncertaintyMargins u = uncertainty_report(m);
    if (!u.all_hold()) ++violations;
    if (u.hat3 > u.classical) ++ordering;
    worst = std::min({worst, u.hat1, u.hat2, u.hat3});
  }
  MESSAGE("smallest margin " << worst);
  CHECK(violations == 0);
  CHECK(ordering == 0);
}

TEST_CASE("velocity variance split matches the momentum variance of psi") {
  const Grid g = wide_grid();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const WaveField w = WaveField::make(g, random_gaussian_mixture(g, rng));
    const MomentReport m = moments(process_of(w));
    const ComplexField d = derivative(std::span<const Complex>(w.psi), g, 1);
    RealField f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::norm(d[i]);
    const double p2 = integrate(f, g);
    CHECK(std::abs(m.varV - (p2 - m.V * m.V)) < 1e-10);
    // K from -<eps> against the kinetic matrix element.
    CHECK(std::abs(m.K - 0.5 * p2) < 1e-10);
    CHECK(std::abs(m.K - 0.5 * (m.V * m.V + m.T + m.P)) < 1e-10);
    CHECK(m.varQ >= 0.0);
    CHECK(m.T >= 0.0);
    CHECK(m.P >= 0.0);
  }
}

TEST_CASE("moments transform as expected under a boost") {
  const Grid g = wide_grid();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const WaveField w = WaveField::make(g, random_gaussian_mixture(g, rng));
    const double v = 0.7;
    const MomentReport a = moments(process_of(w));
    const MomentReport b = moments(process_of(boost_transform(w, v)));
    CHECK(std::abs(b.Q - a.Q) < 1e-6);
    CHECK(std::abs(b.varQ - a.varQ) < 1e-6);
    CHECK(std::abs(b.T - a.T) < 1e-6);
    CHECK(std::abs(b.P - a.P) < 1e-6);
    CHECK(std::abs(b.Y - a.Y) < 1e-6);
    CHECK(std::abs(b.V - (a.V - v)) < 1e-6);
    CHECK(std::abs(b.K - (a.K + 0.5 * v * v - v * a.V)) < 1e-6);
  }
}

TEST_CASE("integrated cotensor agrees with the moments") {
  const Grid g = wide_grid();
  std::mt19937_64 rng(3);
  const WaveField w = WaveField::make(g, random_gaussian_mixture(g, rng));
  const AbsoluteProcess p = process_of(w);
  const MomentReport m = moments(p);
  const CotensorW total = build_cotensor(p).integrated(g);
  CHECK(std::abs(total.eps() + m.K) < 1e-10);
  CHECK(std::abs(total.u() - m.V) < 1e-10);
}

TEST_CASE("moments refuse bad input") {
  const Grid g(-5.0, 5.0, 256, Boundary::periodic);
  ComplexField psi = gaussian_packet(g, 0.0, 1.0, 0.0);
  for (Complex& z : psi) z *= 2.0;
  CHECK_THROWS_AS(moments(process_of(WaveField::make(g, psi))), Error);
  ComplexField wide = gaussian_packet(g, 0.0, 2.0, 0.0);
  normalize(wide, g);
  try {
    moments(process_of(WaveField::make(g, wide)));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("Ehrenfest relations") {
  const Grid g = wide_grid();
  SUBCASE("free packet") {
    EvolutionSpec spec;
    spec.dt = 2e-3;
    spec.t_final = 1.0;
    const Trajectory traj = evolve(WaveField::make(g, gaussian_packet(g, -1.0, 1.0, 1.2, 0.1)), spec, 50);
    const auto procs = extract_trajectory(traj, TimeDifferencing::stored);
    const EhrenfestReport r = ehrenfest_check(procs, [](double, double) { return 0.0; });
    CHECK(r.times.size() == procs.size() - 2);
    CHECK(r.velocity_deviation < 1e-6);
    CHECK(r.acceleration_deviation < 1e-6);
  }
  SUBCASE("constant field") {
    const double e0 = 0.3;
    EvolutionSpec spec;
    spec.potential = GaugePotential::zero(g);
    for (std::size_t i = 0; i < g.size(); ++i) spec.potential.a0[i] = -e0 * g.x(i);
    spec.dt = 2e-3;
    spec.t_final = 1.0;
    const WaveField w0{g, gaussian_packet(g, -1.0, 1.0, 0.2), 0.0, spec.potential, 0.0};
    const auto procs = extract_trajectory(evolve(w0, spec, 50), TimeDifferencing::stored);
    const EhrenfestReport r = ehrenfest_check(procs, [e0](double, double) { return e0; });
    for (double a : r.d2q_dt2) CHECK(std::abs(a - e0) / e0 < 1e-4);
    CHECK(r.acceleration_deviation < 1e-4);
    CHECK(r.velocity_deviation < 1e-4);
  }
  SUBCASE("too few snapshots") {
    const AbsoluteProcess p = process_of(WaveField::make(g, gaussian_packet(g, 0.0, 1.0, 0.0)));
    std::vector<AbsoluteProcess> procs(4, p);
    CHECK_THROWS_AS(ehrenfest_check(procs, [](double, double) { return 0.0; }), Error);
  }
}
