#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "absqm/schrodinger.hpp"
#include "absqm/wavefield.hpp"

using namespace absqm;
using std::numbers::pi;

namespace {

const Grid kRandomGrid(-20.0, 20.0, 512, Boundary::periodic);

WaveField plane_wave(const Grid& g, double k) {
  ComplexField psi(g.size());
  const double amp = 1.0 / std::sqrt(g.length());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = amp * std::polar(1.0, k * g.x(i));
  return WaveField::make(g, psi);
}

AbsoluteProcess extract_with_rhs(const WaveField& w) {
  EvolutionSpec spec;
  spec.potential = w.gauge;
  return extract_absolute(w, rhs(w, spec));
}

double max_diff_unflagged(const RealField& a, const RealField& b,
                          const std::vector<unsigned char>& flagged) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!flagged[i]) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ErrorKind kind_of_throw(auto fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::assertion;
}

}  // namespace

TEST_CASE("polar decomposition of a winding plane wave") {
  const Grid g(0.0, 2 * pi, 64, Boundary::periodic);
  const WaveField w = plane_wave(g, 3.0);
  const PolarDecomposition pd = polar_decompose(w);
  const double offset = pd.phase[0] - 3.0 * g.x(0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(pd.r_amp[i] - 1.0 / std::sqrt(2 * pi)) < 1e-14);
    CHECK(std::abs(pd.phase[i] - 3.0 * g.x(i) - offset) < 1e-10);
  }
}

TEST_CASE("polar decomposition of a real Gaussian has constant phase") {
  const Grid g(-10.0, 10.0, 256, Boundary::periodic);
  const PolarDecomposition pd = polar_decompose(WaveField::make(g, gaussian_packet(g, 0.0, 1.0, 0.0)));
  for (double s : pd.phase) CHECK(std::abs(s - pd.phase[0]) < 1e-14);
}

TEST_CASE("polar decomposition of a chirped Gaussian against a manual unwrap") {
  const Grid g(-10.0, 10.0, 2048, Boundary::dirichlet_zero);
  ComplexField psi = gaussian_packet(g, 0.0, 1.0, 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, g.x(i) * g.x(i));
  const PolarDecomposition pd = polar_decompose(WaveField::make(g, psi));

  // Oracle: atan2 per point, unwrapped left to right by hand.
  RealField manual(g.size());
  manual[0] = std::atan2(psi[0].imag(), psi[0].real());
  for (std::size_t i = 1; i < g.size(); ++i) {
    double step = std::atan2(psi[i].imag(), psi[i].real()) - std::atan2(psi[i - 1].imag(), psi[i - 1].real());
    step -= 2 * pi * std::round(step / (2 * pi));
    manual[i] = manual[i - 1] + step;
  }
  std::size_t centre = g.size() / 2;
  const double offset = pd.phase[centre] - g.x(centre) * g.x(centre);
  const double manual_offset = manual[centre] - g.x(centre) * g.x(centre);
  std::size_t valid = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (pd.flagged[i]) continue;
    ++valid;
    CHECK(std::abs(pd.phase[i] - g.x(i) * g.x(i) - offset) < 1e-8);
    CHECK(std::abs(manual[i] - g.x(i) * g.x(i) - manual_offset) < 1e-8);
  }
  CHECK(valid > g.size() / 2);
  CHECK(pd.interior_flagged == 0);
}

TEST_CASE("polar decomposition rejects a zero field") {
  const Grid g(0.0, 1.0, 16, Boundary::periodic);
  WaveField w = WaveField::make(g, ComplexField(16, Complex{}));
  CHECK(kind_of_throw([&] { polar_decompose(w); }) == ErrorKind::degenerate_input);
  CHECK(kind_of_throw([&] { polar_decompose(w, 0.0); }) == ErrorKind::contract_violation);
}

TEST_CASE("extraction from a free plane wave") {
  const Grid g(0.0, 2 * pi, 64, Boundary::periodic);
  const double k = 2.0;
  const AbsoluteProcess p = extract_with_rhs(plane_wave(g, k));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(p.u[i] - k) < 1e-12);
    CHECK(std::abs(p.eps[i] + 0.5 * k * k) < 1e-12);
    CHECK(std::abs(p.s[i]) < 1e-12);
    CHECK(std::abs(p.j[i] - p.rho[i] * p.u[i]) < 1e-12);
    CHECK(std::abs(p.rho[i] - p.r_amp[i] * p.r_amp[i]) < 1e-12);
    CHECK(std::abs(p.s[i] + p.eps[i] + 0.5 * p.u[i] * p.u[i]) < 1e-12);
  }
}

TEST_CASE("gauge-shifted plane wave keeps its velocity") {
  const Grid g(0.0, 2 * pi, 64, Boundary::periodic);
  const WaveField w = plane_wave(g, 2.0);
  RealField alpha(g.size()), zero(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) alpha[i] = 3.0 * g.x(i);
  const WaveField shifted = gauge_transform(w, alpha, zero);
  for (double a1 : shifted.gauge.a1) CHECK(std::abs(a1 - 3.0) < 1e-12);
  const AbsoluteProcess before = extract_with_rhs(w);
  const AbsoluteProcess after = extract_with_rhs(shifted);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(after.u[i] - before.u[i]) < 1e-11);
    CHECK(std::abs(after.eps[i] - before.eps[i]) < 1e-11);
  }
}

TEST_CASE("real ground state of a harmonic well carries no current") {
  const Grid g(-10.0, 10.0, 256, Boundary::periodic);
  WaveField w = WaveField::make(g, gaussian_packet(g, 0.0, std::sqrt(0.5), 0.0));
  for (std::size_t i = 0; i < g.size(); ++i) w.gauge.a0[i] = 0.5 * g.x(i) * g.x(i);
  const AbsoluteProcess p = extract_with_rhs(w);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(p.j[i]) < 1e-14);
    if (p.rho[i] > 1e-6) CHECK(std::abs(p.u[i]) < 1e-12);
    // Stationary: eps = -E + a0 with E = 1/2.
    if (p.rho[i] > 1e-6) CHECK(std::abs(p.eps[i] + 0.5 - w.gauge.a0[i]) < 1e-8);
  }
}

TEST_CASE("property: gauge invariance of the absolute fields") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Grid& g = kRandomGrid;
  for (int trial = 0; trial < 20; ++trial) {
    WaveField w = WaveField::make(g, random_gaussian_mixture(g, rng));
    for (std::size_t i = 0; i < g.size(); ++i) w.gauge.a0[i] = 0.05 * g.x(i) * g.x(i);
    const double c1 = unit(rng), c2 = unit(rng), beta = unit(rng);
    RealField alpha(g.size()), alpha_t(g.size(), beta);
    for (std::size_t i = 0; i < g.size(); ++i)
      alpha[i] = c1 * std::sin(2 * pi * g.x(i) / g.length()) + c2 * std::cos(4 * pi * g.x(i) / g.length());
    const WaveField w2 = gauge_transform(w, alpha, alpha_t);
    const AbsoluteProcess a = extract_with_rhs(w);
    const AbsoluteProcess b = extract_with_rhs(w2);
    CHECK(max_diff_unflagged(a.rho, b.rho, a.flagged) < 1e-9);
    CHECK(weighted_rms_difference(a, a.u, b.u) < 1e-9);
    CHECK(weighted_rms_difference(a, a.eps, b.eps) < 1e-9);
    CHECK(weighted_rms_difference(a, a.s, b.s) < 1e-9);
  }
}

TEST_CASE("gauge transform: constant phase and group property") {
  const Grid& g = kRandomGrid;
  std::mt19937_64 rng(3);
  const WaveField w = WaveField::make(g, random_gaussian_mixture(g, rng));
  const RealField c(g.size(), 0.7), zero(g.size(), 0.0);
  const WaveField wc = gauge_transform(w, c, zero);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(wc.psi[i] - w.psi[i] * std::polar(1.0, 0.7)) < 1e-15);
    CHECK(std::abs(wc.gauge.a1[i]) < 1e-12);
    CHECK(wc.gauge.a0[i] == 0.0);
  }
  RealField a1(g.size()), a2(g.size()), t1(g.size(), 0.2), t2(g.size(), -0.5), sum(g.size()),
      tsum(g.size(), -0.3);
  for (std::size_t i = 0; i < g.size(); ++i) {
    a1[i] = std::sin(2 * pi * g.x(i) / g.length());
    a2[i] = 0.3 * std::cos(2 * pi * g.x(i) / g.length());
    sum[i] = a1[i] + a2[i];
  }
  const WaveField two = gauge_transform(gauge_transform(w, a1, t1), a2, t2);
  const WaveField one = gauge_transform(w, sum, tsum);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(two.psi[i] - one.psi[i]) < 1e-14);
    CHECK(std::abs(two.gauge.a1[i] - one.gauge.a1[i]) < 1e-12);
    CHECK(std::abs(two.gauge.a0[i] - one.gauge.a0[i]) < 1e-15);
  }
}

TEST_CASE("reconstruct round trips") {
  const Grid g(0.0, 2 * pi, 64, Boundary::periodic);
  const WaveField w = plane_wave(g, 2.0);
  const AbsoluteProcess p = extract_with_rhs(w);
  const WaveField back = reconstruct(p, w.gauge);
  CHECK(overlap_magnitude(w, back) == doctest::Approx(1.0).epsilon(1e-12));
  const Complex ratio = back.psi[0] / w.psi[0];
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(back.psi[i] - ratio * w.psi[i]) < 1e-12);
}

TEST_CASE("reconstruct refuses an inconsistent energy field") {
  const Grid g(0.0, 2 * pi, 64, Boundary::periodic);
  const WaveField w = plane_wave(g, 2.0);
  AbsoluteProcess p = extract_with_rhs(w);
  for (std::size_t i = 0; i < g.size(); ++i) p.eps[i] += 0.1 * std::sin(g.x(i));
  CHECK(kind_of_throw([&] { reconstruct(p, w.gauge); }) == ErrorKind::path_dependence);
  p.u_t.clear();
  CHECK(kind_of_throw([&] { reconstruct(p, w.gauge); }) == ErrorKind::contract_violation);
}

TEST_CASE("reconstruct recovers a Schrodinger-evolved Gaussian") {
  const Grid g(-20.0, 20.0, 512, Boundary::periodic);
  WaveField w0 = WaveField::make(g, gaussian_packet(g, -2.0, 1.0, 1.0, 0.1));
  EvolutionSpec spec;
  spec.potential = GaugePotential::zero(g);
  for (std::size_t i = 0; i < g.size(); ++i) spec.potential.a0[i] = 0.02 * g.x(i) * g.x(i);
  spec.dt = 1e-3;
  spec.t_final = 1.0;
  const Trajectory traj = evolve(w0, spec, 1000);
  const WaveField& last = traj.snapshots.back();
  const AbsoluteProcess p = extract_absolute(last, traj.rhs.back());
  const WaveField back = reconstruct(p, last.gauge);
  CHECK(overlap_magnitude(last, back) >= 1.0 - 1e-6);
  const AbsoluteProcess q = extract_absolute(back, rhs(back, spec));
  CHECK(max_diff_unflagged(p.rho, q.rho, p.flagged) < 1e-8);
  CHECK(weighted_rms_difference(p, p.u, q.u) < 1e-8);
}

TEST_CASE("boost transform basics") {
  const Grid g(0.0, 2 * pi, 64, Boundary::periodic);
  const WaveField w = plane_wave(g, 2.0);
  const WaveField same = boost_transform(w, 0.0);
  CHECK(same.psi == w.psi);

  const WaveField boosted = boost_transform(w, 1.0);
  CHECK(boosted.frame_velocity == 1.0);
  const AbsoluteProcess p = extract_with_rhs(boosted);
  for (double u : p.u) CHECK(std::abs(u - 1.0) < 1e-12);

  std::mt19937_64 rng(5);
  const WaveField r = WaveField::make(kRandomGrid, random_gaussian_mixture(kRandomGrid, rng));
  const WaveField back = boost_transform(boost_transform(r, 0.8), -0.8);
  CHECK(std::abs(overlap_magnitude(r, back) - 1.0) < 1e-10);
  CHECK(back.frame_velocity == 0.0);
}

TEST_CASE("boost beyond a dirichlet domain is a range error") {
  const Grid g(-5.0, 5.0, 64, Boundary::dirichlet_zero);
  WaveField w = WaveField::make(g, gaussian_packet(g, 0.0, 1.0, 0.0), 10.0);
  CHECK(kind_of_throw([&] { boost_transform(w, 2.0); }) == ErrorKind::range);
}

TEST_CASE("property: boost covariance of the absolute fields") {
  const Grid& g = kRandomGrid;
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const double v = 0.25 * (trial + 1) * (trial % 2 ? 1 : -1);
    // Shift by a whole number of cells so the reference needs no interpolation.
    const double t = 3.0 * g.dx() / std::abs(v);
    WaveField w = WaveField::make(g, random_gaussian_mixture(g, rng), t);
    for (std::size_t i = 0; i < g.size(); ++i) w.gauge.a0[i] = 0.01 * g.x(i) * g.x(i);
    const WaveField b = boost_transform(w, v);
    const AbsoluteProcess p = extract_with_rhs(w);
    const AbsoluteProcess q = extract_with_rhs(b);
    const double shift = v * w.time;
    double drho = 0, du = 0, deps = 0, ds = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i) + shift;
      const double rho = interpolate_cubic(p.rho, g, x);
      if (rho < 1e-6 * max_abs(p.rho)) continue;
      const double u = interpolate_cubic(p.u, g, x);
      const double eps = interpolate_cubic(p.eps, g, x);
      const double s = interpolate_cubic(p.s, g, x);
      drho = std::max(drho, std::abs(q.rho[i] - rho));
      du = std::max(du, std::abs(q.u[i] - (u - v)));
      deps = std::max(deps, std::abs(q.eps[i] - (eps + v * u - 0.5 * v * v)));
      ds = std::max(ds, std::abs(q.s[i] - s));
    }
    CHECK(drho < 1e-6);
    CHECK(du < 1e-6);
    CHECK(deps < 1e-6);
    CHECK(ds < 1e-6);
  }
}

TEST_CASE("overlap magnitude and distance") {
  const Grid& g = kRandomGrid;
  std::mt19937_64 rng(1);
  const WaveField a = WaveField::make(g, random_gaussian_mixture(g, rng));
  const WaveField b = WaveField::make(g, random_gaussian_mixture(g, rng));
  CHECK(overlap_magnitude(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(process_distance(a, a) < 1e-6);
  CHECK(overlap_magnitude(a, b) == doctest::Approx(overlap_magnitude(b, a)).epsilon(1e-14));
  CHECK(overlap_magnitude(ray_phase(a, 0.3), ray_phase(b, 2.1)) ==
        doctest::Approx(overlap_magnitude(a, b)).epsilon(1e-13));

  const WaveField far1 = WaveField::make(g, gaussian_packet(g, -10.0, 0.7, 0.0));
  const WaveField far2 = WaveField::make(g, gaussian_packet(g, 10.0, 0.7, 0.0));
  CHECK(overlap_magnitude(far1, far2) < 1e-8);

  const WaveField even = WaveField::make(g, gaussian_packet(g, 0.0, 1.0, 0.0));
  ComplexField odd_psi = even.psi;
  for (std::size_t i = 0; i < g.size(); ++i) odd_psi[i] *= g.x(i);
  normalize(odd_psi, g);
  const WaveField odd = WaveField::make(g, odd_psi);
  CHECK(std::abs(process_distance(even, odd) - pi / 2) < 1e-6);

  const double s_before = overlap_magnitude(a, b);
  WaveField ta = a, tb = b;
  ta.time = tb.time = 1.5;
  CHECK(std::abs(overlap_magnitude(boost_transform(ta, 0.7), boost_transform(tb, 0.7)) - s_before) < 1e-8);

  WaveField unnormalized = a;
  for (Complex& z : unnormalized.psi) z *= 2.0;
  CHECK(kind_of_throw([&] { overlap_magnitude(a, unnormalized); }) == ErrorKind::contract_violation);
}

TEST_CASE("property: triangle inequality on random triples") {
  const Grid& g = kRandomGrid;
  std::mt19937_64 rng(99);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const WaveField a = WaveField::make(g, random_gaussian_mixture(g, rng));
    const WaveField b = WaveField::make(g, random_gaussian_mixture(g, rng));
    const WaveField c = WaveField::make(g, random_gaussian_mixture(g, rng));
    if (process_distance(a, c) > process_distance(a, b) + process_distance(b, c) + 1e-12) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("chart coordinates") {
  const Grid& g = kRandomGrid;
  std::mt19937_64 rng(8);
  const WaveField a = WaveField::make(g, random_gaussian_mixture(g, rng));
  CHECK(std::sqrt(norm_squared(chart_coordinate(a, a), g)) < 1e-12);
  CHECK(std::sqrt(norm_squared(chart_coordinate(a, ray_phase(a, 1.234)), g)) < 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    const WaveField b = WaveField::make(g, random_gaussian_mixture(g, rng));
    const double s = overlap_magnitude(a, b);
    if (s < 1e-6) continue;
    const ComplexField phi = chart_coordinate(a, b);
    CHECK(std::abs(norm_squared(phi, g) - (1 - s * s)) < 1e-10);
    CHECK(std::abs(inner_product(a.psi, phi, g)) < 1e-10);
    const ComplexField phi_rot = chart_coordinate(a, ray_phase(b, 0.9));
    for (std::size_t i = 0; i < phi.size(); ++i) CHECK(std::abs(phi[i] - phi_rot[i]) < 1e-12);
  }

  const WaveField even = WaveField::make(g, gaussian_packet(g, 0.0, 1.0, 0.0));
  ComplexField odd_psi = even.psi;
  for (std::size_t i = 0; i < g.size(); ++i) odd_psi[i] *= g.x(i);
  normalize(odd_psi, g);
  const WaveField odd = WaveField::make(g, odd_psi);
  CHECK(kind_of_throw([&] { chart_coordinate(even, odd); }) == ErrorKind::chart_domain);
}

TEST_CASE("geodesic length converges to the distance") {
  const Grid& g = kRandomGrid;
  std::mt19937_64 rng(17);
  const WaveField a = WaveField::make(g, random_gaussian_mixture(g, rng));
  CHECK(geodesic_length(a, a, 16) < 1e-12);

  int tested = 0;
  while (tested < 10) {
    ComplexField mix = random_gaussian_mixture(g, rng);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += a.psi[i];
    normalize(mix, g);
    const WaveField b = WaveField::make(g, mix);
    if (overlap_magnitude(a, b) < 0.3) continue;
    ++tested;
    const double exact = process_distance(a, b);
    const double e256 = std::abs(geodesic_length(a, b, 256) - exact);
    const double e512 = std::abs(geodesic_length(a, b, 512) - exact);
    CHECK(e512 < 1e-4);
    if (e512 > 1e-12) {
      CHECK(e256 / e512 > 3.5);
      CHECK(e256 / e512 < 4.5);
    }
  }
}

TEST_CASE("cotensor boost identities") {
  const Grid& g = kRandomGrid;
  std::mt19937_64 rng(4);
  const AbsoluteProcess p = extract_with_rhs(WaveField::make(g, random_gaussian_mixture(g, rng)));
  CHECK(cotensor_boost_check(p, 0.0) == 0.0);
  for (double v : {-3.0, -0.5, 0.1, 1.0, 2.5}) CHECK(cotensor_boost_check(p, v) < 1e-12);

  const CotensorZ z = CotensorZ::from(-1.3, 0.7);
  const CotensorZ two = z.boosted(0.4).boosted(-1.1);
  const CotensorZ one = z.boosted(0.4 - 1.1);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(std::abs(two.c[a][b] - one.c[a][b]) < 1e-14);

  const CotensorW w = CotensorW::from(-2.0, 2.0);
  CHECK(w.c[0][0][0] == -2.0);
  CHECK(w.c[1][0][0] == 2.0);
  CHECK(w.c[1][1][0] == -0.5);
  CHECK(w.c[1][0][1] == -0.5);
  CHECK(w.c[0][1][1] == 0.5);
  CHECK(w.c[0][1][0] == 0.0);
  CHECK(w.c[0][0][1] == 0.0);
  CHECK(w.c[1][1][1] == 0.0);
  const CotensorZ zw = w.z();
  CHECK(zw.c[0][0] == -2.0);
  CHECK(zw.c[1][0] == 1.0);
  CHECK(zw.c[0][1] == 1.0);
  CHECK(zw.c[1][1] == -0.5);
}

TEST_CASE("property: ray invariance is exact") {
  const Grid& g = kRandomGrid;
  std::mt19937_64 rng(12);
  const WaveField w = WaveField::make(g, random_gaussian_mixture(g, rng));
  WaveField r = w;
  for (Complex& z : r.psi) z = Complex(-z.imag(), z.real());
  const AbsoluteProcess a = extract_with_rhs(w);
  const AbsoluteProcess b = extract_with_rhs(r);
  CHECK(a.rho == b.rho);
  CHECK(a.u == b.u);
  CHECK(a.eps == b.eps);
  CHECK(a.s == b.s);
}
