#include "absqm/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace absqm {

namespace {

double wrapped_phase_step(Complex next, Complex prev) { return std::arg(next * std::conj(prev)); }

// Replaces values at flagged indices by linear interpolation between the
// nearest unflagged neighbours; beyond the outermost valid samples the line
// through the two nearest valid samples is extended.
void fill_flagged(RealField& f, const std::vector<unsigned char>& flagged) {
  const std::size_t n = f.size();
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < n; ++i)
    if (!flagged[i]) valid.push_back(i);
  if (valid.empty() || valid.size() == n) return;
  auto line = [&](std::size_t a, std::size_t b, std::size_t i) {
    const double t = (static_cast<double>(i) - static_cast<double>(a)) /
                     (static_cast<double>(b) - static_cast<double>(a));
    return f[a] + t * (f[b] - f[a]);
  };
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!flagged[i]) {
      ++k;
      continue;
    }
    if (k == 0) {
      f[i] = valid.size() >= 2 ? line(valid[0], valid[1], i) : f[valid[0]];
    } else if (k == valid.size()) {
      f[i] = valid.size() >= 2 ? line(valid[k - 2], valid[k - 1], i) : f[valid[k - 1]];
    } else {
      f[i] = line(valid[k - 1], valid[k], i);
    }
  }
}

RealField electric_field_static(const GaugePotential& gauge, const Grid& g) {
  RealField e = finite_difference(gauge.a0, g, 1);
  for (double& v : e) v = -v;
  return e;
}

void check_normalized(const WaveField& w, const char* what) {
  const double n2 = norm_squared(w.psi, w.grid);
  require(std::abs(n2 - 1.0) <= 1e-6, ErrorKind::contract_violation,
          std::string(what) + ": input not normalised (norm^2 = " + std::to_string(n2) + ")");
}

void check_pair(const WaveField& a, const WaveField& b, const char* what) {
  require(a.grid == b.grid, ErrorKind::contract_violation,
          std::string(what) + ": fields live on different grids");
  require(std::abs(a.time - b.time) <= 1e-12 * std::max(1.0, std::abs(a.time)),
          ErrorKind::contract_violation, std::string(what) + ": fields at different times");
  check_normalized(a, what);
  check_normalized(b, what);
}

}  // namespace

WaveField WaveField::make(const Grid& g, ComplexField psi, double time) {
  WaveField w{g, std::move(psi), time, GaugePotential::zero(g), 0.0};
  w.validate();
  return w;
}

void WaveField::validate() const {
  check_on_grid(psi.size(), grid, "wavefield psi");
  check_on_grid(gauge.a0.size(), grid, "wavefield a0");
  check_on_grid(gauge.a1.size(), grid, "wavefield a1");
  for (Complex z : psi)
    require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorKind::numerical,
            "wavefield contains non-finite samples");
}

PolarDecomposition polar_decompose(const WaveField& w, double rho_floor) {
  require(rho_floor > 0.0, ErrorKind::contract_violation, "rho_floor must be positive");
  const std::size_t n = w.grid.size();
  check_on_grid(w.psi.size(), w.grid, "polar_decompose");
  PolarDecomposition out;
  out.r_amp.resize(n);
  out.phase.assign(n, 0.0);
  out.flagged.assign(n, 0);

  double max_rho = 0.0;
  std::size_t ref = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.r_amp[i] = std::abs(w.psi[i]);
    const double rho = out.r_amp[i] * out.r_amp[i];
    if (rho > max_rho) {
      max_rho = rho;
      ref = i;
    }
  }
  require(max_rho > 0.0, ErrorKind::degenerate_input, "polar_decompose: psi is identically zero");
  const double floor_abs = rho_floor * max_rho;
  for (std::size_t i = 0; i < n; ++i)
    out.flagged[i] = out.r_amp[i] * out.r_amp[i] < floor_abs ? 1 : 0;

  out.phase[ref] = std::arg(w.psi[ref]);
  std::size_t last = ref;
  for (std::size_t i = ref + 1; i < n; ++i) {
    if (out.flagged[i]) continue;
    out.phase[i] = out.phase[last] + wrapped_phase_step(w.psi[i], w.psi[last]);
    last = i;
  }
  last = ref;
  for (std::size_t i = ref; i-- > 0;) {
    if (out.flagged[i]) continue;
    out.phase[i] = out.phase[last] + wrapped_phase_step(w.psi[i], w.psi[last]);
    last = i;
  }
  fill_flagged(out.phase, out.flagged);

  std::size_t first = n, final = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.flagged[i]) {
      first = std::min(first, i);
      final = i;
    }
  }
  out.hull_size = final - first + 1;
  for (std::size_t i = first; i <= final; ++i) out.interior_flagged += out.flagged[i];
  return out;
}

AbsoluteProcess extract_absolute(const WaveField& w, std::span<const Complex> dpsi_dt,
                                 double rho_floor) {
  w.validate();
  check_on_grid(dpsi_dt.size(), w.grid, "extract_absolute dpsi_dt");
  require(rho_floor > 0.0, ErrorKind::contract_violation, "rho_floor must be positive");
  const Grid& g = w.grid;
  const std::size_t n = g.size();
  const ComplexField psi_x = derivative(std::span<const Complex>(w.psi), g, 1);
  const ComplexField psi_xt = derivative(dpsi_dt, g, 1);

  AbsoluteProcess p{g, w.time};
  p.rho.resize(n);
  p.r_amp.resize(n);
  p.u.resize(n);
  p.eps.resize(n);
  p.s.resize(n);
  p.j.resize(n);
  p.flagged.resize(n);
  p.rho_t.resize(n);
  p.u_t.resize(n);

  double max_rho = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p.rho[i] = std::norm(w.psi[i]);
    max_rho = std::max(max_rho, p.rho[i]);
  }
  require(max_rho > 0.0, ErrorKind::degenerate_input, "extract_absolute: psi is identically zero");
  const double floor_abs = rho_floor * max_rho;

  for (std::size_t i = 0; i < n; ++i) {
    const Complex c = std::conj(w.psi[i]);
    const double d = std::max(p.rho[i], floor_abs);
    const double current = (c * psi_x[i]).imag();
    p.flagged[i] = p.rho[i] < floor_abs ? 1 : 0;
    p.r_amp[i] = std::abs(w.psi[i]);
    p.u[i] = current / d - w.gauge.a1[i];
    p.eps[i] = (c * dpsi_dt[i]).imag() / d + w.gauge.a0[i];
    p.s[i] = -p.eps[i] - 0.5 * p.u[i] * p.u[i];
    p.j[i] = current - p.rho[i] * w.gauge.a1[i];
    p.rho_t[i] = 2.0 * (c * dpsi_dt[i]).real();
    const double current_t = (std::conj(dpsi_dt[i]) * psi_x[i] + c * psi_xt[i]).imag();
    p.u_t[i] = (current_t * d - current * p.rho_t[i]) / (d * d);
  }
  return p;
}

double weighted_rms_difference(const AbsoluteProcess& p, std::span<const double> a,
                               std::span<const double> b) {
  check_on_grid(a.size(), p.grid, "weighted difference a");
  check_on_grid(b.size(), p.grid, "weighted difference b");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (p.flagged[i]) continue;
    num += p.rho[i] * (a[i] - b[i]) * (a[i] - b[i]);
    den += p.rho[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

double consistency_residual(const AbsoluteProcess& p, const GaugePotential& gauge) {
  require(!p.u_t.empty(), ErrorKind::contract_violation,
          "consistency check needs the time derivative of u");
  const Grid& g = p.grid;
  check_on_grid(gauge.a0.size(), g, "gauge a0");
  const RealField deps = finite_difference(p.eps, g, 1);
  const RealField e = electric_field_static(gauge, g);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (p.flagged[i]) continue;
    const double r = deps[i] - p.u_t[i] + e[i];
    num += p.rho[i] * r * r;
    den += p.rho[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

WaveField reconstruct(const AbsoluteProcess& p, const GaugePotential& gauge,
                      double phase_at_origin, double tolerance) {
  const Grid& g = p.grid;
  check_on_grid(p.u.size(), g, "reconstruct u");
  check_on_grid(gauge.a1.size(), g, "reconstruct a1");
  const double residual = consistency_residual(p, gauge);
  require(residual <= tolerance, ErrorKind::path_dependence,
          "reconstruct: eps and u violate the consistency relation (residual " +
              std::to_string(residual) + "), phase integral is path dependent");

  RealField velocity = p.u;
  fill_flagged(velocity, p.flagged);
  for (std::size_t i = 0; i < g.size(); ++i) velocity[i] += gauge.a1[i];
  // The phase need not be periodic, so integrate with local quadrature.
  const Grid open(g.x_min(), g.x_max(), g.size(), Boundary::dirichlet_zero);
  const RealField phase = antiderivative(velocity, open);

  WaveField w{g, ComplexField(g.size()), p.time, gauge, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i)
    w.psi[i] = std::polar(p.r_amp[i], phase[i] + phase_at_origin);
  return w;
}

WaveField gauge_transform(const WaveField& w, std::span<const double> alpha,
                          std::span<const double> dalpha_dt) {
  check_on_grid(alpha.size(), w.grid, "gauge alpha");
  RealField dalpha_dx;
  if (w.grid.boundary() == Boundary::periodic) {
    // exp(i alpha) must be periodic even when alpha itself winds.
    ComplexField phase(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) phase[i] = std::polar(1.0, alpha[i]);
    const ComplexField d = derivative(std::span<const Complex>(phase), w.grid, 1);
    dalpha_dx.resize(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i)
      dalpha_dx[i] = (std::conj(phase[i]) * d[i]).imag();
  } else {
    dalpha_dx = derivative(alpha, w.grid, 1);
  }
  return gauge_transform(w, alpha, dalpha_dx, dalpha_dt);
}

WaveField gauge_transform(const WaveField& w, std::span<const double> alpha,
                          std::span<const double> dalpha_dx, std::span<const double> dalpha_dt) {
  w.validate();
  check_on_grid(alpha.size(), w.grid, "gauge alpha");
  check_on_grid(dalpha_dx.size(), w.grid, "gauge dalpha_dx");
  check_on_grid(dalpha_dt.size(), w.grid, "gauge dalpha_dt");
  WaveField out = w;
  for (std::size_t i = 0; i < w.grid.size(); ++i) {
    out.psi[i] *= std::polar(1.0, alpha[i]);
    out.gauge.a1[i] += dalpha_dx[i];
    out.gauge.a0[i] -= dalpha_dt[i];
  }
  return out;
}

WaveField boost_transform(const WaveField& w, double v) {
  w.validate();
  if (v == 0.0) return w;
  const Grid& g = w.grid;
  const double t = w.time;
  const double shift = v * t;
  WaveField out = w;
  if (shift != 0.0) {
    out.psi = translate(w.psi, g, shift);
    for (std::size_t i = 0; i < g.size(); ++i) {
      out.gauge.a0[i] = interpolate_cubic(w.gauge.a0, g, g.x(i) + shift);
      out.gauge.a1[i] = interpolate_cubic(w.gauge.a1, g, g.x(i) + shift);
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.psi[i] *= std::polar(1.0, -0.5 * v * v * t - v * g.x(i));
    out.gauge.a0[i] -= v * out.gauge.a1[i];
  }
  out.frame_velocity += v;
  return out;
}

WaveField ray_phase(const WaveField& w, double theta) {
  WaveField out = w;
  const Complex f = std::polar(1.0, theta);
  for (Complex& z : out.psi) z *= f;
  return out;
}

double overlap_magnitude(const WaveField& w1, const WaveField& w2) {
  check_pair(w1, w2, "overlap_magnitude");
  return std::min(1.0, std::abs(inner_product(w1.psi, w2.psi, w1.grid)));
}

double process_distance(const WaveField& w1, const WaveField& w2) {
  return std::acos(overlap_magnitude(w1, w2));
}

ComplexField chart_coordinate(const WaveField& psi0, const WaveField& psi) {
  check_pair(psi0, psi, "chart_coordinate");
  const Complex c = inner_product(psi0.psi, psi.psi, psi0.grid);
  require(std::abs(c) > 1e-12, ErrorKind::chart_domain,
          "chart_coordinate: processes are orthogonal, outside the chart");
  const Complex unit = std::abs(c) / c;
  ComplexField phi(psi.psi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = unit * (psi.psi[i] - c * psi0.psi[i]);
  return phi;
}

double geodesic_length(const WaveField& psi0, const WaveField& psi, int n_steps) {
  require(n_steps >= 1, ErrorKind::contract_violation, "geodesic_length needs n_steps >= 1");
  const ComplexField end = chart_coordinate(psi0, psi);
  const Grid& g = psi0.grid;
  // Curve phi(t) = t * end with velocity end; G-length integrand evaluated
  // from the inner products of phi(t) and its velocity.
  ComplexField phi(end.size());
  auto integrand = [&](double t) {
    for (std::size_t i = 0; i < end.size(); ++i) phi[i] = t * end[i];
    const double speed2 = norm_squared(end, g);
    const double phi2 = norm_squared(phi, g);
    const Complex cross = inner_product(phi, end, g);
    require(phi2 < 1.0, ErrorKind::chart_domain, "geodesic left the chart");
    const double value = speed2 + cross.real() * cross.real() / (1.0 - phi2) -
                         cross.imag() * cross.imag();
    return std::sqrt(std::max(0.0, value));
  };
  const double h = 1.0 / n_steps;
  double sum = 0.5 * (integrand(0.0) + integrand(1.0));
  for (int k = 1; k < n_steps; ++k) sum += integrand(k * h);
  return sum * h;
}

CotensorZ CotensorZ::from(double eps, double u) {
  CotensorZ z;
  z.c[0][0] = eps;
  z.c[1][0] = z.c[0][1] = 0.5 * u;
  z.c[1][1] = -0.5;
  return z;
}

CotensorZ CotensorZ::boosted(double v) const {
  CotensorZ out;
  out.c[0][0] = c[0][0] + v * (c[0][1] + c[1][0]) + 0.5 * v * v * (c[1][1] + c[1][1]);
  out.c[1][0] = c[1][0] + v * c[1][1];
  out.c[0][1] = c[0][1] + v * c[1][1];
  out.c[1][1] = c[1][1];
  return out;
}

CotensorW CotensorW::from(double eps, double u) {
  CotensorW w;
  w.c[0][0][0] = eps;
  w.c[1][0][0] = u;
  w.c[0][1][0] = w.c[0][0][1] = 0.0;
  w.c[1][1][0] = w.c[1][0][1] = -0.5;
  w.c[0][1][1] = 0.5;
  w.c[1][1][1] = 0.0;
  return w;
}

CotensorZ CotensorW::z() const { return CotensorZ::from(eps(), u()); }

double cotensor_boost_check(const AbsoluteProcess& p, double v) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.eps.size(); ++i) {
    if (!p.flagged.empty() && p.flagged[i]) continue;
    const CotensorZ z = CotensorZ::from(p.eps[i], p.u[i]).boosted(v);
    const double eps_expected = p.eps[i] + v * p.u[i] - 0.5 * v * v;
    const double u_expected = p.u[i] - v;
    worst = std::max({worst, std::abs(z.c[0][0] - eps_expected),
                      std::abs(2.0 * z.c[1][0] - u_expected),
                      std::abs(2.0 * z.c[0][1] - u_expected), std::abs(z.c[1][1] + 0.5)});
  }
  return worst;
}

ComplexField gaussian_packet(const Grid& g, double center, double sigma, double k0, double chirp) {
  require(sigma > 0.0, ErrorKind::contract_violation, "gaussian width must be positive");
  ComplexField psi(g.size());
  const double amp = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = g.x(i) - center;
    psi[i] = amp * std::exp(-y * y / (4.0 * sigma * sigma)) * std::polar(1.0, k0 * y + chirp * y * y);
  }
  return psi;
}

void normalize(ComplexField& psi, const Grid& g) {
  const double n2 = norm_squared(psi, g);
  require(n2 > 0.0, ErrorKind::degenerate_input, "cannot normalise a zero field");
  const double s = 1.0 / std::sqrt(n2);
  for (Complex& z : psi) z *= s;
}

ComplexField random_gaussian_mixture(const Grid& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double span = g.length();
  const double mid = 0.5 * (g.x_min() + g.x_max());
  const int components = count(rng);
  ComplexField psi(g.size(), Complex{0.0, 0.0});
  for (int c = 0; c < components; ++c) {
    const double center = mid + (unit(rng) - 0.5) * 0.25 * span;
    const double sigma = 0.5 + 1.0 * unit(rng);
    const double k0 = -2.0 + 4.0 * unit(rng);
    const double chirp = -0.3 + 0.6 * unit(rng);
    const Complex weight = std::polar(0.3 + unit(rng), 2.0 * std::numbers::pi * unit(rng));
    const ComplexField part = gaussian_packet(g, center, sigma, k0, chirp);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += weight * part[i];
  }
  normalize(psi, g);
  return psi;
}

}  // namespace absqm
