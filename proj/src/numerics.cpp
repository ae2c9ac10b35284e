#include "absqm/numerics.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"

namespace absqm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::contract_violation: return "contract violation";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::range: return "range error";
    case ErrorKind::degenerate_input: return "degenerate input";
    case ErrorKind::path_dependence: return "path dependence";
    case ErrorKind::chart_domain: return "chart domain error";
    case ErrorKind::stability: return "stability bound violated";
    case ErrorKind::numerical: return "numerical failure";
    case ErrorKind::branch_not_found: return "branch not found";
    case ErrorKind::not_evanescent: return "interior not evanescent";
    case ErrorKind::unwrap_failure: return "phase unwrap failure";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::config: return "config error";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::assertion: return "assertion failure";
  }
  return "unknown error";
}

const char* to_string(Boundary b) noexcept {
  return b == Boundary::periodic ? "periodic" : "dirichlet_zero";
}

Boundary boundary_from_string(const std::string& name) {
  if (name == "periodic") return Boundary::periodic;
  if (name == "dirichlet_zero" || name == "dirichlet") return Boundary::dirichlet_zero;
  fail(ErrorKind::config, "unknown boundary mode '" + name + "'");
}

Grid::Grid(double x_min, double x_max, std::size_t n, Boundary boundary)
    : x_min_(x_min), x_max_(x_max), n_(n), boundary_(boundary) {
  require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min,
          ErrorKind::contract_violation, "grid requires finite x_max > x_min");
  require(n >= 8, ErrorKind::contract_violation, "grid requires at least 8 points");
}

RealField Grid::points() const {
  RealField xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
  return xs;
}

RealField Grid::wavenumbers() const {
  RealField k(n_);
  const double dk = 2.0 * std::numbers::pi / length();
  const auto half = static_cast<long>(n_ / 2);
  for (std::size_t j = 0; j < n_; ++j) {
    auto m = static_cast<long>(j);
    if (m >= half) m -= static_cast<long>(n_);
    k[j] = dk * static_cast<double>(m);
  }
  return k;
}

void check_on_grid(std::size_t field_size, const Grid& g, const char* what) {
  if (field_size != g.size()) {
    fail(ErrorKind::contract_violation,
         std::string(what) + ": field has " + std::to_string(field_size) +
             " samples but grid has " + std::to_string(g.size()));
  }
}

namespace {

ComplexField spectral_derivative(std::span<const Complex> f, const Grid& g, int order) {
  ComplexField data(f.begin(), f.end());
  detail::fft_forward(data);
  const RealField k = g.wavenumbers();
  const std::size_t n = g.size();
  for (std::size_t j = 0; j < n; ++j) {
    Complex factor{1.0, 0.0};
    for (int o = 0; o < order; ++o) factor *= Complex{0.0, k[j]};
    // The Nyquist mode has no well-defined odd derivative.
    if (n % 2 == 0 && j == n / 2 && order % 2 == 1) factor = 0.0;
    data[j] *= factor;
  }
  detail::fft_inverse(data);
  return data;
}

template <typename T>
std::vector<T> fd_derivative(std::span<const T> f, double h, int order) {
  const std::size_t n = f.size();
  std::vector<T> d(n);
  if (order == 1) {
    const double s = 1.0 / (12.0 * h);
    for (std::size_t i = 2; i + 2 < n; ++i)
      d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * s;
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
    d[n - 1] = -(-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4] -
                 3.0 * f[n - 5]) * s;
    d[n - 2] = -(-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] +
                 f[n - 5]) * s;
  } else {
    const double s = 1.0 / (12.0 * h * h);
    for (std::size_t i = 2; i + 2 < n; ++i)
      d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * s;
    d[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] -
            10.0 * f[5]) * s;
    d[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * s;
    d[n - 1] = (45.0 * f[n - 1] - 154.0 * f[n - 2] + 214.0 * f[n - 3] - 156.0 * f[n - 4] +
                61.0 * f[n - 5] - 10.0 * f[n - 6]) * s;
    d[n - 2] = (10.0 * f[n - 1] - 15.0 * f[n - 2] - 4.0 * f[n - 3] + 14.0 * f[n - 4] -
                6.0 * f[n - 5] + f[n - 6]) * s;
  }
  return d;
}

void check_order(int order) {
  require(order == 1 || order == 2, ErrorKind::contract_violation,
          "derivative order must be 1 or 2");
}

}  // namespace

ComplexField derivative(std::span<const Complex> f, const Grid& g, int order) {
  check_on_grid(f.size(), g, "derivative");
  check_order(order);
  if (g.boundary() == Boundary::periodic) return spectral_derivative(f, g, order);
  return fd_derivative<Complex>(f, g.dx(), order);
}

RealField derivative(std::span<const double> f, const Grid& g, int order) {
  check_on_grid(f.size(), g, "derivative");
  check_order(order);
  if (g.boundary() == Boundary::periodic) {
    ComplexField c(f.begin(), f.end());
    ComplexField d = spectral_derivative(c, g, order);
    RealField out(d.size());
    std::transform(d.begin(), d.end(), out.begin(), [](Complex z) { return z.real(); });
    return out;
  }
  return fd_derivative<double>(f, g.dx(), order);
}

RealField finite_difference(std::span<const double> f, const Grid& g, int order) {
  check_on_grid(f.size(), g, "finite_difference");
  check_order(order);
  return fd_derivative<double>(f, g.dx(), order);
}

double integrate(std::span<const double> f, const Grid& g) {
  check_on_grid(f.size(), g, "integrate");
  double sum = 0.0;
  for (double v : f) sum += v;
  return sum * g.dx();
}

double integrate(std::span<const double> f, const Grid& g, std::span<const double> weight) {
  check_on_grid(f.size(), g, "integrate");
  check_on_grid(weight.size(), g, "integrate weight");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * weight[i];
  return sum * g.dx();
}

Complex integrate(std::span<const Complex> f, const Grid& g) {
  check_on_grid(f.size(), g, "integrate");
  Complex sum{0.0, 0.0};
  for (Complex v : f) sum += v;
  return sum * g.dx();
}

Complex inner_product(std::span<const Complex> a, std::span<const Complex> b, const Grid& g) {
  check_on_grid(a.size(), g, "inner_product");
  check_on_grid(b.size(), g, "inner_product");
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum * g.dx();
}

double norm_squared(std::span<const Complex> f, const Grid& g) {
  check_on_grid(f.size(), g, "norm_squared");
  double sum = 0.0;
  for (Complex v : f) sum += std::norm(v);
  return sum * g.dx();
}

RealField antiderivative(std::span<const double> f, const Grid& g) {
  check_on_grid(f.size(), g, "antiderivative");
  const std::size_t n = g.size();
  RealField out(n, 0.0);
  const double h = g.dx();
  if (g.boundary() == Boundary::periodic) {
    double mean = 0.0;
    for (double v : f) mean += v;
    mean /= static_cast<double>(n);
    ComplexField data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = f[i] - mean;
    detail::fft_forward(data);
    const RealField k = g.wavenumbers();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == 0 || (n % 2 == 0 && j == n / 2)) {
        data[j] = 0.0;
      } else {
        data[j] /= Complex{0.0, k[j]};
      }
    }
    detail::fft_inverse(data);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = data[i].real() - data[0].real() + mean * (g.x(i) - g.x(0));
    return out;
  }
  // Piecewise cubic through four neighbouring samples on every interval.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double piece;
    if (i == 0) {
      piece = 9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3];
    } else if (i + 2 == n) {
      piece = f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1];
    } else {
      piece = -f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2];
    }
    out[i + 1] = out[i] + piece * h / 24.0;
  }
  return out;
}

ComplexField translate(std::span<const Complex> f, const Grid& g, double shift) {
  check_on_grid(f.size(), g, "translate");
  const std::size_t n = g.size();
  if (g.boundary() == Boundary::periodic) {
    ComplexField data(f.begin(), f.end());
    detail::fft_forward(data);
    const RealField k = g.wavenumbers();
    for (std::size_t j = 0; j < n; ++j) data[j] *= std::polar(1.0, k[j] * shift);
    detail::fft_inverse(data);
    return data;
  }
  require(std::abs(shift) <= g.length(), ErrorKind::range,
          "translation exceeds the extent of a dirichlet grid");
  // Zero-pad to twice the extent so the periodic image never wraps into view.
  const Grid padded(g.x_min(), g.x_min() + 2.0 * g.length(), 2 * n, Boundary::periodic);
  ComplexField data(2 * n, Complex{0.0, 0.0});
  std::copy(f.begin(), f.end(), data.begin());
  detail::fft_forward(data);
  const RealField k = padded.wavenumbers();
  for (std::size_t j = 0; j < 2 * n; ++j) data[j] *= std::polar(1.0, k[j] * shift);
  detail::fft_inverse(data);
  data.resize(n);
  return data;
}

double interpolate_cubic(std::span<const double> f, const Grid& g, double x) {
  check_on_grid(f.size(), g, "interpolate_cubic");
  const std::size_t n = g.size();
  const double s = (x - g.x(0)) / g.dx();
  if (s <= 0.0) return f[0];
  if (s >= static_cast<double>(n - 1)) return f[n - 1];
  auto i = static_cast<long>(std::floor(s));
  long start = std::clamp(i - 1, 0L, static_cast<long>(n) - 4);
  double result = 0.0;
  for (long a = 0; a < 4; ++a) {
    double basis = 1.0;
    for (long b = 0; b < 4; ++b) {
      if (a == b) continue;
      basis *= (s - static_cast<double>(start + b)) / static_cast<double>(a - b);
    }
    result += basis * f[static_cast<std::size_t>(start + a)];
  }
  return result;
}

// ---- Bessel ---------------------------------------------------------------

namespace {

const char* kind_name(BesselKind kind) {
  switch (kind) {
    case BesselKind::J: return "J";
    case BesselKind::Y: return "Y";
    case BesselKind::I: return "I";
    case BesselKind::K: return "K";
  }
  return "?";
}

double bessel_unchecked(BesselKind kind, double order, double x) {
  try {
    switch (kind) {
      case BesselKind::J: return boost::math::cyl_bessel_j(order, x);
      case BesselKind::Y: return boost::math::cyl_neumann(order, x);
      case BesselKind::I: return boost::math::cyl_bessel_i(order, x);
      case BesselKind::K: return boost::math::cyl_bessel_k(order, x);
    }
  } catch (const std::overflow_error& e) {
    fail(ErrorKind::range, std::string("bessel ") + kind_name(kind) + " overflow: " + e.what());
  } catch (const std::exception& e) {
    fail(ErrorKind::range, std::string("bessel ") + kind_name(kind) + ": " + e.what());
  }
  return 0.0;
}

void check_bessel_args(BesselKind kind, double order, double x) {
  require(std::isfinite(order) && std::isfinite(x), ErrorKind::domain,
          "bessel arguments must be finite");
  require(order >= 0.0, ErrorKind::domain, "bessel order must be non-negative");
  require(order <= kBesselMaxOrder, ErrorKind::range,
          "bessel order above supported maximum " + std::to_string(kBesselMaxOrder));
  require(x <= kBesselMaxArgument, ErrorKind::range,
          "bessel argument above supported maximum " + std::to_string(kBesselMaxArgument));
  if (kind == BesselKind::Y || kind == BesselKind::K) {
    require(x > 0.0, ErrorKind::domain, std::string("bessel ") + kind_name(kind) +
                                            " is singular at x <= 0");
  } else {
    require(x >= 0.0, ErrorKind::domain,
            std::string("bessel ") + kind_name(kind) + " requires x >= 0");
  }
}

}  // namespace

double bessel(BesselKind kind, double order, double x) {
  check_bessel_args(kind, order, x);
  if (x == 0.0) return order == 0.0 ? 1.0 : 0.0;
  const double value = bessel_unchecked(kind, order, x);
  require(std::isfinite(value), ErrorKind::range,
          std::string("bessel ") + kind_name(kind) + " not representable");
  return value;
}

double bessel_derivative(BesselKind kind, double order, double x) {
  check_bessel_args(kind, order, x);
  require(x > 0.0, ErrorKind::domain, "bessel derivative requires x > 0");
  const double f = bessel_unchecked(kind, order, x);
  const double next = bessel_unchecked(kind, order + 1.0, x);
  switch (kind) {
    case BesselKind::J:
    case BesselKind::Y:
    case BesselKind::K:
      return order / x * f - next;
    case BesselKind::I:
      return next + order / x * f;
  }
  return 0.0;
}

// ---- utilities --------------------------------------------------------------

double max_abs(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

double l2_norm(std::span<const double> f, const Grid& g) {
  check_on_grid(f.size(), g, "l2_norm");
  double sum = 0.0;
  for (double v : f) sum += v * v;
  return std::sqrt(sum * g.dx());
}

double l2_norm_masked(std::span<const double> f, const Grid& g,
                      std::span<const unsigned char> excluded) {
  check_on_grid(f.size(), g, "l2_norm_masked");
  check_on_grid(excluded.size(), g, "l2_norm_masked mask");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!excluded[i]) sum += f[i] * f[i];
  return std::sqrt(sum * g.dx());
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::insufficient_data,
          "line fit needs at least two matched points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::degenerate_input, "line fit with constant abscissa");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace absqm
