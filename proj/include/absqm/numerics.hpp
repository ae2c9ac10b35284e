#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "absqm/error.hpp"

namespace absqm {

using Complex = std::complex<double>;
using RealField = std::vector<double>;
using ComplexField = std::vector<Complex>;

enum class Boundary { periodic, dirichlet_zero };

const char* to_string(Boundary b) noexcept;
Boundary boundary_from_string(const std::string& name);

// Uniform sampling of [x_min, x_max) with n cell-centred nodes
// x_i = x_min + (i + 1/2) dx.
class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n, Boundary boundary);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return n_; }
  Boundary boundary() const noexcept { return boundary_; }
  double dx() const noexcept { return (x_max_ - x_min_) / static_cast<double>(n_); }
  double length() const noexcept { return x_max_ - x_min_; }
  double x(std::size_t i) const noexcept {
    return x_min_ + (static_cast<double>(i) + 0.5) * dx();
  }
  RealField points() const;

  // Angular wavenumbers in FFT order; the Nyquist entry carries -pi/dx.
  RealField wavenumbers() const;

  bool operator==(const Grid& other) const noexcept = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  Boundary boundary_;
};

void check_on_grid(std::size_t field_size, const Grid& g, const char* what);

// Spectral on periodic grids; 4th-order finite differences (with one-sided
// closures at the edges) on dirichlet_zero grids.
RealField derivative(std::span<const double> f, const Grid& g, int order);
ComplexField derivative(std::span<const Complex> f, const Grid& g, int order);

// 4th-order finite differences regardless of the grid's boundary mode. Used
// for non-periodic data such as potentials sampled on a periodic grid.
RealField finite_difference(std::span<const double> f, const Grid& g, int order);

double integrate(std::span<const double> f, const Grid& g);
double integrate(std::span<const double> f, const Grid& g, std::span<const double> weight);
Complex integrate(std::span<const Complex> f, const Grid& g);

// <a, b> = integral of conj(a) * b
Complex inner_product(std::span<const Complex> a, std::span<const Complex> b, const Grid& g);
double norm_squared(std::span<const Complex> f, const Grid& g);

// Antiderivative F with F(x_0) = 0. Spectral on periodic grids (the mean of
// f contributes a linear ramp), piecewise-cubic cumulative quadrature on
// dirichlet grids.
RealField antiderivative(std::span<const double> f, const Grid& g);

// Band-limited translation: result(x) = f(x + shift). Periodic grids wrap;
// dirichlet grids treat f as zero outside the domain.
ComplexField translate(std::span<const Complex> f, const Grid& g, double shift);

// Local cubic interpolation of non-periodic data at arbitrary points,
// clamped to the end values outside the sampled range.
double interpolate_cubic(std::span<const double> f, const Grid& g, double x);

// ---- Bessel functions -----------------------------------------------------

enum class BesselKind { J, Y, I, K };

inline constexpr double kBesselMaxOrder = 100.0;
inline constexpr double kBesselMaxArgument = 700.0;

double bessel(BesselKind kind, double order, double x);
double bessel_derivative(BesselKind kind, double order, double x);

// ---- small utilities ------------------------------------------------------

double max_abs(std::span<const double> f);
double l2_norm(std::span<const double> f, const Grid& g);
// L2 norm restricted to points where mask is false.
double l2_norm_masked(std::span<const double> f, const Grid& g, std::span<const unsigned char> excluded);

// Least-squares slope and intercept of y against x.
struct LinearFit {
  double slope;
  double intercept;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace absqm
