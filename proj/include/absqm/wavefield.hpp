#pragma once

#include <array>
#include <random>
#include <span>
#include <vector>

#include "absqm/numerics.hpp"

namespace absqm {

// Relative floor below which |psi|^2 (compared to its maximum) is treated as a
// node: phase-derived quantities there are flagged and excluded from norms.
inline constexpr double kDefaultRhoFloor = 1e-12;

// a0 is the scalar potential (potential energy per unit charge, entering the
// Hamiltonian as +a0), a1 the vector potential. Units hbar = m = e = 1.
struct GaugePotential {
  RealField a0;
  RealField a1;

  static GaugePotential zero(const Grid& g) {
    return {RealField(g.size(), 0.0), RealField(g.size(), 0.0)};
  }
};

struct WaveField {
  Grid grid;
  ComplexField psi;
  double time = 0.0;
  GaugePotential gauge;
  // Velocity of the describing frame relative to the fiducial frame.
  double frame_velocity = 0.0;

  // Zero gauge, fiducial frame.
  static WaveField make(const Grid& g, ComplexField psi, double time = 0.0);
  void validate() const;
};

// The frame- and gauge-free fields of one instant.
struct AbsoluteProcess {
  Grid grid;
  double time = 0.0;
  RealField rho;
  RealField r_amp;
  RealField u;
  RealField eps;
  RealField s;
  RealField j;
  // Nonzero where rho is below the node floor.
  std::vector<unsigned char> flagged;
  // Time derivatives of rho and u, filled when derived from a known dpsi/dt
  // (static vector potential assumed); empty otherwise.
  RealField rho_t;
  RealField u_t;
};

struct PolarDecomposition {
  RealField r_amp;
  RealField phase;
  std::vector<unsigned char> flagged;
  // Flagged points lying strictly between the outermost unflagged points.
  std::size_t interior_flagged = 0;
  std::size_t hull_size = 0;
};

PolarDecomposition polar_decompose(const WaveField& w, double rho_floor = kDefaultRhoFloor);

AbsoluteProcess extract_absolute(const WaveField& w, std::span<const Complex> dpsi_dt,
                                 double rho_floor = kDefaultRhoFloor);

// Rebuilds psi from (R, u) by integrating the phase along the grid at fixed
// time. Refuses when the time-consistency relation between eps and u fails.
WaveField reconstruct(const AbsoluteProcess& p, const GaugePotential& gauge,
                      double phase_at_origin = 0.0, double tolerance = 1e-6);

// sqrt( sum rho (a - b)^2 / sum rho ) over the unflagged points of p.
double weighted_rms_difference(const AbsoluteProcess& p, std::span<const double> a,
                               std::span<const double> b);

// rho-weighted L2 norm of d_x eps - d_t u + E over unflagged points.
double consistency_residual(const AbsoluteProcess& p, const GaugePotential& gauge);

WaveField gauge_transform(const WaveField& w, std::span<const double> alpha,
                          std::span<const double> dalpha_dt);
WaveField gauge_transform(const WaveField& w, std::span<const double> alpha,
                          std::span<const double> dalpha_dx, std::span<const double> dalpha_dt);

WaveField boost_transform(const WaveField& w, double v);

// psi -> exp(i theta) psi
WaveField ray_phase(const WaveField& w, double theta);

double overlap_magnitude(const WaveField& w1, const WaveField& w2);
double process_distance(const WaveField& w1, const WaveField& w2);
ComplexField chart_coordinate(const WaveField& psi0, const WaveField& psi);
double geodesic_length(const WaveField& psi0, const WaveField& psi, int n_steps);

// Two-cotensor z built from (eps, u) in one space dimension.
struct CotensorZ {
  std::array<std::array<double, 2>, 2> c{};

  static CotensorZ from(double eps, double u);
  CotensorZ boosted(double v) const;
};

// Three-cotensor w of one point; index 0 is timelike, 1 spacelike.
struct CotensorW {
  std::array<std::array<std::array<double, 2>, 2>, 2> c{};

  static CotensorW from(double eps, double u);
  double eps() const noexcept { return c[0][0][0]; }
  double u() const noexcept { return c[1][0][0]; }
  CotensorZ z() const;
};

// Max deviation of the transformed z components from the closed-form boost
// rules eps' = eps + v u - v^2/2, u' = u - v (unflagged points only).
double cotensor_boost_check(const AbsoluteProcess& p, double v);

// ---- state builders -------------------------------------------------------

// Normalised Gaussian with density variance sigma^2, mean momentum k0 and
// quadratic phase chirp * (x - center)^2.
ComplexField gaussian_packet(const Grid& g, double center, double sigma, double k0,
                             double chirp = 0.0);

void normalize(ComplexField& psi, const Grid& g);

// Normalised mixture of 1-3 random Gaussians (random centres, widths, momenta,
// chirps and complex weights) kept well inside the domain.
ComplexField random_gaussian_mixture(const Grid& g, std::mt19937_64& rng);

}  // namespace absqm
