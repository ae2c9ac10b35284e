#pragma once

#include <span>
#include <vector>

#include "absqm/numerics.hpp"

namespace absqm {

// Infinite cylinder of radius b carrying a uniform field B0. Inside, the
// scalar potential is phi0 - B0^2 r^2 / 8; outside it is zero. The system is
// closed by a hard wall at r_out.
struct ABConfig {
  double b = 1.0;
  double B0 = 0.0;
  double C1 = 0.0;
  double uz = 0.0;
  double phi0 = 10.0;
  double r_out = 5.0;
  int n_r = 400;

  double c2() const noexcept { return C1 + 0.5 * B0 * b * b; }
  void validate() const;
};

// B0 r / 2 + C1 / r inside, C2 / r outside.
double u_theta_profile(const ABConfig& cfg, double r);

struct RadialABSolution {
  double E = 0.0;
  double kappa = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  // R = C3 I_mu(kappa r) inside, C5 J_nu(lambda r) + C6 Y_nu(lambda r) outside.
  double C3 = 0.0;
  double C5 = 0.0;
  double C6 = 0.0;
  // Samples r_i = (i + 1) r_out / n_r.
  RealField r;
  RealField R;
  RealField u_theta;
  double interior_mass = 0.0;
  // Width in E of the final bisection bracket and the normalized matching
  // determinant there.
  double bracket_width = 0.0;
  double determinant = 0.0;
  // R(b+) - R(b-) and R'(b+) - R'(b-).
  double value_jump = 0.0;
  double slope_jump = 0.0;
};

RadialABSolution solve_radial(const ABConfig& cfg, int branch);

// R and R' of a solution at any 0 < r.
double radial_amplitude(const RadialABSolution& s, const ABConfig& cfg, double r);
double radial_slope(const RadialABSolution& s, const ABConfig& cfg, double r);

// Largest |R'' + R'/r - (u_theta^2 + uz^2 - 2(E - phi)) R| / max|R| over the
// radial samples, with 5-point differences of step 0.01 / max(k, 1), k = kappa
// inside and lambda outside (at most r / 100, since R ~ r^mu near the axis).
// Samples within two steps of b are skipped (phi jumps there).
double radial_residual(const RadialABSolution& s, const ABConfig& cfg);

struct WallSweepRow {
  double phi0 = 0.0;
  double E = 0.0;
  double kappa = 0.0;
  double interior_mass = 0.0;
  double max_interior_R = 0.0;
  RealField u_theta_interior;
};

struct WallSweepReport {
  RealField interior_r;  // where u_theta_interior is sampled
  std::vector<WallSweepRow> rows;
  bool u_theta_identical = false;
  bool mass_decreasing = false;
  // Slope of log(interior_mass) against log(kappa).
  double mass_exponent = 0.0;
};

WallSweepReport wall_sweep(const ABConfig& base, std::span<const double> phi0_ladder, int branch = 0);

}  // namespace absqm
