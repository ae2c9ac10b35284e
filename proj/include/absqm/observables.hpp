#pragma once

#include <functional>
#include <span>
#include <vector>

#include "absqm/wavefield.hpp"

namespace absqm {

struct MomentReport {
  double time = 0.0;
  double Q = 0.0;
  double V = 0.0;
  double K = 0.0;
  double varQ = 0.0;
  double varV = 0.0;
  double T = 0.0;
  double P = 0.0;
  double Y = 0.0;
};

// Edge density above which the dropped surface terms are no longer negligible.
inline constexpr double kEdgeDensityLimit = 1e-10;

// Moments of a normalised process. K = -<eps>, T = <(u - V)^2>,
// P = int (R')^2 with R'^2 = rho'^2 / (4 rho), varV = T + P.
// Flagged points are left out of T and P.
MomentReport moments(const AbsoluteProcess& p, double edge_limit = kEdgeDensityLimit);

// lhs - rhs of each inequality; all are >= 0 for a valid state.
struct UncertaintyMargins {
  double hat1 = 0.0;       // varQ varV - 1/4 - varQ T
  double hat2 = 0.0;       // varQ varV - Y^2 - varQ P
  double hat3 = 0.0;       // varQ varV - 1/4 - Y^2
  double classical = 0.0;  // varQ varV - 1/4

  bool all_hold(double tolerance = 1e-9) const;
};

UncertaintyMargins uncertainty_report(const MomentReport& m);

// Force per unit mass as a function of position and local velocity.
using ForceLaw = std::function<double(double x, double u)>;

struct EhrenfestReport {
  std::vector<double> times;          // interior snapshots
  std::vector<double> dq_dt;          // from differences of Q
  std::vector<double> mean_velocity;  // V
  std::vector<double> d2q_dt2;
  std::vector<double> mean_force;     // int rho F(x, u)
  double velocity_deviation = 0.0;
  double acceleration_deviation = 0.0;
};

// Compares dQ/dt with V and d2Q/dt2 with the mean force at interior
// snapshots (3-point differences, nonuniform spacing allowed). Deviations are
// max |a - b| divided by the largest |b| in the series, or absolute when that
// is zero.
EhrenfestReport ehrenfest_check(std::span<const AbsoluteProcess> procs, const ForceLaw& force);

}  // namespace absqm
