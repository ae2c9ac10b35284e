#pragma once

#include <span>
#include <string>
#include <vector>

#include "absqm/wavefield.hpp"

namespace absqm {

// Dimensionless units built from hbar, m and the damping constant k.
struct DissipativeParams {
  // Coefficient of the -j damping term; 0 gives the free particle.
  double damping = 1.0;
  // step_absolute requires dt <= c_stab dx^2.
  double c_stab = 0.1;
  // Relative floor on rho in u = j / rho.
  double rho_floor = 1e-14;
};

struct DissipativeState {
  Grid grid;
  RealField rho;
  RealField j;
  double time = 0.0;

  void validate() const;
};

DissipativeState gaussian_state(const Grid& g, double sigma, double q0, double v0);
DissipativeState state_from_wavefield(const WaveField& w);

// The absolute fields of a state (rho, R, u, j and flags; eps and s are left
// at zero since the state carries no time derivative).
AbsoluteProcess to_process(const DissipativeState& s, double rho_floor = 1e-14);

// Same spacing, `factor` times the length, zero padded symmetrically.
DissipativeState pad_domain(const DissipativeState& s, std::size_t factor = 2);

// One RK4 step of
//   d_t rho = -j',  d_t j = -j + 1/2 (R R'' - R'^2 - 2 rho u^2)'.
// Where rho is below the floor the flux term and j are set to zero (vacuum).
// A step leaving rho below -1e-12 is redone as two half steps.
// The tails must be resolved: dx |(ln rho)'| <= 1 where rho meets the floor.
DissipativeState step_absolute(const DissipativeState& s, double dt,
                               const DissipativeParams& params = {});

// One Strang step of i psi_t = -psi''/2 + S psi with S the unwrapped phase.
// The phase substep is exact: S -> S e^{-damping tau}.
WaveField step_quasiwave(const WaveField& w, double dt, const DissipativeParams& params = {});

struct DissipativeRun {
  std::vector<DissipativeState> snapshots;
  int domain_extensions = 0;
};

// Integrates to t_final with snapshots every snapshot_interval (and at the
// ends). When the edge density reaches edge_limit, or the floor if that is
// lower, the domain is doubled.
DissipativeRun run_absolute(const DissipativeState& s0, double dt, double t_final,
                            double snapshot_interval, const DissipativeParams& params = {},
                            double edge_limit = 1e-10);

std::vector<WaveField> run_quasiwave(const WaveField& w0, double dt, double t_final,
                                     double snapshot_interval,
                                     const DissipativeParams& params = {});

struct DissipativeDiagnostics {
  std::vector<double> t, Q, V, X, Y, T, P, Z, K;
  // Max |lhs - rhs| of X' = 2Y, Y' = -Y + T + P, (T+P)' = -2T at interior
  // snapshots (damping-scaled).
  double xdot_residual = 0.0;
  double ydot_residual = 0.0;
  double tp_residual = 0.0;
  // Largest Z' and smallest Z' + 2Z - 2 at interior snapshots.
  double zdot_max = 0.0;
  double h2a_min = 0.0;
  // Smallest P X - 1/4 and T X - Y^2 over all snapshots.
  double h1_min = 0.0;
  double h2_min = 0.0;
  // Largest increase of K between consecutive snapshots after t_transient.
  double k_increase_max = 0.0;
};

DissipativeDiagnostics diagnostics(std::span<const DissipativeState> traj,
                                   const DissipativeParams& params = {},
                                   double t_transient = 1.0);

struct ExpectationFit {
  double q_deviation = 0.0;
  double v_deviation = 0.0;
};

// Q(t) against Q(0) + V(0)(1 - e^{-t}) and V(t) against V(0) e^{-t} for
// t <= t_max; deviations relative to the largest reference value (absolute
// when the reference stays below 1e-12).
ExpectationFit expectation_laws(const DissipativeDiagnostics& d, double t_max);

struct AsymptoticReport {
  double z_star = 0.0;
  // (max - min) / mean of Z over the last 10 time units.
  double z_drift = 0.0;
  bool inconclusive = false;
  double x2_slope = 0.0;
  double x2_intercept = 0.0;
  double slope_ratio = 0.0;   // x2_slope / z_star
  double k_prefactor = 0.0;   // mean of K sqrt(t) over the window
  double k_ratio = 0.0;       // k_prefactor / (sqrt(z_star) / 8)
  double width_exponent = 0.0;  // log-log slope of sqrt(X)
  double k_exponent = 0.0;      // log-log slope of K
};

AsymptoticReport asymptotics(const DissipativeDiagnostics& d, double t_min = 20.0,
                             double t_max = 60.0);

// Stationary solutions R = c1 e^{c0 x} + c2 e^{-c0 x}.
enum class DivergenceClass { exponential, linear };
const char* to_string(DivergenceClass c) noexcept;

struct StationaryReport {
  std::vector<double> lengths;  // L, 2L, 4L, ...
  std::vector<double> norms;    // N(L) = int_{-L}^{L} R^2
  DivergenceClass divergence = DivergenceClass::linear;
  // exponential: fitted d log N / dL; linear: N(L) / (2L) at the largest L.
  double rate = 0.0;
  bool normalizable = false;
};

StationaryReport stationary_analysis(Complex c0, Complex c1, Complex c2, double L,
                                     int doublings = 6);

}  // namespace absqm
