#pragma once

#include <span>
#include <vector>

#include "absqm/schrodinger.hpp"

namespace absqm {

// Where time derivatives of the absolute fields come from: finite
// differences across snapshots, or the stored evolution right-hand side.
enum class TimeDifferencing { centered, stored };

// One AbsoluteProcess per snapshot. In centered mode dpsi/dt is itself taken
// from second-order differences of the snapshots (one-sided at the ends).
std::vector<AbsoluteProcess> extract_trajectory(const Trajectory& traj, TimeDifferencing mode,
                                                double rho_floor = kDefaultRhoFloor);

struct ResidualSeries {
  std::vector<double> times;
  std::vector<double> values;

  double max() const;
};

// s R + R''/2, pointwise.
RealField residual_mass_shell(const AbsoluteProcess& p);
// L2 norm of the above over unflagged points.
double mass_shell_norm(const AbsoluteProcess& p);
ResidualSeries residual_mass_shell(std::span<const AbsoluteProcess> procs);

// ||d_t rho + d_x j|| per snapshot (interior snapshots in centered mode).
ResidualSeries residual_continuity(std::span<const AbsoluteProcess> procs, TimeDifferencing mode);

// ||d_t u + u d_x u + d_x s - E|| per snapshot (interior snapshots in
// centered mode), over points whose derivative stencils avoid flagged points.
ResidualSeries residual_force(std::span<const AbsoluteProcess> procs, std::span<const double> e_field,
                              TimeDifferencing mode);

// Electric field of static potentials: -d_x a0.
RealField static_electric_field(const GaugePotential& gauge, const Grid& g);

struct CotensorField {
  std::vector<CotensorW> w;
  RealField rho;

  // W = rho w integrated over the grid.
  CotensorW integrated(const Grid& g) const;
};

CotensorField build_cotensor(const AbsoluteProcess& p);
void recover_fields(const CotensorField& c, RealField& eps, RealField& u);

}  // namespace absqm
