#pragma once

#include <functional>
#include <vector>

#include "absqm/wavefield.hpp"

namespace absqm {

enum class NonlinearKind { none, nls, log_bbm, custom_density, custom_phase };

// Process-dependent scalar term K0 entering the Hamiltonian as +K0 psi.
struct NonlinearTerm {
  NonlinearKind kind = NonlinearKind::none;
  double k = 0.0;
  double k1 = 0.0;
  double k2 = 1.0;
  // Pointwise K0(rho) or K0(S) for the custom kinds.
  std::function<double(double)> custom;

  static NonlinearTerm none() { return {}; }
  static NonlinearTerm nls(double k) { return {NonlinearKind::nls, k}; }
  static NonlinearTerm log_bbm(double k1, double k2) {
    return {NonlinearKind::log_bbm, 0.0, k1, k2};
  }
  static NonlinearTerm of_density(std::function<double(double)> f) {
    return {NonlinearKind::custom_density, 0.0, 0.0, 1.0, std::move(f)};
  }
  static NonlinearTerm of_phase(std::function<double(double)> f) {
    return {NonlinearKind::custom_phase, 0.0, 0.0, 1.0, std::move(f)};
  }
};

struct EvolutionSpec {
  // a0 is the potential energy, a1 the vector potential; both static. On
  // periodic grids a1 must itself be periodic.
  GaugePotential potential;
  NonlinearTerm nonlinear;
  double dt = 1e-3;
  double t_final = 0.0;
  double rho_floor = kDefaultRhoFloor;
};

struct Trajectory {
  std::vector<WaveField> snapshots;
  // dpsi/dt from the evolution equation at each snapshot.
  std::vector<ComplexField> rhs;

  std::size_t size() const noexcept { return snapshots.size(); }
  std::vector<double> times() const;
};

// Largest dt accepted by the implicit scheme on dirichlet grids.
double stability_limit(const Grid& g);

RealField nonlinear_potential(const WaveField& w, const EvolutionSpec& spec);

// dpsi/dt = i[ (1/2)(d_x - i a1)^2 psi - a0 psi - K0 psi ]
ComplexField rhs(const WaveField& w, const EvolutionSpec& spec);

// Strang splitting on periodic grids, implicit midpoint on dirichlet grids.
// Snapshots at step 0, every snapshot_every steps, and at t_final. The step
// count is ceil(t_final / dt) with dt shrunk to land on t_final exactly.
Trajectory evolve(const WaveField& w0, const EvolutionSpec& spec, int snapshot_every);

}  // namespace absqm
