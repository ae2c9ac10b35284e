#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "absqm/absolute.hpp"
#include "absqm/wavefield.hpp"

namespace absqm {

// Klein-Gordon field in 1+1 dimensions with metric diag(1, -1/c^2):
// (d_t + i a0)^2 psi = c^2 (d_x - i a1)^2 psi - c^4 psi, static potentials,
// periodic grids only. a0 enters as a potential energy, so the covariant
// components are A_t = -a0, A_x = a1.
struct KGField {
  Grid grid;
  ComplexField psi;
  ComplexField dpsi_dt;
  double time = 0.0;
  double c = 1.0;
  GaugePotential gauge;

  void validate() const;
};

// psi = e^{-i c^2 t} phi and dpsi/dt = e^{-i c^2 t} (-i c^2 phi + dphi/dt),
// with dphi/dt the Schrodinger right-hand side of the envelope phi = w.psi.
KGField kg_from_envelope(const WaveField& w, double c);

// Largest dt accepted by kg_step: dt <= dx / c and the leapfrog bound for the
// fastest grid mode.
double kg_max_dt(const Grid& g, double c, const GaugePotential& gauge);

// -(1/c^2) integral of rho u0, close to 1 for a normalised slow envelope.
double kg_charge(const KGField& f);

struct KGTrajectory {
  std::vector<KGField> snapshots;

  std::size_t size() const noexcept { return snapshots.size(); }
};

// Leapfrog on the envelope phi = e^{i c^2 t} psi, centred in time also for
// the first-order term, started by a third-order Taylor step. dpsi/dt at a
// snapshot (step 0 included) is rebuilt from the neighbouring levels so that
// kg_charge returns the scheme's exact discrete invariant.
// Snapshots at step 0, every snapshot_every steps and at t_final.
KGTrajectory kg_evolve(const KGField& f0, double dt, double t_final, int snapshot_every);

KGField kg_step(const KGField& f, double dt);

struct KGAbsolute {
  Grid grid;
  double time = 0.0;
  double c = 1.0;
  RealField rho;
  RealField r_amp;
  RealField u0;
  RealField u1;
  // u0 + c^2
  RealField eps;
  std::vector<unsigned char> flagged;
};

// u_t = Im(psi* d_t psi) / rho + a0, u_x = Im(psi* d_x psi) / rho - a1.
KGAbsolute kg_extract(const KGField& f, double rho_floor = kDefaultRhoFloor);

struct KGResidualReport {
  // R (d_t u1 - d_x u0 + d_x a0), static potentials
  ResidualSeries rel1;
  // c^4 R - g^{kl} u_k u_l R + g^{kl} d_k d_l R
  ResidualSeries rel2;
  // d_t (rho u0) - c^2 d_x (rho u1)
  ResidualSeries rel3;
};

// L2 norms over unflagged points at interior snapshots (equal spacing
// required); time derivatives by centred differences across snapshots.
KGResidualReport kg_residuals(std::span<const KGField> traj, double rho_floor = kDefaultRhoFloor);

struct NRLimitSpec {
  // A multiple of pi / c^2 for every c in {5, 10, 20, 40}: the beat between
  // the two frequency branches is then in phase along the ladder.
  double t = 8.0 * std::numbers::pi / 25.0;
  // The KG step is dt = min(dt_c2 / c^2, 0.5 dx / c).
  double dt_c2 = 2e-3;
  double nr_dt = 1e-4;
  // k_max must not exceed this fraction of c.
  double bandwidth_fraction = 0.5;
  double rho_floor = kDefaultRhoFloor;
};

struct NRLimitRow {
  double c = 0.0;
  double dt = 0.0;
  // sqrt(||rho_KG - rho||^2 + ||u1 - u||_rho^2 + ||eps_KG - eps||_rho^2)
  double distance = 0.0;
  double rho_distance = 0.0;
  double u_distance = 0.0;
  double eps_distance = 0.0;
  // ||eps_KG - eps||_rho / ||eps||_rho
  double eps_relative = 0.0;
};

struct NRLimitReport {
  // |<k>| + 5 rms spread of the envelope spectrum.
  double k_max = 0.0;
  std::vector<NRLimitRow> rows;
  // -slope of log D against log c
  double exponent = 0.0;
  bool monotone = false;
};

NRLimitReport nr_limit_compare(const WaveField& envelope, std::span<const double> c_ladder,
                               const NRLimitSpec& spec = {});

double envelope_bandwidth(const WaveField& w);

}  // namespace absqm
