#include "absqm/schrodinger.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "peierls.hpp"

namespace absqm {

namespace {

using SparseMatrix = Eigen::SparseMatrix<Complex>;
using detail::PeierlsFactor;
using Vector = Eigen::VectorXcd;

constexpr Complex kI{0.0, 1.0};

EvolutionSpec completed(const EvolutionSpec& spec, const Grid& g) {
  EvolutionSpec out = spec;
  if (out.potential.a0.empty()) out.potential.a0.assign(g.size(), 0.0);
  if (out.potential.a1.empty()) out.potential.a1.assign(g.size(), 0.0);
  check_on_grid(out.potential.a0.size(), g, "evolution a0");
  check_on_grid(out.potential.a1.size(), g, "evolution a1");
  require(out.rho_floor > 0.0, ErrorKind::contract_violation, "rho_floor must be positive");
  return out;
}

// Hermitian 4th-order operator with zero ghost values beyond both ends:
// H = 1/2 [ -D2 + i (D1 A + A D1) + A^2 ] + a0.
SparseMatrix dirichlet_hamiltonian(const Grid& g, const GaugePotential& pot) {
  const std::size_t n = g.size();
  const double h = g.dx();
  const double d1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  const double d2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(5 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int o = -2; o <= 2; ++o) {
      const long jj = static_cast<long>(i) + o;
      if (jj < 0 || jj >= static_cast<long>(n)) continue;
      const std::size_t j = static_cast<std::size_t>(jj);
      const double lap = d2[o + 2] / (h * h);
      const double grad = d1[o + 2] / h;
      Complex value = -0.5 * lap + 0.5 * kI * grad * (pot.a1[j] + pot.a1[i]);
      if (o == 0) value += 0.5 * pot.a1[i] * pot.a1[i] + pot.a0[i];
      if (value != Complex{}) entries.emplace_back(static_cast<int>(i), static_cast<int>(j), value);
    }
  }
  SparseMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

Vector as_vector(const ComplexField& f) {
  return Eigen::Map<const Vector>(f.data(), static_cast<Eigen::Index>(f.size()));
}

ComplexField as_field(const Vector& v) { return ComplexField(v.data(), v.data() + v.size()); }

WaveField with_psi(const Grid& g, ComplexField psi, double t, const EvolutionSpec& spec,
                   double frame_velocity) {
  return WaveField{g, std::move(psi), t, spec.potential, frame_velocity};
}

void check_finite(const ComplexField& psi) {
  for (Complex z : psi)
    require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorKind::numerical,
            "evolution produced non-finite values");
}

}  // namespace

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(snapshots.size());
  for (const WaveField& w : snapshots) t.push_back(w.time);
  return t;
}

double stability_limit(const Grid& g) { return g.dx() * g.dx() / std::numbers::pi; }

RealField nonlinear_potential(const WaveField& w, const EvolutionSpec& spec) {
  const std::size_t n = w.psi.size();
  RealField k0(n, 0.0);
  const NonlinearTerm& t = spec.nonlinear;
  switch (t.kind) {
    case NonlinearKind::none:
      break;
    case NonlinearKind::nls:
      for (std::size_t i = 0; i < n; ++i) k0[i] = t.k * std::norm(w.psi[i]);
      break;
    case NonlinearKind::log_bbm: {
      double max_rho = 0.0;
      for (Complex z : w.psi) max_rho = std::max(max_rho, std::norm(z));
      const double floor_amp = std::sqrt(spec.rho_floor * max_rho);
      for (std::size_t i = 0; i < n; ++i)
        k0[i] = t.k1 * std::log(t.k2 * std::max(std::abs(w.psi[i]), floor_amp));
      break;
    }
    case NonlinearKind::custom_density:
      require(static_cast<bool>(t.custom), ErrorKind::contract_violation, "custom K0 missing");
      for (std::size_t i = 0; i < n; ++i) k0[i] = t.custom(std::norm(w.psi[i]));
      break;
    case NonlinearKind::custom_phase: {
      require(static_cast<bool>(t.custom), ErrorKind::contract_violation, "custom K0 missing");
      const PolarDecomposition pd = polar_decompose(w, spec.rho_floor);
      for (std::size_t i = 0; i < n; ++i) k0[i] = t.custom(pd.phase[i]);
      break;
    }
  }
  return k0;
}

ComplexField rhs(const WaveField& w, const EvolutionSpec& spec_in) {
  const Grid& g = w.grid;
  check_on_grid(w.psi.size(), g, "rhs psi");
  const EvolutionSpec spec = completed(spec_in, g);
  const RealField k0 = nonlinear_potential(w, spec);
  ComplexField out;
  if (g.boundary() == Boundary::periodic) {
    const PeierlsFactor peierls(g, spec.potential.a1);
    out = w.psi;
    // (1/2)(d - i a1)^2 -> -(k - abar)^2 / 2
    peierls.apply(out, [](double k2) { return Complex(-0.5 * k2, 0.0); });
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = kI * (out[i] - (spec.potential.a0[i] + k0[i]) * w.psi[i]);
  } else {
    const SparseMatrix h = dirichlet_hamiltonian(g, spec.potential);
    Vector hv = h * as_vector(w.psi);
    out.resize(w.psi.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -kI * (hv[i] + k0[i] * w.psi[i]);
  }
  return out;
}

Trajectory evolve(const WaveField& w0, const EvolutionSpec& spec_in, int snapshot_every) {
  w0.validate();
  const Grid& g = w0.grid;
  const EvolutionSpec spec = completed(spec_in, g);
  require(spec.dt > 0.0, ErrorKind::contract_violation, "dt must be positive");
  require(spec.t_final >= 0.0, ErrorKind::contract_violation, "t_final must be non-negative");
  require(snapshot_every >= 1, ErrorKind::contract_violation, "snapshot_every must be >= 1");
  const double n2 = norm_squared(w0.psi, g);
  require(std::abs(n2 - 1.0) <= 1e-6, ErrorKind::contract_violation,
          "evolve: initial state not normalised");
  if (g.boundary() == Boundary::dirichlet_zero) {
    const double limit = stability_limit(g);
    require(spec.dt <= limit, ErrorKind::stability,
            "dt = " + std::to_string(spec.dt) + " exceeds the stability bound dx^2/pi; use dt <= " +
                std::to_string(limit));
  }

  const long steps = std::max(0L, static_cast<long>(std::ceil(spec.t_final / spec.dt - 1e-9)));
  const double dt = steps > 0 ? spec.t_final / static_cast<double>(steps) : spec.dt;

  Trajectory traj;
  ComplexField psi = w0.psi;
  double t = w0.time;
  auto record = [&]() {
    WaveField w = with_psi(g, psi, t, spec, w0.frame_velocity);
    traj.rhs.push_back(rhs(w, spec));
    traj.snapshots.push_back(std::move(w));
  };
  record();

  const bool linear = spec.nonlinear.kind == NonlinearKind::none;
  if (g.boundary() == Boundary::periodic) {
    const PeierlsFactor peierls(g, spec.potential.a1);
    ComplexField kinetic(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      kinetic[i] = std::polar(1.0, -0.5 * peierls.shifted_k2[i] * dt);
    auto potential_half_step = [&]() {
      RealField k0 = linear ? RealField(g.size(), 0.0)
                            : nonlinear_potential(with_psi(g, psi, t, spec, 0.0), spec);
      for (std::size_t i = 0; i < psi.size(); ++i)
        psi[i] *= std::polar(1.0, -(spec.potential.a0[i] + k0[i]) * 0.5 * dt);
    };
    for (long s = 1; s <= steps; ++s) {
      potential_half_step();
      std::size_t idx = 0;
      peierls.apply(psi, [&](double) { return kinetic[idx++]; });
      potential_half_step();
      t = w0.time + static_cast<double>(s) * dt;
      if (s % snapshot_every == 0 || s == steps) {
        check_finite(psi);
        record();
      }
    }
  } else {
    const SparseMatrix h = dirichlet_hamiltonian(g, spec.potential);
    SparseMatrix identity(h.rows(), h.cols());
    identity.setIdentity();
    const SparseMatrix lhs = identity + (0.5 * dt * kI) * h;
    const SparseMatrix explicit_part = identity - (0.5 * dt * kI) * h;
    Eigen::SparseLU<SparseMatrix> solver;
    solver.compute(lhs);
    require(solver.info() == Eigen::Success, ErrorKind::numerical,
            "implicit midpoint factorisation failed");
    for (long s = 1; s <= steps; ++s) {
      const Vector current = as_vector(psi);
      const Vector base = explicit_part * current;
      Vector next = solver.solve(base);
      if (!linear) {
        int iter = 0;
        for (;; ++iter) {
          require(iter < 100, ErrorKind::numerical,
                  "nonlinear midpoint iteration did not converge; reduce dt");
          const ComplexField mid = as_field(0.5 * (current + next));
          const RealField k0 = nonlinear_potential(with_psi(g, mid, t, spec, 0.0), spec);
          Vector b = base;
          for (Eigen::Index i = 0; i < b.size(); ++i)
            b[i] -= kI * dt * k0[static_cast<std::size_t>(i)] * mid[static_cast<std::size_t>(i)];
          const Vector update = solver.solve(b);
          const double change = (update - next).norm();
          next = update;
          if (change <= 1e-14 * next.norm()) break;
        }
      }
      psi = as_field(next);
      t = w0.time + static_cast<double>(s) * dt;
      if (s % snapshot_every == 0 || s == steps) {
        check_finite(psi);
        record();
      }
    }
  }
  return traj;
}

}  // namespace absqm
