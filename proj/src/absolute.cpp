#include "absqm/absolute.hpp"

#include <algorithm>
#include <cmath>

namespace absqm {

namespace {

// Weights of the derivative at t of the quadratic through (ta, tb, tc).
struct Weights {
  double a, b, c;
};

Weights lagrange_derivative(double ta, double tb, double tc, double t) {
  return {((t - tb) + (t - tc)) / ((ta - tb) * (ta - tc)),
          ((t - ta) + (t - tc)) / ((tb - ta) * (tb - tc)),
          ((t - ta) + (t - tb)) / ((tc - ta) * (tc - tb))};
}

// Indices of the three snapshots used for the derivative at k.
std::array<std::size_t, 3> stencil(std::size_t k, std::size_t n) {
  if (k == 0) return {0, 1, 2};
  if (k + 1 == n) return {n - 3, n - 2, n - 1};
  return {k - 1, k, k + 1};
}

template <class T>
std::vector<T> time_derivative(const std::vector<const std::vector<T>*>& f,
                               const std::vector<double>& t, std::size_t k) {
  const auto [ia, ib, ic] = stencil(k, t.size());
  const Weights w = lagrange_derivative(t[ia], t[ib], t[ic], t[k]);
  const std::vector<T>& fa = *f[ia];
  const std::vector<T>& fb = *f[ib];
  const std::vector<T>& fc = *f[ic];
  std::vector<T> out(fa.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w.a * fa[i] + w.b * fb[i] + w.c * fc[i];
  return out;
}

void check_series(std::span<const AbsoluteProcess> procs, TimeDifferencing mode) {
  if (mode == TimeDifferencing::centered) {
    require(procs.size() >= 3, ErrorKind::insufficient_data,
            "centered time differencing needs at least 3 snapshots");
  } else {
    require(!procs.empty(), ErrorKind::insufficient_data, "empty trajectory");
    for (const AbsoluteProcess& p : procs)
      require(!p.rho_t.empty() && !p.u_t.empty(), ErrorKind::contract_violation,
              "stored time derivatives are missing; use centered differencing");
  }
  for (const AbsoluteProcess& p : procs)
    require(p.grid == procs[0].grid, ErrorKind::contract_violation,
            "trajectory snapshots live on different grids");
}

std::vector<double> times_of(std::span<const AbsoluteProcess> procs) {
  std::vector<double> t;
  for (const AbsoluteProcess& p : procs) t.push_back(p.time);
  return t;
}

std::vector<unsigned char> merged_flags(std::span<const AbsoluteProcess> procs, std::size_t k) {
  std::vector<unsigned char> flags = procs[k].flagged;
  for (std::size_t m : stencil(k, procs.size()))
    for (std::size_t i = 0; i < flags.size(); ++i) flags[i] |= procs[m].flagged[i];
  return flags;
}

// Also excludes points whose derivative stencil reaches a flagged point.
std::vector<unsigned char> dilated(const std::vector<unsigned char>& flags, const Grid& g) {
  constexpr long radius = 2;
  const long n = static_cast<long>(flags.size());
  std::vector<unsigned char> out(flags.size(), 0);
  for (long i = 0; i < n; ++i) {
    if (!flags[static_cast<std::size_t>(i)]) continue;
    for (long o = -radius; o <= radius; ++o) {
      long j = i + o;
      if (g.boundary() == Boundary::periodic) j = (j + n) % n;
      if (j >= 0 && j < n) out[static_cast<std::size_t>(j)] = 1;
    }
  }
  return out;
}

template <class Body>
ResidualSeries series(std::span<const AbsoluteProcess> procs, TimeDifferencing mode, Body body) {
  check_series(procs, mode);
  ResidualSeries out;
  const std::size_t first = mode == TimeDifferencing::centered ? 1 : 0;
  const std::size_t last = mode == TimeDifferencing::centered ? procs.size() - 1 : procs.size();
  for (std::size_t k = first; k < last; ++k) {
    out.times.push_back(procs[k].time);
    out.values.push_back(body(k));
  }
  return out;
}

}  // namespace

double ResidualSeries::max() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

std::vector<AbsoluteProcess> extract_trajectory(const Trajectory& traj, TimeDifferencing mode,
                                                double rho_floor) {
  std::vector<AbsoluteProcess> out;
  out.reserve(traj.size());
  if (mode == TimeDifferencing::stored) {
    require(traj.rhs.size() == traj.size(), ErrorKind::contract_violation,
            "trajectory carries no stored right-hand side");
    for (std::size_t k = 0; k < traj.size(); ++k)
      out.push_back(extract_absolute(traj.snapshots[k], traj.rhs[k], rho_floor));
    return out;
  }
  require(traj.size() >= 3, ErrorKind::insufficient_data,
          "centered time differencing needs at least 3 snapshots");
  const std::vector<double> t = traj.times();
  std::vector<const ComplexField*> fields;
  for (const WaveField& w : traj.snapshots) fields.push_back(&w.psi);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const ComplexField dpsi = time_derivative(fields, t, k);
    out.push_back(extract_absolute(traj.snapshots[k], dpsi, rho_floor));
  }
  return out;
}

RealField residual_mass_shell(const AbsoluteProcess& p) {
  const RealField r2 = derivative(std::span<const double>(p.r_amp), p.grid, 2);
  RealField out(p.r_amp.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = p.s[i] * p.r_amp[i] + 0.5 * r2[i];
  return out;
}

double mass_shell_norm(const AbsoluteProcess& p) {
  return l2_norm_masked(residual_mass_shell(p), p.grid, p.flagged);
}

ResidualSeries residual_mass_shell(std::span<const AbsoluteProcess> procs) {
  require(!procs.empty(), ErrorKind::insufficient_data, "empty trajectory");
  ResidualSeries out;
  for (const AbsoluteProcess& p : procs) {
    out.times.push_back(p.time);
    out.values.push_back(mass_shell_norm(p));
  }
  return out;
}

ResidualSeries residual_continuity(std::span<const AbsoluteProcess> procs, TimeDifferencing mode) {
  const std::vector<double> t = times_of(procs);
  std::vector<const RealField*> rho;
  for (const AbsoluteProcess& p : procs) rho.push_back(&p.rho);
  return series(procs, mode, [&](std::size_t k) {
    const AbsoluteProcess& p = procs[k];
    const RealField rho_t = mode == TimeDifferencing::stored ? p.rho_t : time_derivative(rho, t, k);
    const RealField dj = derivative(std::span<const double>(p.j), p.grid, 1);
    RealField r(dj.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rho_t[i] + dj[i];
    const std::vector<unsigned char> flags =
        mode == TimeDifferencing::stored ? p.flagged : merged_flags(procs, k);
    return l2_norm_masked(r, p.grid, flags);
  });
}

ResidualSeries residual_force(std::span<const AbsoluteProcess> procs, std::span<const double> e_field,
                              TimeDifferencing mode) {
  const std::vector<double> t = times_of(procs);
  if (!procs.empty()) check_on_grid(e_field.size(), procs[0].grid, "force residual E");
  std::vector<const RealField*> u;
  for (const AbsoluteProcess& p : procs) u.push_back(&p.u);
  return series(procs, mode, [&](std::size_t k) {
    const AbsoluteProcess& p = procs[k];
    const RealField u_t = mode == TimeDifferencing::stored ? p.u_t : time_derivative(u, t, k);
    const RealField du = finite_difference(p.u, p.grid, 1);
    const RealField ds = finite_difference(p.s, p.grid, 1);
    RealField r(du.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = u_t[i] + p.u[i] * du[i] + ds[i] - e_field[i];
    const std::vector<unsigned char> flags =
        dilated(mode == TimeDifferencing::stored ? p.flagged : merged_flags(procs, k), p.grid);
    return l2_norm_masked(r, p.grid, flags);
  });
}

RealField static_electric_field(const GaugePotential& gauge, const Grid& g) {
  check_on_grid(gauge.a0.size(), g, "gauge a0");
  RealField e = finite_difference(gauge.a0, g, 1);
  for (double& v : e) v = -v;
  return e;
}

CotensorW CotensorField::integrated(const Grid& g) const {
  CotensorW total;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        RealField f(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) f[i] = rho[i] * w[i].c[a][b][c];
        total.c[a][b][c] = integrate(f, g);
      }
  return total;
}

CotensorField build_cotensor(const AbsoluteProcess& p) {
  CotensorField out;
  out.rho = p.rho;
  out.w.reserve(p.eps.size());
  for (std::size_t i = 0; i < p.eps.size(); ++i) out.w.push_back(CotensorW::from(p.eps[i], p.u[i]));
  return out;
}

void recover_fields(const CotensorField& c, RealField& eps, RealField& u) {
  eps.resize(c.w.size());
  u.resize(c.w.size());
  for (std::size_t i = 0; i < c.w.size(); ++i) {
    eps[i] = c.w[i].eps();
    u[i] = c.w[i].u();
  }
}

}  // namespace absqm
