#include "absqm/kleingordon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "peierls.hpp"

namespace absqm {

namespace {

constexpr Complex kI{0.0, 1.0};

GaugePotential completed_gauge(const GaugePotential& gauge, const Grid& g) {
  GaugePotential out = gauge;
  if (out.a0.empty()) out.a0.assign(g.size(), 0.0);
  if (out.a1.empty()) out.a1.assign(g.size(), 0.0);
  check_on_grid(out.a0.size(), g, "KG a0");
  check_on_grid(out.a1.size(), g, "KG a1");
  return out;
}

// L phi = c^2 (d - i a1)^2 phi + (a0^2 - 2 c^2 a0) phi, the envelope operator.
class EnvelopeOperator {
 public:
  EnvelopeOperator(const Grid& g, double c, const GaugePotential& gauge)
      : peierls_(g, gauge.a1), c2_(c * c), a0_(gauge.a0) {
    shift_.resize(a0_.size());
    for (std::size_t i = 0; i < a0_.size(); ++i) shift_[i] = a0_[i] * a0_[i] - 2.0 * c2_ * a0_[i];
  }

  ComplexField apply(const ComplexField& phi) const {
    ComplexField out = phi;
    const double c2 = c2_;
    peierls_.apply(out, [c2](double k2) { return Complex(-c2 * k2, 0.0); });
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += shift_[i] * phi[i];
    return out;
  }

  // beta = c^2 - a0
  double beta(std::size_t i) const { return c2_ - a0_[i]; }

 private:
  detail::PeierlsFactor peierls_;
  double c2_;
  RealField a0_;
  RealField shift_;
};

void check_finite(const ComplexField& f) {
  for (Complex z : f)
    require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorKind::numerical,
            "KG evolution produced non-finite values");
}

KGField at_level(const KGField& f0, const ComplexField& phi, const ComplexField& dphi, double t) {
  KGField out{f0.grid, phi, dphi, t, f0.c, f0.gauge};
  const double c2 = f0.c * f0.c;
  const Complex rot = std::polar(1.0, -c2 * t);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out.psi[i] = rot * phi[i];
    out.dpsi_dt[i] = rot * (dphi[i] - kI * c2 * phi[i]);
  }
  return out;
}

struct Derived {
  ComplexField psi_x, psi_xx, psi_t, psi_tx;
};

Derived derived(const KGField& f) {
  return {derivative(f.psi, f.grid, 1), derivative(f.psi, f.grid, 2), f.dpsi_dt, derivative(f.dpsi_dt, f.grid, 1)};
}

double masked_norm(const RealField& r, const Grid& g, const std::vector<unsigned char>& mask) {
  return l2_norm_masked(r, g, mask);
}

}  // namespace

void KGField::validate() const {
  require(grid.boundary() == Boundary::periodic, ErrorKind::contract_violation,
          "KG fields live on periodic grids");
  check_on_grid(psi.size(), grid, "KG psi");
  check_on_grid(dpsi_dt.size(), grid, "KG dpsi_dt");
  require(c > 0.0 && std::isfinite(c), ErrorKind::contract_violation, "KG: c must be positive");
  require(std::isfinite(time), ErrorKind::contract_violation, "KG: time must be finite");
  for (std::size_t i = 0; i < psi.size(); ++i)
    require(std::isfinite(std::abs(psi[i])) && std::isfinite(std::abs(dpsi_dt[i])), ErrorKind::contract_violation,
            "KG fields must be finite");
  if (!gauge.a0.empty()) check_on_grid(gauge.a0.size(), grid, "KG a0");
  if (!gauge.a1.empty()) check_on_grid(gauge.a1.size(), grid, "KG a1");
}

KGField kg_from_envelope(const WaveField& w, double c) {
  w.validate();
  require(c > 0.0 && std::isfinite(c), ErrorKind::contract_violation, "KG: c must be positive");
  EvolutionSpec spec;
  spec.potential = completed_gauge(w.gauge, w.grid);
  const ComplexField dphi = rhs(w, spec);
  KGField f{w.grid, {}, {}, w.time, c, spec.potential};
  f = at_level(f, w.psi, dphi, w.time);
  f.validate();
  return f;
}

double kg_max_dt(const Grid& g, double c, const GaugePotential& gauge_in) {
  const GaugePotential gauge = completed_gauge(gauge_in, g);
  const double c2 = c * c;
  const double abar = detail::mean(gauge.a1);
  const double k_top = std::numbers::pi / g.dx() + std::abs(abar);
  double shift = 0.0, beta_min = std::abs(c2 - gauge.a0[0]);
  for (double a : gauge.a0) {
    shift = std::max(shift, 2.0 * c2 * a - a * a);
    beta_min = std::min(beta_min, std::abs(c2 - a));
  }
  const double k = c2 * k_top * k_top + shift;
  // Roots of (1 - i b dt) z^2 - (2 - K dt^2) z + (1 + i b dt) stay on the unit
  // circle while K dt^2 <= 2 + 2 sqrt(1 + b^2 dt^2).
  const double stable = 2.0 * std::sqrt(k + beta_min * beta_min) / k;
  return std::min(g.dx() / c, stable);
}

double kg_charge(const KGField& f) {
  f.validate();
  const GaugePotential gauge = completed_gauge(f.gauge, f.grid);
  RealField q(f.psi.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    q[i] = -(std::conj(f.psi[i]) * f.dpsi_dt[i]).imag() - gauge.a0[i] * std::norm(f.psi[i]);
  return integrate(q, f.grid) / (f.c * f.c);
}

KGTrajectory kg_evolve(const KGField& f0_in, double dt, double t_final, int snapshot_every) {
  f0_in.validate();
  require(dt > 0.0 && std::isfinite(dt), ErrorKind::contract_violation, "KG: dt must be positive");
  require(t_final >= 0.0, ErrorKind::contract_violation, "KG: t_final must be non-negative");
  require(snapshot_every >= 1, ErrorKind::contract_violation, "KG: snapshot_every must be >= 1");
  KGField f0 = f0_in;
  f0.gauge = completed_gauge(f0.gauge, f0.grid);
  const Grid& g = f0.grid;
  const double c2 = f0.c * f0.c;

  long steps = 0;
  if (t_final > 0.0) {
    steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
    dt = t_final / static_cast<double>(steps);
  }
  const double limit = kg_max_dt(g, f0.c, f0.gauge);
  require(steps == 0 || dt <= limit * (1.0 + 1e-12), ErrorKind::stability,
          "KG: dt " + std::to_string(dt) + " exceeds the CFL/leapfrog limit " + std::to_string(limit));

  const std::size_t n = g.size();
  const EnvelopeOperator op(g, f0.c, f0.gauge);
  ComplexField phi(n), dphi(n);
  const Complex unrot = std::polar(1.0, c2 * f0.time);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] = unrot * f0.psi[i];
    dphi[i] = unrot * f0.dpsi_dt[i] + kI * c2 * phi[i];
  }

  KGTrajectory out;
  if (steps == 0) {
    out.snapshots.push_back(at_level(f0, phi, dphi, f0.time));
    return out;
  }

  // phi_tt = 2 i beta phi_t + L phi, and its time derivative.
  const ComplexField lphi = op.apply(phi), ldphi = op.apply(dphi);
  ComplexField next(n), before(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex b2 = 2.0 * kI * op.beta(i);
    const Complex ddphi = b2 * dphi[i] + lphi[i];
    const Complex dddphi = b2 * ddphi + ldphi[i];
    next[i] = phi[i] + dt * dphi[i] + dt * dt / 2.0 * ddphi + dt * dt * dt / 6.0 * dddphi;
    // The level the scheme itself puts before phi^0.
    const double bdt = op.beta(i) * dt;
    before[i] = (2.0 * phi[i] - (1.0 - kI * bdt) * next[i] + dt * dt * lphi[i]) / (1.0 + kI * bdt);
  }
  ComplexField slope(n);
  // Centred difference plus the O(dt^2) term that makes the continuous charge
  // of (phi, slope) equal the discrete invariant of the scheme.
  auto level_slope = [&](const ComplexField& m1, const ComplexField& c0, const ComplexField& p1) {
    for (std::size_t i = 0; i < n; ++i)
      slope[i] = (p1[i] - m1[i]) / (2.0 * dt) - 0.5 * kI * op.beta(i) * (p1[i] - 2.0 * c0[i] + m1[i]);
  };
  level_slope(before, phi, next);
  out.snapshots.push_back(at_level(f0, phi, slope, f0.time));

  ComplexField prev = std::move(phi);
  ComplexField cur = std::move(next);
  next.assign(n, Complex{});
  for (long s = 1; s <= steps; ++s) {
    const ComplexField lcur = op.apply(cur);
    for (std::size_t i = 0; i < n; ++i) {
      const double bdt = op.beta(i) * dt;
      next[i] = (2.0 * cur[i] - (1.0 + kI * bdt) * prev[i] + dt * dt * lcur[i]) / (1.0 - kI * bdt);
    }
    if (s % snapshot_every == 0 || s == steps) {
      check_finite(next);
      level_slope(prev, cur, next);
      out.snapshots.push_back(at_level(f0, cur, slope, f0.time + static_cast<double>(s) * dt));
    }
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return out;
}

KGField kg_step(const KGField& f, double dt) { return kg_evolve(f, dt, dt, 1).snapshots.back(); }

KGAbsolute kg_extract(const KGField& f, double rho_floor) {
  f.validate();
  require(rho_floor > 0.0, ErrorKind::contract_violation, "rho_floor must be positive");
  const GaugePotential gauge = completed_gauge(f.gauge, f.grid);
  const std::size_t n = f.psi.size();
  KGAbsolute a{f.grid};
  a.grid = f.grid;
  a.time = f.time;
  a.c = f.c;
  a.rho.resize(n);
  a.r_amp.resize(n);
  a.u0.assign(n, -f.c * f.c);
  a.u1.assign(n, 0.0);
  a.eps.assign(n, 0.0);
  a.flagged.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    a.rho[i] = std::norm(f.psi[i]);
    a.r_amp[i] = std::abs(f.psi[i]);
  }
  const double floor = rho_floor * *std::max_element(a.rho.begin(), a.rho.end());
  const ComplexField psi_x = derivative(f.psi, f.grid, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a.rho[i] > floor)) {
      a.flagged[i] = 1;
      continue;
    }
    const Complex cp = std::conj(f.psi[i]);
    a.u1[i] = (cp * psi_x[i]).imag() / a.rho[i] - gauge.a1[i];
    a.u0[i] = (cp * f.dpsi_dt[i]).imag() / a.rho[i] + gauge.a0[i];
    a.eps[i] = a.u0[i] + f.c * f.c;
  }
  return a;
}

KGResidualReport kg_residuals(std::span<const KGField> traj, double rho_floor) {
  require(traj.size() >= 3, ErrorKind::insufficient_data, "kg_residuals needs at least 3 snapshots");
  const Grid& g = traj[0].grid;
  const double delta = traj[1].time - traj[0].time;
  require(delta > 0.0, ErrorKind::contract_violation, "kg_residuals: snapshot times must increase");
  for (std::size_t m = 1; m < traj.size(); ++m) {
    require(traj[m].grid == g && traj[m].c == traj[0].c, ErrorKind::contract_violation,
            "kg_residuals: snapshots must share grid and c");
    require(std::abs(traj[m].time - traj[m - 1].time - delta) <= 1e-9 * delta, ErrorKind::contract_violation,
            "kg_residuals: snapshots must be equally spaced");
  }
  const double c = traj[0].c, c2 = c * c;
  const std::size_t n = g.size();
  std::vector<KGAbsolute> abs;
  for (const KGField& f : traj) abs.push_back(kg_extract(f, rho_floor));

  KGResidualReport rep;
  for (std::size_t m = 1; m + 1 < traj.size(); ++m) {
    const KGField& f = traj[m];
    const GaugePotential gauge = completed_gauge(f.gauge, g);
    const KGAbsolute &a = abs[m], &ap = abs[m + 1], &am = abs[m - 1];
    const Derived d = derived(f);
    const RealField a0x = finite_difference(gauge.a0, g, 1);
    const RealField a1x = finite_difference(gauge.a1, g, 1);
    const GaugePotential gp = completed_gauge(traj[m + 1].gauge, g), gm = completed_gauge(traj[m - 1].gauge, g);
    std::vector<unsigned char> mask(n, 0);
    RealField r1(n, 0.0), r2(n, 0.0), r3(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      mask[i] = a.flagged[i] | ap.flagged[i] | am.flagged[i];
      if (mask[i]) continue;
      const Complex cp = std::conj(f.psi[i]);
      const double rho = a.rho[i], R = a.r_amp[i];
      const double rho_x = 2.0 * (cp * d.psi_x[i]).real();
      const double rho_xx = 2.0 * (cp * d.psi_xx[i]).real() + 2.0 * std::norm(d.psi_x[i]);
      const double q = (cp * d.psi_t[i]).imag();
      const double q_x = (std::conj(d.psi_x[i]) * d.psi_t[i] + cp * d.psi_tx[i]).imag();
      const double u0_x = q_x / rho - q * rho_x / (rho * rho) + a0x[i];
      const double u1_t = (ap.u1[i] - am.u1[i]) / (2.0 * delta);
      r1[i] = R * (u1_t - u0_x + a0x[i]);

      const double R_xx = rho_xx / (2.0 * R) - rho_x * rho_x / (4.0 * R * R * R);
      const double R_tt = (ap.r_amp[i] - 2.0 * R + am.r_amp[i]) / (delta * delta);
      r2[i] = (c2 - a.u0[i]) * a.eps[i] * R + c2 * a.u1[i] * a.u1[i] * R + R_tt - c2 * R_xx;

      const double flux_p = (std::conj(traj[m + 1].psi[i]) * traj[m + 1].dpsi_dt[i]).imag() + gp.a0[i] * ap.rho[i];
      const double flux_m = (std::conj(traj[m - 1].psi[i]) * traj[m - 1].dpsi_dt[i]).imag() + gm.a0[i] * am.rho[i];
      const double j_x = (cp * d.psi_xx[i]).imag() - a1x[i] * rho - gauge.a1[i] * rho_x;
      r3[i] = (flux_p - flux_m) / (2.0 * delta) - c2 * j_x;
    }
    rep.rel1.times.push_back(f.time);
    rep.rel2.times.push_back(f.time);
    rep.rel3.times.push_back(f.time);
    rep.rel1.values.push_back(masked_norm(r1, g, mask));
    rep.rel2.values.push_back(masked_norm(r2, g, mask));
    rep.rel3.values.push_back(masked_norm(r3, g, mask));
  }
  return rep;
}

double envelope_bandwidth(const WaveField& w) {
  w.validate();
  ComplexField f = w.psi;
  detail::fft_forward(f);
  const RealField k = w.grid.wavenumbers();
  double p = 0.0, pk = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    p += std::norm(f[i]);
    pk += std::norm(f[i]) * k[i];
  }
  const double mean = pk / p;
  double var = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) var += std::norm(f[i]) * (k[i] - mean) * (k[i] - mean);
  return std::abs(mean) + 5.0 * std::sqrt(var / p);
}

NRLimitReport nr_limit_compare(const WaveField& envelope, std::span<const double> c_ladder, const NRLimitSpec& spec) {
  envelope.validate();
  const Grid& g = envelope.grid;
  require(g.boundary() == Boundary::periodic, ErrorKind::contract_violation, "nr_limit_compare needs a periodic grid");
  require(c_ladder.size() >= 2, ErrorKind::contract_violation, "nr_limit_compare needs at least two values of c");
  require(spec.t > 0.0 && spec.dt_c2 > 0.0 && spec.nr_dt > 0.0, ErrorKind::contract_violation,
          "nr_limit_compare: t and steps must be positive");
  NRLimitReport rep;
  rep.k_max = envelope_bandwidth(envelope);
  for (double c : c_ladder)
    require(rep.k_max <= spec.bandwidth_fraction * c, ErrorKind::range,
            "nr_limit_compare: envelope bandwidth " + std::to_string(rep.k_max) + " too wide for c = " +
                std::to_string(c));

  EvolutionSpec nr;
  nr.potential = completed_gauge(envelope.gauge, g);
  nr.dt = spec.nr_dt;
  nr.t_final = spec.t;
  nr.rho_floor = spec.rho_floor;
  const Trajectory oracle = evolve(envelope, nr, 1 << 30);
  const AbsoluteProcess ref = extract_absolute(oracle.snapshots.back(), oracle.rhs.back(), spec.rho_floor);

  std::vector<double> log_c, log_d;
  for (double c : c_ladder) {
    const KGField f0 = kg_from_envelope(envelope, c);
    const double dt = std::min({spec.dt_c2 / (c * c), 0.5 * g.dx() / c, kg_max_dt(g, c, f0.gauge)});
    const KGTrajectory traj = kg_evolve(f0, dt, spec.t, 1 << 30);
    const KGAbsolute a = kg_extract(traj.snapshots.back(), spec.rho_floor);
    RealField drho(g.size()), du(g.size()), de(g.size()), e2(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      drho[i] = (a.rho[i] - ref.rho[i]) * (a.rho[i] - ref.rho[i]);
      if (a.flagged[i] || ref.flagged[i]) {
        du[i] = de[i] = e2[i] = 0.0;
        continue;
      }
      du[i] = ref.rho[i] * (a.u1[i] - ref.u[i]) * (a.u1[i] - ref.u[i]);
      de[i] = ref.rho[i] * (a.eps[i] - ref.eps[i]) * (a.eps[i] - ref.eps[i]);
      e2[i] = ref.rho[i] * ref.eps[i] * ref.eps[i];
    }
    NRLimitRow row;
    row.c = c;
    row.dt = spec.t / std::ceil(spec.t / dt - 1e-9);
    row.rho_distance = std::sqrt(integrate(drho, g));
    row.u_distance = std::sqrt(integrate(du, g));
    row.eps_distance = std::sqrt(integrate(de, g));
    row.distance = std::sqrt(row.rho_distance * row.rho_distance + row.u_distance * row.u_distance +
                             row.eps_distance * row.eps_distance);
    row.eps_relative = row.eps_distance / std::sqrt(integrate(e2, g));
    rep.rows.push_back(row);
    log_c.push_back(std::log(c));
    log_d.push_back(std::log(row.distance));
  }
  rep.monotone = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k)
    rep.monotone = rep.monotone && rep.rows[k].distance < rep.rows[k - 1].distance;
  rep.exponent = -fit_line(log_c, log_d).slope;
  return rep;
}

}  // namespace absqm
