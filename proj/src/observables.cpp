#include "absqm/observables.hpp"

#include <algorithm>
#include <cmath>

namespace absqm {

namespace {

struct Stencil {
  std::size_t a, b, c;
};

Stencil interior(std::size_t k) { return {k - 1, k, k + 1}; }

double first_derivative(const std::vector<double>& t, const std::vector<double>& f, Stencil s,
                        double at) {
  const double ta = t[s.a], tb = t[s.b], tc = t[s.c];
  return f[s.a] * ((at - tb) + (at - tc)) / ((ta - tb) * (ta - tc)) +
         f[s.b] * ((at - ta) + (at - tc)) / ((tb - ta) * (tb - tc)) +
         f[s.c] * ((at - ta) + (at - tb)) / ((tc - ta) * (tc - tb));
}

double second_derivative(const std::vector<double>& t, const std::vector<double>& f, Stencil s) {
  const double ta = t[s.a], tb = t[s.b], tc = t[s.c];
  return 2.0 * (f[s.a] / ((ta - tb) * (ta - tc)) + f[s.b] / ((tb - ta) * (tb - tc)) +
                f[s.c] / ((tc - ta) * (tc - tb)));
}

double deviation(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace

MomentReport moments(const AbsoluteProcess& p, double edge_limit) {
  const Grid& g = p.grid;
  const std::size_t n = g.size();
  check_on_grid(p.rho.size(), g, "moments rho");
  const double mass = integrate(p.rho, g);
  require(std::abs(mass - 1.0) <= 1e-6, ErrorKind::contract_violation,
          "moments: process not normalised (mass = " + std::to_string(mass) + ")");
  require(p.rho.front() < edge_limit && p.rho.back() < edge_limit, ErrorKind::domain,
          "moments: density at the domain edges exceeds " + std::to_string(edge_limit) +
              "; enlarge the domain");

  MomentReport m;
  m.time = p.time;
  RealField f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = p.rho[i] * g.x(i);
  m.Q = integrate(f, g);
  m.V = integrate(p.j, g);
  for (std::size_t i = 0; i < n; ++i) f[i] = -p.rho[i] * p.eps[i];
  m.K = integrate(f, g);
  for (std::size_t i = 0; i < n; ++i) f[i] = p.rho[i] * (g.x(i) - m.Q) * (g.x(i) - m.Q);
  m.varQ = integrate(f, g);
  for (std::size_t i = 0; i < n; ++i) f[i] = (g.x(i) - m.Q) * (p.j[i] - p.rho[i] * m.V);
  m.Y = integrate(f, g);

  const RealField drho = derivative(std::span<const double>(p.rho), g, 1);
  RealField ft(n, 0.0), fp(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (p.flagged[i]) continue;
    ft[i] = p.rho[i] * (p.u[i] - m.V) * (p.u[i] - m.V);
    fp[i] = drho[i] * drho[i] / (4.0 * p.rho[i]);
  }
  m.T = integrate(ft, g);
  m.P = integrate(fp, g);
  m.varV = m.T + m.P;
  return m;
}

bool UncertaintyMargins::all_hold(double tolerance) const {
  return hat1 >= -tolerance && hat2 >= -tolerance && hat3 >= -tolerance &&
         classical >= -tolerance;
}

UncertaintyMargins uncertainty_report(const MomentReport& m) {
  const double lhs = m.varQ * m.varV;
  return {lhs - 0.25 - m.varQ * m.T, lhs - m.Y * m.Y - m.varQ * m.P, lhs - 0.25 - m.Y * m.Y,
          lhs - 0.25};
}

EhrenfestReport ehrenfest_check(std::span<const AbsoluteProcess> procs, const ForceLaw& force) {
  require(procs.size() >= 5, ErrorKind::insufficient_data,
          "ehrenfest_check needs at least 5 snapshots");
  require(static_cast<bool>(force), ErrorKind::contract_violation, "ehrenfest_check: no force law");
  std::vector<double> t, q;
  for (const AbsoluteProcess& p : procs) {
    const Grid& g = p.grid;
    RealField f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = p.rho[i] * g.x(i);
    t.push_back(p.time);
    q.push_back(integrate(f, g));
  }
  for (std::size_t k = 1; k < t.size(); ++k)
    require(t[k] > t[k - 1], ErrorKind::contract_violation,
            "ehrenfest_check: snapshot times must increase");

  EhrenfestReport r;
  for (std::size_t k = 1; k + 1 < procs.size(); ++k) {
    const AbsoluteProcess& p = procs[k];
    const Grid& g = p.grid;
    RealField f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = p.rho[i] * force(g.x(i), p.u[i]);
    r.times.push_back(t[k]);
    r.dq_dt.push_back(first_derivative(t, q, interior(k), t[k]));
    r.mean_velocity.push_back(integrate(p.j, g));
    r.d2q_dt2.push_back(second_derivative(t, q, interior(k)));
    r.mean_force.push_back(integrate(f, g));
  }
  r.velocity_deviation = deviation(r.dq_dt, r.mean_velocity);
  r.acceleration_deviation = deviation(r.d2q_dt2, r.mean_force);
  return r;
}

}  // namespace absqm
