#include "absqm/dissipative.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "fft.hpp"

namespace absqm {

namespace {

double max_of(const RealField& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, v);
  return m;
}

struct Rates {
  RealField rho;
  RealField j;
};

Rates absolute_rhs(const Grid& g, const RealField& rho, const RealField& j,
                   const DissipativeParams& params) {
  const std::size_t n = g.size();
  const double floor_abs = params.rho_floor * max_of(rho);
  RealField log_rho(n);
  for (std::size_t i = 0; i < n; ++i) log_rho[i] = std::log(std::max(rho[i], floor_abs));
  const RealField l2 = finite_difference(log_rho, g, 2);
  // (R R'' - R'^2 - 2 rho u^2) / 2 = rho (ln rho)'' / 4 - j^2 / rho
  RealField q(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (rho[i] >= floor_abs) q[i] = 0.25 * rho[i] * l2[i] - j[i] * j[i] / rho[i];
  const RealField dq = derivative(std::span<const double>(q), g, 1);
  const RealField dj = derivative(std::span<const double>(j), g, 1);
  Rates out{RealField(n), RealField(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.rho[i] = -dj[i];
    out.j[i] = -params.damping * j[i] + dq[i];
  }
  return out;
}

DissipativeState rk4(const DissipativeState& s, double dt, const DissipativeParams& params) {
  const std::size_t n = s.grid.size();
  auto shifted = [&](const Rates& k, double h, RealField& rho, RealField& j) {
    for (std::size_t i = 0; i < n; ++i) {
      rho[i] = s.rho[i] + h * k.rho[i];
      j[i] = s.j[i] + h * k.j[i];
    }
  };
  RealField rho(n), j(n);
  const Rates k1 = absolute_rhs(s.grid, s.rho, s.j, params);
  shifted(k1, 0.5 * dt, rho, j);
  const Rates k2 = absolute_rhs(s.grid, rho, j, params);
  shifted(k2, 0.5 * dt, rho, j);
  const Rates k3 = absolute_rhs(s.grid, rho, j, params);
  shifted(k3, dt, rho, j);
  const Rates k4 = absolute_rhs(s.grid, rho, j, params);
  DissipativeState out{s.grid, RealField(n), RealField(n), s.time + dt};
  for (std::size_t i = 0; i < n; ++i) {
    out.rho[i] = s.rho[i] + dt / 6.0 * (k1.rho[i] + 2.0 * k2.rho[i] + 2.0 * k3.rho[i] + k4.rho[i]);
    out.j[i] = s.j[i] + dt / 6.0 * (k1.j[i] + 2.0 * k2.j[i] + 2.0 * k3.j[i] + k4.j[i]);
  }
  const double floor_abs = params.rho_floor * max_of(out.rho);
  for (std::size_t i = 0; i < n; ++i)
    if (out.rho[i] < floor_abs) out.j[i] = 0.0;
  return out;
}

DissipativeState guarded_step(const DissipativeState& s, double dt, const DissipativeParams& params,
                              int depth) {
  DissipativeState next = rk4(s, dt, params);
  double low = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < next.rho.size(); ++i) {
    low = std::min(low, next.rho[i]);
    finite = finite && std::isfinite(next.rho[i]) && std::isfinite(next.j[i]);
  }
  if (finite && low >= -1e-12) return next;
  require(depth < 8, ErrorKind::numerical,
          "step_absolute: density stays negative after repeated step halving");
  const DissipativeState half = guarded_step(s, 0.5 * dt, params, depth + 1);
  return guarded_step(half, 0.5 * dt, params, depth + 1);
}

// Q, V, X, Y, T, P of one state.
struct StateMoments {
  double Q, V, X, Y, T, P;
};

StateMoments state_moments(const DissipativeState& s, double rho_floor) {
  const Grid& g = s.grid;
  const std::size_t n = g.size();
  const double floor_abs = rho_floor * max_of(s.rho);
  RealField f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = s.rho[i] * g.x(i);
  StateMoments m{};
  m.Q = integrate(f, g);
  m.V = integrate(s.j, g);
  for (std::size_t i = 0; i < n; ++i) f[i] = s.rho[i] * (g.x(i) - m.Q) * (g.x(i) - m.Q);
  m.X = integrate(f, g);
  const RealField d1 = derivative(std::span<const double>(s.rho), g, 1);
  RealField fy(n, 0.0), ft(n, 0.0), fp(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (s.rho[i] < floor_abs || s.rho[i] <= 0.0) continue;
    const double du = s.j[i] / s.rho[i] - m.V;
    fy[i] = s.rho[i] * (g.x(i) - m.Q) * du;
    ft[i] = s.rho[i] * du * du;
    fp[i] = d1[i] * d1[i] / (4.0 * s.rho[i]);
  }
  m.Y = integrate(fy, g);
  m.T = integrate(ft, g);
  m.P = integrate(fp, g);
  return m;
}

double centered(const std::vector<double>& t, const std::vector<double>& f, std::size_t k) {
  const double ta = t[k - 1], tb = t[k], tc = t[k + 1];
  return f[k - 1] * (tb - tc) / ((ta - tb) * (ta - tc)) +
         f[k] * ((tb - ta) + (tb - tc)) / ((tb - ta) * (tb - tc)) +
         f[k + 1] * (tb - ta) / ((tc - ta) * (tc - tb));
}

double relative_deviation(const std::vector<double>& a, const std::vector<double>& ref) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  return scale > 1e-12 ? diff / scale : diff;
}

}  // namespace

void DissipativeState::validate() const {
  check_on_grid(rho.size(), grid, "dissipative rho");
  check_on_grid(j.size(), grid, "dissipative j");
  for (std::size_t i = 0; i < rho.size(); ++i)
    require(std::isfinite(rho[i]) && std::isfinite(j[i]), ErrorKind::numerical,
            "dissipative state contains non-finite values");
}

DissipativeState gaussian_state(const Grid& g, double sigma, double q0, double v0) {
  require(sigma > 0.0, ErrorKind::contract_violation, "gaussian_state: sigma must be positive");
  DissipativeState s{g, RealField(g.size()), RealField(g.size()), 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double z = (g.x(i) - q0) / sigma;
    s.rho[i] = std::exp(-0.5 * z * z);
  }
  const double mass = integrate(s.rho, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.rho[i] /= mass;
    s.j[i] = v0 * s.rho[i];
  }
  return s;
}

DissipativeState state_from_wavefield(const WaveField& w) {
  w.validate();
  const Grid& g = w.grid;
  const ComplexField d = derivative(std::span<const Complex>(w.psi), g, 1);
  DissipativeState s{g, RealField(g.size()), RealField(g.size()), w.time};
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.rho[i] = std::norm(w.psi[i]);
    s.j[i] = (std::conj(w.psi[i]) * d[i]).imag() - s.rho[i] * w.gauge.a1[i];
  }
  return s;
}

AbsoluteProcess to_process(const DissipativeState& s, double rho_floor) {
  s.validate();
  const std::size_t n = s.grid.size();
  AbsoluteProcess p{s.grid, s.time};
  p.rho = s.rho;
  p.j = s.j;
  p.r_amp.resize(n);
  p.u.resize(n);
  p.eps.assign(n, 0.0);
  p.s.assign(n, 0.0);
  p.flagged.resize(n);
  const double floor_abs = rho_floor * max_of(s.rho);
  for (std::size_t i = 0; i < n; ++i) {
    p.r_amp[i] = std::sqrt(std::max(s.rho[i], 0.0));
    p.flagged[i] = s.rho[i] < floor_abs ? 1 : 0;
    p.u[i] = s.j[i] / std::max(s.rho[i], floor_abs);
  }
  return p;
}

DissipativeState pad_domain(const DissipativeState& s, std::size_t factor) {
  require(factor >= 1, ErrorKind::contract_violation, "pad_domain: factor must be >= 1");
  const Grid& g = s.grid;
  const std::size_t n = g.size();
  const std::size_t extra = (factor - 1) * n;
  const std::size_t left = extra / 2;
  const double dx = g.dx();
  const Grid wide(g.x_min() - static_cast<double>(left) * dx,
                  g.x_max() + static_cast<double>(extra - left) * dx, n + extra, g.boundary());
  DissipativeState out{wide, RealField(wide.size(), 0.0), RealField(wide.size(), 0.0), s.time};
  std::copy(s.rho.begin(), s.rho.end(), out.rho.begin() + static_cast<long>(left));
  std::copy(s.j.begin(), s.j.end(), out.j.begin() + static_cast<long>(left));
  return out;
}

DissipativeState step_absolute(const DissipativeState& s, double dt, const DissipativeParams& params) {
  s.validate();
  require(dt > 0.0, ErrorKind::contract_violation, "step_absolute: dt must be positive");
  const double limit = params.c_stab * s.grid.dx() * s.grid.dx();
  require(dt <= limit * (1.0 + 1e-12), ErrorKind::stability,
          "step_absolute: dt = " + std::to_string(dt) + " exceeds c_stab dx^2; use dt <= " +
              std::to_string(limit));
  return guarded_step(s, dt, params, 0);
}

WaveField step_quasiwave(const WaveField& w, double dt, const DissipativeParams& params) {
  w.validate();
  const Grid& g = w.grid;
  require(g.boundary() == Boundary::periodic, ErrorKind::contract_violation,
          "step_quasiwave needs a periodic grid");
  WaveField out = w;
  auto phase_step = [&](double tau) {
    const PolarDecomposition pd = polar_decompose(out, params.rho_floor);
    require(static_cast<double>(pd.interior_flagged) <= 0.1 * static_cast<double>(pd.hull_size),
            ErrorKind::unwrap_failure,
            "step_quasiwave: too many nodes inside the packet to unwrap the phase");
    const double decay = std::exp(-params.damping * tau);
    for (std::size_t i = 0; i < g.size(); ++i)
      out.psi[i] = std::polar(pd.r_amp[i], pd.phase[i] * decay);
  };
  phase_step(0.5 * dt);
  detail::fft_forward(out.psi);
  const RealField k = g.wavenumbers();
  for (std::size_t i = 0; i < g.size(); ++i) out.psi[i] *= std::polar(1.0, -0.5 * k[i] * k[i] * dt);
  detail::fft_inverse(out.psi);
  phase_step(0.5 * dt);
  out.time = w.time + dt;
  return out;
}

DissipativeRun run_absolute(const DissipativeState& s0, double dt, double t_final,
                            double snapshot_interval, const DissipativeParams& params,
                            double edge_limit) {
  require(t_final >= 0.0 && snapshot_interval > 0.0, ErrorKind::contract_violation,
          "run_absolute: bad time range");
  const long per_snapshot = std::max(1L, static_cast<long>(std::ceil(snapshot_interval / dt - 1e-9)));
  const double h = snapshot_interval / static_cast<double>(per_snapshot);
  const long snapshots = static_cast<long>(std::ceil(t_final / snapshot_interval - 1e-9));
  DissipativeRun run;
  DissipativeState s = s0;
  run.snapshots.push_back(s);
  for (long k = 1; k <= snapshots; ++k) {
    const double target = std::min(t_final, s0.time + static_cast<double>(k) * snapshot_interval);
    const double start = s.time;
    const long steps = std::max(1L, static_cast<long>(std::ceil((target - start) / h - 1e-9)));
    const double step = (target - start) / static_cast<double>(steps);
    for (long m = 0; m < steps; ++m) {
      s = step_absolute(s, step, params);
      // The support must stay clear of the edges, so the limit is the floor
      // itself once that is lower.
      const double limit = std::min(edge_limit, params.rho_floor * max_of(s.rho));
      if (std::max(s.rho.front(), s.rho.back()) >= limit) {
        require(run.domain_extensions < 6, ErrorKind::numerical,
                "run_absolute: packet keeps reaching the domain edge");
        s = pad_domain(s, 2);
        ++run.domain_extensions;
      }
    }
    s.time = target;
    run.snapshots.push_back(s);
  }
  return run;
}

std::vector<WaveField> run_quasiwave(const WaveField& w0, double dt, double t_final,
                                     double snapshot_interval, const DissipativeParams& params) {
  require(t_final >= 0.0 && snapshot_interval > 0.0 && dt > 0.0, ErrorKind::contract_violation,
          "run_quasiwave: bad time range");
  const long per_snapshot = std::max(1L, static_cast<long>(std::ceil(snapshot_interval / dt - 1e-9)));
  const double h = snapshot_interval / static_cast<double>(per_snapshot);
  const long snapshots = static_cast<long>(std::ceil(t_final / snapshot_interval - 1e-9));
  std::vector<WaveField> out{w0};
  WaveField w = w0;
  for (long k = 1; k <= snapshots; ++k) {
    const double target = std::min(t_final, w0.time + static_cast<double>(k) * snapshot_interval);
    const double start = w.time;
    const long steps = std::max(1L, static_cast<long>(std::ceil((target - start) / h - 1e-9)));
    const double step = (target - start) / static_cast<double>(steps);
    for (long m = 0; m < steps; ++m) w = step_quasiwave(w, step, params);
    w.time = target;
    out.push_back(w);
  }
  return out;
}

DissipativeDiagnostics diagnostics(std::span<const DissipativeState> traj,
                                   const DissipativeParams& params, double t_transient) {
  require(traj.size() >= 5, ErrorKind::insufficient_data, "diagnostics needs at least 5 snapshots");
  DissipativeDiagnostics d;
  d.h1_min = std::numeric_limits<double>::infinity();
  d.h2_min = std::numeric_limits<double>::infinity();
  std::vector<double> tp;
  for (const DissipativeState& s : traj) {
    const StateMoments m = state_moments(s, params.rho_floor);
    d.t.push_back(s.time);
    d.Q.push_back(m.Q);
    d.V.push_back(m.V);
    d.X.push_back(m.X);
    d.Y.push_back(m.Y);
    d.T.push_back(m.T);
    d.P.push_back(m.P);
    d.Z.push_back(4.0 * m.X * (m.T + m.P) - 4.0 * m.Y * m.Y);
    d.K.push_back(0.5 * (m.V * m.V + m.T + m.P));
    tp.push_back(m.T + m.P);
    d.h1_min = std::min(d.h1_min, m.P * m.X - 0.25);
    d.h2_min = std::min(d.h2_min, m.T * m.X - m.Y * m.Y);
  }
  for (std::size_t k = 1; k < d.t.size(); ++k)
    require(d.t[k] > d.t[k - 1], ErrorKind::contract_violation,
            "diagnostics: snapshot times must increase");
  const double gamma = params.damping;
  d.zdot_max = -std::numeric_limits<double>::infinity();
  d.h2a_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < d.t.size(); ++k) {
    d.xdot_residual = std::max(d.xdot_residual, std::abs(centered(d.t, d.X, k) - 2.0 * d.Y[k]));
    d.ydot_residual =
        std::max(d.ydot_residual, std::abs(centered(d.t, d.Y, k) + gamma * d.Y[k] - tp[k]));
    d.tp_residual = std::max(d.tp_residual, std::abs(centered(d.t, tp, k) + 2.0 * gamma * d.T[k]));
    const double zdot = centered(d.t, d.Z, k);
    d.zdot_max = std::max(d.zdot_max, zdot);
    d.h2a_min = std::min(d.h2a_min, zdot + 2.0 * d.Z[k] - 2.0);
  }
  for (std::size_t k = 1; k < d.t.size(); ++k)
    if (d.t[k - 1] >= t_transient) d.k_increase_max = std::max(d.k_increase_max, d.K[k] - d.K[k - 1]);
  return d;
}

ExpectationFit expectation_laws(const DissipativeDiagnostics& d, double t_max) {
  require(!d.t.empty(), ErrorKind::insufficient_data, "expectation_laws: empty diagnostics");
  require(d.t.back() - d.t.front() >= 5.0 - 1e-9, ErrorKind::insufficient_data,
          "expectation_laws: run shorter than 5 time units");
  const double t0 = d.t.front(), q0 = d.Q.front(), v0 = d.V.front();
  std::vector<double> q, v, q_ref, v_ref;
  for (std::size_t k = 0; k < d.t.size() && d.t[k] <= t_max + 1e-12; ++k) {
    const double decay = std::exp(-(d.t[k] - t0));
    q.push_back(d.Q[k]);
    v.push_back(d.V[k]);
    q_ref.push_back(q0 + v0 * (1.0 - decay));
    v_ref.push_back(v0 * decay);
  }
  return {relative_deviation(q, q_ref), relative_deviation(v, v_ref)};
}

AsymptoticReport asymptotics(const DissipativeDiagnostics& d, double t_min, double t_max) {
  require(t_min >= 20.0, ErrorKind::contract_violation, "asymptotics: t_min must be >= 20");
  require(!d.t.empty() && d.t.back() >= t_max - 1e-9, ErrorKind::insufficient_data,
          "asymptotics: diagnostics end before t_max");
  AsymptoticReport r;
  std::vector<double> plateau;
  const double t_end = d.t.back();
  for (std::size_t k = 0; k < d.t.size(); ++k)
    if (d.t[k] >= t_end - 10.0 - 1e-9) plateau.push_back(d.Z[k]);
  double sum = 0.0;
  for (double z : plateau) sum += z;
  r.z_star = sum / static_cast<double>(plateau.size());
  const auto [lo, hi] = std::minmax_element(plateau.begin(), plateau.end());
  r.z_drift = (*hi - *lo) / std::abs(r.z_star);
  r.inconclusive = r.z_drift > 0.05;

  std::vector<double> t, x2, log_t, log_width, log_k;
  double k_sum = 0.0;
  for (std::size_t k = 0; k < d.t.size(); ++k) {
    if (d.t[k] < t_min - 1e-9 || d.t[k] > t_max + 1e-9) continue;
    t.push_back(d.t[k]);
    x2.push_back(d.X[k] * d.X[k]);
    log_t.push_back(std::log(d.t[k]));
    log_width.push_back(0.5 * std::log(d.X[k]));
    log_k.push_back(std::log(d.K[k]));
    k_sum += d.K[k] * std::sqrt(d.t[k]);
  }
  require(t.size() >= 3, ErrorKind::insufficient_data, "asymptotics: too few samples in window");
  const LinearFit fx = fit_line(t, x2);
  r.x2_slope = fx.slope;
  r.x2_intercept = fx.intercept;
  r.slope_ratio = fx.slope / r.z_star;
  r.k_prefactor = k_sum / static_cast<double>(t.size());
  r.k_ratio = r.k_prefactor / (std::sqrt(r.z_star) / 8.0);
  r.width_exponent = fit_line(log_t, log_width).slope;
  r.k_exponent = fit_line(log_t, log_k).slope;
  return r;
}

const char* to_string(DivergenceClass c) noexcept {
  return c == DivergenceClass::exponential ? "exponential" : "linear";
}

StationaryReport stationary_analysis(Complex c0, Complex c1, Complex c2, double L, int doublings) {
  require(L > 0.0 && doublings >= 2, ErrorKind::contract_violation,
          "stationary_analysis: need L > 0 and at least 2 doublings");
  auto r_of = [&](double x) { return c1 * std::exp(c0 * x) + c2 * std::exp(-c0 * x); };
  const double growth = std::abs(c0.real());
  StationaryReport out;
  double length = L;
  for (int k = 0; k <= doublings; ++k, length *= 2.0) {
    if (k > 1 && 2.0 * growth * length > 600.0) break;
    double scale = 0.0, imag = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const Complex r = r_of(-length + 2.0 * length * i / 400.0);
      scale = std::max(scale, std::abs(r));
      imag = std::max(imag, std::abs(r.imag()));
    }
    require(imag <= 1e-10 * std::max(scale, 1e-300), ErrorKind::domain,
            "stationary_analysis: parameters give a complex R");
    auto density = [&](double x) {
      const double r = r_of(x).real();
      return r * r;
    };
    const double n = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        density, -length, length, 20, 1e-12);
    out.lengths.push_back(length);
    out.norms.push_back(n);
  }
  require(out.norms.size() >= 3, ErrorKind::contract_violation,
          "stationary_analysis: L too large for the growth rate");
  const std::size_t m = out.norms.size();
  const double ratio = out.norms[m - 1] / out.norms[m - 2];
  if (ratio > 2.5) {
    out.divergence = DivergenceClass::exponential;
    out.rate = (std::log(out.norms[m - 1]) - std::log(out.norms[m - 2])) /
               (out.lengths[m - 1] - out.lengths[m - 2]);
  } else {
    out.divergence = DivergenceClass::linear;
    out.rate = out.norms[m - 1] / (2.0 * out.lengths[m - 1]);
  }
  out.normalizable = !(out.norms[m - 1] > 1.5 * out.norms[m - 2]);
  return out;
}

}  // namespace absqm
