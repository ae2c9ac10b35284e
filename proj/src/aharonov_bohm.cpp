#include "absqm/aharonov_bohm.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace absqm {

namespace {

// Everything the matching needs at one trial lambda.
struct Trial {
  double lambda, kappa, mu, nu;
  // Exterior F(r) = Y(lambda r_out) J(lambda r) - J(lambda r_out) Y(lambda r).
  double y_out, j_out;
  // Interior log-derivative kappa I'(kappa b) / I(kappa b).
  double log_slope_in;
};

double kappa_squared(const ABConfig& cfg, double lambda) {
  return 2.0 * cfg.phi0 + cfg.B0 * cfg.C1 - lambda * lambda;
}

Trial make_trial(const ABConfig& cfg, double lambda) {
  Trial t{};
  t.lambda = lambda;
  t.kappa = std::sqrt(kappa_squared(cfg, lambda));
  t.mu = std::abs(cfg.C1);
  t.nu = std::abs(cfg.c2());
  t.y_out = bessel(BesselKind::Y, t.nu, lambda * cfg.r_out);
  t.j_out = bessel(BesselKind::J, t.nu, lambda * cfg.r_out);
  const double kb = t.kappa * cfg.b;
  t.log_slope_in = t.kappa * bessel_derivative(BesselKind::I, t.mu, kb) / bessel(BesselKind::I, t.mu, kb);
  return t;
}

double exterior(const Trial& t, double r) {
  const double x = t.lambda * r;
  return t.y_out * bessel(BesselKind::J, t.nu, x) - t.j_out * bessel(BesselKind::Y, t.nu, x);
}

double exterior_slope(const Trial& t, double r) {
  const double x = t.lambda * r;
  return t.lambda * (t.y_out * bessel_derivative(BesselKind::J, t.nu, x) -
                     t.j_out * bessel_derivative(BesselKind::Y, t.nu, x));
}

// F'(b) - g'(b) F(b), scaled to lie in [-1, 1]; continuous in lambda.
double determinant(const ABConfig& cfg, double lambda) {
  const Trial t = make_trial(cfg, lambda);
  const double f = exterior(t, cfg.b), fp = exterior_slope(t, cfg.b);
  const double a = fp, c = t.log_slope_in * f;
  return (a - c) / std::hypot(a, c);
}

double phi_of(const ABConfig& cfg, double r) {
  return r < cfg.b ? cfg.phi0 - cfg.B0 * cfg.B0 * r * r / 8.0 : 0.0;
}

template <class F>
double quad(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace

void ABConfig::validate() const {
  require(b > 0.0 && std::isfinite(b), ErrorKind::contract_violation, "AB config: b must be positive");
  require(r_out >= 3.0 * b, ErrorKind::contract_violation, "AB config: r_out must be at least 3 b");
  require(phi0 >= 0.0 && std::isfinite(phi0), ErrorKind::contract_violation,
          "AB config: phi0 must be non-negative");
  require(std::isfinite(B0) && std::isfinite(C1) && std::isfinite(uz), ErrorKind::contract_violation,
          "AB config: B0, C1 and uz must be finite");
  require(n_r >= 8, ErrorKind::contract_violation, "AB config: n_r must be at least 8");
}

double u_theta_profile(const ABConfig& cfg, double r) {
  require(r > 0.0, ErrorKind::domain, "u_theta_profile: r must be positive");
  if (r < cfg.b) return 0.5 * cfg.B0 * r + cfg.C1 / r;
  return cfg.c2() / r;
}

double radial_amplitude(const RadialABSolution& s, const ABConfig& cfg, double r) {
  require(r > 0.0, ErrorKind::domain, "radial_amplitude: r must be positive");
  if (r < cfg.b) return s.C3 * bessel(BesselKind::I, s.mu, s.kappa * r);
  const double x = s.lambda * r;
  return s.C5 * bessel(BesselKind::J, s.nu, x) + s.C6 * bessel(BesselKind::Y, s.nu, x);
}

double radial_slope(const RadialABSolution& s, const ABConfig& cfg, double r) {
  require(r > 0.0, ErrorKind::domain, "radial_slope: r must be positive");
  if (r < cfg.b) return s.C3 * s.kappa * bessel_derivative(BesselKind::I, s.mu, s.kappa * r);
  const double x = s.lambda * r;
  return s.lambda * (s.C5 * bessel_derivative(BesselKind::J, s.nu, x) +
                     s.C6 * bessel_derivative(BesselKind::Y, s.nu, x));
}

RadialABSolution solve_radial(const ABConfig& cfg, int branch) {
  cfg.validate();
  require(branch >= 0, ErrorKind::contract_violation, "solve_radial: branch must be >= 0");
  const double top = 2.0 * cfg.phi0 + cfg.B0 * cfg.C1;
  require(top > 0.0, ErrorKind::not_evanescent,
          "solve_radial: phi0 + B0 C1 / 2 <= 0 leaves no energy with an evanescent interior");
  const double lambda_max = std::sqrt(top) * (1.0 - 1e-12);
  require(lambda_max * cfg.b <= kBesselMaxArgument, ErrorKind::range,
          "solve_radial: wall too high for the Bessel range");

  const double step = std::numbers::pi / (cfg.r_out - cfg.b) / 16.0;
  double lo = 0.25 * step;
  double d_lo = determinant(cfg, lo);
  int found = -1;
  double hi = lo;
  while (true) {
    hi = std::min(lo + step, lambda_max);
    const double d_hi = determinant(cfg, hi);
    if (d_lo == 0.0 || (d_lo < 0.0) != (d_hi < 0.0)) {
      if (++found == branch) break;
    }
    require(hi < lambda_max, ErrorKind::branch_not_found,
            "solve_radial: branch " + std::to_string(branch) + " not found below the wall (" +
                std::to_string(found + 1) + " found)");
    lo = hi;
    d_lo = d_hi;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double d_mid = determinant(cfg, mid);
    if ((d_mid < 0.0) == (d_lo < 0.0)) {
      lo = mid;
      d_lo = d_mid;
    } else {
      hi = mid;
    }
  }
  const double lambda = 0.5 * (lo + hi);
  const Trial t = make_trial(cfg, lambda);

  RadialABSolution s;
  s.lambda = lambda;
  s.kappa = t.kappa;
  s.mu = t.mu;
  s.nu = t.nu;
  s.E = 0.5 * lambda * lambda + 0.5 * cfg.uz * cfg.uz;
  s.bracket_width = 0.5 * (hi * hi - lo * lo);
  s.determinant = determinant(cfg, lambda);

  // Unnormalized: exterior F, interior F(b) I(kappa r) / I(kappa b).
  const double f_b = exterior(t, cfg.b);
  const double mass_in = quad(
      [&](double r) {
        const double g = bessel(BesselKind::I, t.mu, t.kappa * r) / bessel(BesselKind::I, t.mu, t.kappa * cfg.b);
        return f_b * f_b * g * g * r;
      },
      0.0, cfg.b);
  const double mass_out = quad(
      [&](double r) {
        const double f = exterior(t, r);
        return f * f * r;
      },
      cfg.b, cfg.r_out);
  const double scale = 1.0 / std::sqrt(mass_in + mass_out);
  s.C5 = scale * t.y_out;
  s.C6 = -scale * t.j_out;
  s.C3 = scale * f_b / bessel(BesselKind::I, t.mu, t.kappa * cfg.b);
  s.interior_mass = scale * scale * mass_in;

  const double r_in = cfg.b * (1.0 - 1e-15);
  s.value_jump = radial_amplitude(s, cfg, cfg.b) - s.C3 * bessel(BesselKind::I, s.mu, s.kappa * r_in);
  s.slope_jump = radial_slope(s, cfg, cfg.b) - s.C3 * s.kappa * bessel_derivative(BesselKind::I, s.mu, s.kappa * r_in);

  const std::size_t n = static_cast<std::size_t>(cfg.n_r);
  s.r.resize(n);
  s.R.resize(n);
  s.u_theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = cfg.r_out * static_cast<double>(i + 1) / static_cast<double>(n);
    s.r[i] = r;
    s.R[i] = radial_amplitude(s, cfg, r);
    s.u_theta[i] = u_theta_profile(cfg, r);
  }
  return s;
}

double radial_residual(const RadialABSolution& s, const ABConfig& cfg) {
  const double scale = max_abs(s.R);
  double worst = 0.0;
  for (double r : s.r) {
    const double h = std::min(0.01 / std::max(r < cfg.b ? s.kappa : s.lambda, 1.0), r / 100.0);
    if (std::abs(r - cfg.b) <= 2.0 * h) continue;
    auto R = [&](double x) { return radial_amplitude(s, cfg, x); };
    const double f0 = R(r), fm1 = R(r - h), fp1 = R(r + h), fm2 = R(r - 2 * h), fp2 = R(r + 2 * h);
    const double d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h);
    const double d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h);
    const double u = u_theta_profile(cfg, r);
    const double coeff = u * u + cfg.uz * cfg.uz - 2.0 * (s.E - phi_of(cfg, r));
    worst = std::max(worst, std::abs(d2 + d1 / r - coeff * f0));
  }
  return worst / scale;
}

WallSweepReport wall_sweep(const ABConfig& base, std::span<const double> phi0_ladder, int branch) {
  require(phi0_ladder.size() >= 4, ErrorKind::contract_violation, "wall_sweep needs at least 4 wall heights");
  for (std::size_t k = 1; k < phi0_ladder.size(); ++k)
    require(phi0_ladder[k] > phi0_ladder[k - 1], ErrorKind::contract_violation,
            "wall_sweep: ladder must increase");
  WallSweepReport out;
  for (int k = 1; k <= 4; ++k) out.interior_r.push_back(base.b * k / 4.0 * (k == 4 ? 1.0 - 1e-12 : 1.0));
  std::vector<double> log_kappa, log_mass;
  for (double phi0 : phi0_ladder) {
    ABConfig cfg = base;
    cfg.phi0 = phi0;
    const RadialABSolution s = solve_radial(cfg, branch);
    WallSweepRow row;
    row.phi0 = phi0;
    row.E = s.E;
    row.kappa = s.kappa;
    row.interior_mass = s.interior_mass;
    for (std::size_t i = 0; i < s.r.size() && s.r[i] < cfg.b; ++i)
      row.max_interior_R = std::max(row.max_interior_R, std::abs(s.R[i]));
    for (double r : out.interior_r) row.u_theta_interior.push_back(u_theta_profile(cfg, r));
    out.rows.push_back(row);
    log_kappa.push_back(std::log(s.kappa));
    log_mass.push_back(std::log(s.interior_mass));
  }
  out.u_theta_identical = true;
  out.mass_decreasing = true;
  for (std::size_t k = 1; k < out.rows.size(); ++k) {
    out.u_theta_identical = out.u_theta_identical && out.rows[k].u_theta_interior == out.rows[0].u_theta_interior;
    out.mass_decreasing = out.mass_decreasing && out.rows[k].interior_mass < out.rows[k - 1].interior_mass;
  }
  out.mass_exponent = fit_line(log_kappa, log_mass).slope;
  return out;
}

}  // namespace absqm
