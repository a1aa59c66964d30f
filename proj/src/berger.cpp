#include "widthlab/berger.hpp"

#include <cmath>
#include <numbers>

namespace widthlab::berger {

using numerics::QuadratureConfig;

BergerParameter::BergerParameter(double rho) : rho_(rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("Berger parameter rho must be > 0");
}

double scalar_curvature(BergerParameter p) { return 8.0 - 2.0 * p.rho() * p.rho(); }

bool has_positive_ricci(BergerParameter p) { return p.rho() < std::numbers::sqrt2; }

double volume(BergerParameter p) { return 2.0 * std::numbers::pi * std::numbers::pi * p.rho(); }

double normalized_width(BergerParameter p, const QuadratureConfig& cfg) {
  const double vertical = std::pow(p.rho(), -4.0 / 3.0);
  const double horizontal = std::pow(p.rho(), 2.0 / 3.0);
  auto integrand = [=](double s) {
    const double sn = std::sin(s);
    const double cs = std::cos(s);
    return sn * std::sqrt(cs * cs * vertical + sn * sn * horizontal);
  };
  const double integral = numerics::integrate_adaptive(integrand, 0.0, std::numbers::pi, cfg);
  return std::cbrt(2.0 / std::numbers::pi) * integral;
}

double width(BergerParameter p, const QuadratureConfig& cfg) {
  return normalized_width(p, cfg) * std::pow(volume(p), 2.0 / 3.0);
}

BergerReport report(BergerParameter p, const QuadratureConfig& cfg) {
  BergerReport r{};
  r.rho = p.rho();
  r.scalar_curvature = scalar_curvature(p);
  r.ricci_positive = has_positive_ricci(p);
  r.volume = volume(p);
  r.normalized_width = normalized_width(p, cfg);
  r.width = r.normalized_width * std::pow(r.volume, 2.0 / 3.0);
  return r;
}

std::vector<BergerReport> scan(double rho_min, double rho_max, int n, const QuadratureConfig& cfg) {
  if (!(rho_min > 0.0) || !(rho_min < rho_max)) {
    throw ValidationError("scan requires 0 < rho_min < rho_max");
  }
  if (n < 2) throw ValidationError("scan requires n >= 2");
  cfg.validate();

  const double lo = std::log(rho_min);
  const double step = (std::log(rho_max) - lo) / static_cast<double>(n - 1);
  std::vector<BergerReport> out(static_cast<std::size_t>(n));
  numerics::parallel_for(out.size(), [&](std::size_t i) {
    double rho = std::exp(lo + step * static_cast<double>(i));
    if (i == 0) rho = rho_min;
    if (i + 1 == out.size()) rho = rho_max;
    out[i] = report(BergerParameter(rho), cfg);
  });
  return out;
}

LocalMinCertificate local_min_certificate(double h, const QuadratureConfig& cfg,
                                          double first_diff_tol) {
  if (!(h > 0.0 && h < 0.5)) throw ValidationError("local_min_certificate requires 0 < h < 0.5");
  auto nw = [&cfg](double rho) { return normalized_width(BergerParameter(rho), cfg); };
  LocalMinCertificate c{};
  c.h = h;
  c.first_diff = (nw(1.0 + h) - nw(1.0 - h)) / (2.0 * h);
  c.second_diff = numerics::central_second_difference(nw, 1.0, h);
  c.pass = std::abs(c.first_diff) < first_diff_tol && c.second_diff > 0.0;
  return c;
}

ScalarBoundCheck scalar_normalized_bound_check(BergerParameter p, const QuadratureConfig& cfg,
                                               double tol) {
  if (!(p.rho() < 2.0)) {
    throw ValidationError("scalar bound check requires rho < 2 (positive scalar curvature)");
  }
  ScalarBoundCheck c{};
  c.rho = p.rho();
  c.product = width(p, cfg) * scalar_curvature(p);
  c.bound = 24.0 * std::numbers::pi;
  c.tol = tol;
  c.pass = c.product <= c.bound + tol;
  c.equality = std::abs(c.product - c.bound) < tol;
  return c;
}

}  // namespace widthlab::berger
