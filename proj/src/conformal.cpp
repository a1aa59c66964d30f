#include "widthlab/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace widthlab::conformal {

using numerics::CriticalKind;
using numerics::GridFunction;

namespace {

constexpr double kPi = std::numbers::pi;

double pow4(double x) {
  const double x2 = x * x;
  return x2 * x2;
}

// Inverse of the 7x7 Vandermonde matrix on the integer nodes -3..3, so that
// coefficients = inverse * samples.
const std::array<std::array<double, 7>, 7>& vandermonde_inverse() {
  static const auto inv = [] {
    std::array<std::array<double, 14>, 7> aug{};
    for (int r = 0; r < 7; ++r) {
      const double x = r - 3;
      double p = 1.0;
      for (int c = 0; c < 7; ++c) {
        aug[r][c] = p;
        p *= x;
      }
      aug[r][7 + r] = 1.0;
    }
    for (int col = 0; col < 7; ++col) {
      int piv = col;
      for (int r = col + 1; r < 7; ++r) {
        if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
      }
      std::swap(aug[col], aug[piv]);
      const double d = aug[col][col];
      for (double& v : aug[col]) v /= d;
      for (int r = 0; r < 7; ++r) {
        if (r == col) continue;
        const double f = aug[r][col];
        for (int c = 0; c < 14; ++c) aug[r][c] -= f * aug[col][c];
      }
    }
    // aug = [I | V^-1]; V maps monomial coefficients to samples
    std::array<std::array<double, 7>, 7> out{};
    for (int r = 0; r < 7; ++r) {
      for (int c = 0; c < 7; ++c) out[r][c] = aug[r][7 + c];
    }
    return out;
  }();
  return inv;
}

// Even reflection across both poles.
double reflected(const AxisymProfile& p, long j) {
  const long last = static_cast<long>(p.size()) - 1;
  if (j < 0) j = -j;
  if (j > last) j = 2 * last - j;
  return p[static_cast<std::size_t>(j)];
}

struct Legendre {
  double value;
  double derivative;
};

Legendre legendre(int k, double x) {
  if (k == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x;
  double d0 = 0.0, d1 = 1.0;
  for (int n = 2; n <= k; ++n) {
    const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
    const double d2 = d0 + (2.0 * n - 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

const numerics::GaussRule& sphere_rule() {
  static const numerics::GaussRule rule = numerics::gauss_legendre(96);
  return rule;
}

// Area of theta(omega) = theta_star + shift * P_k(x), x = cos(alpha) on S^2.
double graph_area(const LocalInterpolant& u, double theta_star, double shift, int k) {
  const auto& rule = sphere_rule();
  double sum = 0.0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const double x = rule.nodes[j];
    const auto [pk, dpk] = legendre(k, x);
    const double phi = theta_star + shift * pk;
    const double phi_alpha_sq = shift * shift * dpk * dpk * (1.0 - x * x);
    const double s = std::sin(phi);
    sum += rule.weights[j] * pow4(u.value(phi)) * s * std::sqrt(s * s + phi_alpha_sq);
  }
  return 2.0 * kPi * sum;
}

// A'(theta) / 4pi and its derivative from the local interpolant.
struct AreaSlope {
  double first;
  double second;
};

AreaSlope area_slope(const LocalInterpolant& li, double theta) {
  const double u = li.value(theta);
  const double du = li.derivative(theta);
  const double ddu = li.second_derivative(theta);
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double u3 = u * u * u;
  const double first = 4.0 * u3 * du * s * s + 2.0 * u3 * u * s * c;
  const double second = 12.0 * u * u * du * du * s * s + 4.0 * u3 * ddu * s * s +
                        16.0 * u3 * du * s * c + 2.0 * u3 * u * (c * c - s * s);
  return {first, second};
}

std::string pole_message(const char* pole, double jump, double limit) {
  std::ostringstream os;
  os << "profile is not regular at the " << pole << " pole: |du| = " << jump << " exceeds "
     << limit;
  return os.str();
}

}  // namespace

AxisymProfile::AxisymProfile(GridFunction u, std::string description)
    : u_(std::move(u)), description_(std::move(description)) {
  for (std::size_t i = 0; i < u_.size(); ++i) {
    if (!(u_[i] > 0.0)) throw ValidationError("conformal factor must be positive at every node");
  }
  const double h = u_.spacing();
  const double limit = kPoleRegularityConstant * h * h;
  const std::size_t n = u_.size();
  const double north = std::abs(u_[1] - u_[0]);
  const double south = std::abs(u_[n - 2] - u_[n - 1]);
  north_regular_ = north <= limit;
  south_regular_ = south <= limit;
  if (!north_regular_) throw ValidationError(pole_message("north", north, limit));
  if (!south_regular_) throw ValidationError(pole_message("south", south, limit));
}

AxisymProfile AxisymProfile::sample(const std::function<double(double)>& u, std::size_t n,
                                    std::string description) {
  return AxisymProfile(GridFunction::sample(u, n), std::move(description));
}

double AxisymProfile::value_linear(double theta) const {
  if (theta <= 0.0) return u_[0];
  if (theta >= kPi) return u_[u_.size() - 1];
  const double x = theta / spacing();
  const auto i = std::min(static_cast<std::size_t>(x), u_.size() - 2);
  const double t = x - static_cast<double>(i);
  return (1.0 - t) * u_[i] + t * u_[i + 1];
}

AxisymProfile AxisymProfile::scaled(double c) const {
  if (!(c > 0.0)) throw ValidationError("scale factor must be positive");
  std::vector<double> v(u_.values().begin(), u_.values().end());
  for (double& x : v) x *= c;
  return AxisymProfile(GridFunction(std::move(v)), description_);
}

LocalInterpolant::LocalInterpolant(const AxisymProfile& p, double theta) : h_(p.spacing()) {
  const long last = static_cast<long>(p.size()) - 1;
  const long centre = std::clamp(std::lround(theta / h_), 0L, last);
  centre_ = static_cast<double>(centre) * h_;
  std::array<double, 7> y{};
  for (int j = 0; j < 7; ++j) y[j] = reflected(p, centre + j - 3);
  const auto& inv = vandermonde_inverse();
  for (int m = 0; m < 7; ++m) {
    double s = 0.0;
    for (int j = 0; j < 7; ++j) s += inv[m][j] * y[j];
    coeff_[m] = s;
  }
}

double LocalInterpolant::value(double theta) const {
  const double x = (theta - centre_) / h_;
  double s = 0.0;
  for (int m = 6; m >= 0; --m) s = s * x + coeff_[m];
  return s;
}

double LocalInterpolant::derivative(double theta) const {
  const double x = (theta - centre_) / h_;
  double s = 0.0;
  for (int m = 6; m >= 1; --m) s = s * x + m * coeff_[m];
  return s / h_;
}

double LocalInterpolant::second_derivative(double theta) const {
  const double x = (theta - centre_) / h_;
  double s = 0.0;
  for (int m = 6; m >= 2; --m) s = s * x + m * (m - 1) * coeff_[m];
  return s / (h_ * h_);
}

GridFunction scalar_curvature_field(const AxisymProfile& p) {
  const std::size_t n = p.size();
  const double h = p.spacing();
  std::vector<double> r(n);
  // five-point stencils; ghosts come from the even reflection at the poles
  for (std::size_t i = 0; i < n; ++i) {
    const double u = p[i];
    if (!(u > 0.0)) throw ValidationError("conformal factor must be positive");
    const long j = static_cast<long>(i);
    const double um2 = reflected(p, j - 2), um1 = reflected(p, j - 1);
    const double up1 = reflected(p, j + 1), up2 = reflected(p, j + 2);
    const double ddu = (-up2 + 16.0 * up1 - 30.0 * u + 16.0 * um1 - um2) / (12.0 * h * h);
    double lap = 0.0;
    if (i == 0 || i + 1 == n) {
      lap = 3.0 * ddu;
    } else {
      const double du = (-up2 + 8.0 * up1 - 8.0 * um1 + um2) / (12.0 * h);
      lap = ddu + 2.0 * du / std::tan(static_cast<double>(i) * h);
    }
    const double u2 = u * u;
    r[i] = (-8.0 * lap + 6.0 * u) / (u2 * u2 * u);
  }
  return GridFunction(std::move(r));
}

double volume(const AxisymProfile& p) {
  const std::size_t n = p.size();
  const double h = p.spacing();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sin(static_cast<double>(i) * h);
    const double u2 = p[i] * p[i];
    f[i] = u2 * u2 * u2 * s * s;
  }
  f[n - 1] = 0.0;
  return 4.0 * kPi * numerics::trapezoid(f, h);
}

double sphere_area(const AxisymProfile& p, double theta) {
  if (theta < 0.0 || theta > kPi) throw ValidationError("sphere_area requires theta in [0, pi]");
  if (theta == 0.0 || theta == kPi) return 0.0;
  const double s = std::sin(theta);
  return 4.0 * kPi * pow4(p.value_linear(theta)) * s * s;
}

GridFunction area_profile(const AxisymProfile& p) {
  const std::size_t n = p.size();
  const double h = p.spacing();
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sin(static_cast<double>(i) * h);
    a[i] = 4.0 * kPi * pow4(p[i]) * s * s;
  }
  a[0] = 0.0;
  a[n - 1] = 0.0;
  return GridFunction(std::move(a));
}

double minimality_residual(const AxisymProfile& p, double theta) {
  const LocalInterpolant li(p, theta);
  return 4.0 * kPi * std::abs(area_slope(li, theta).first);
}

double second_variation_oracle(const AxisymProfile& p, double theta_star, int k, double eps,
                               double criticality_tol) {
  if (!(theta_star > 0.0 && theta_star < kPi)) {
    throw ValidationError("second_variation_oracle requires theta_star in (0, pi)");
  }
  if (k < 0) throw ValidationError("second_variation_oracle requires mode k >= 0");
  if (!(eps > 0.0)) throw ValidationError("second_variation_oracle requires eps > 0");

  const LocalInterpolant li(p, theta_star);
  const double u_star = li.value(theta_star);
  const double s = std::sin(theta_star);
  const double radius_sq = pow4(u_star) * s * s;
  const double area = 4.0 * kPi * radius_sq;
  const double residual = 4.0 * kPi * std::abs(area_slope(li, theta_star).first);
  if (residual > criticality_tol * area) {
    std::ostringstream os;
    os << "theta_star = " << theta_star << " is not a critical latitude (|A'|/A = "
       << residual / area << ")";
    throw ValidationError(os.str());
  }

  // unit normal is d/dtheta / u^2, so a normal displacement eps moves theta by eps / u^2
  const double shift = eps / (u_star * u_star);
  const double a0 = graph_area(li, theta_star, 0.0, k);
  auto second_diff = [&](double d) {
    return (graph_area(li, theta_star, d, k) - 2.0 * a0 + graph_area(li, theta_star, -d, k)) /
           (d * d);
  };
  // derivative with respect to the normal parameter: d/d(eps) = u^2 d/d(shift)
  const double coarse = second_diff(shift);
  const double fine = second_diff(0.5 * shift);
  const double d2_shift = (4.0 * fine - coarse) / 3.0;
  const double d2_eps = d2_shift / pow4(u_star);

  const double norm_sq = radius_sq * 4.0 * kPi / (2.0 * k + 1.0);
  return d2_eps / norm_sq;
}

JacobiSpectrum jacobi_spectrum(const AxisymProfile& p, double theta_star, int k_max,
                               double zero_tol) {
  if (k_max < 2) throw ValidationError("jacobi_spectrum requires k_max >= 2");
  const LocalInterpolant li(p, theta_star);
  const double u_star = li.value(theta_star);
  const double s = std::sin(theta_star);

  JacobiSpectrum out;
  out.induced_radius_sq = pow4(u_star) * s * s;
  const double lambda0 = second_variation_oracle(p, theta_star, 0, 1e-3 * u_star * u_star);
  if (!std::isfinite(lambda0)) throw NumericalError("jacobi_spectrum: Q extraction failed");
  out.Q = -lambda0;

  auto eigen = [&](int k) { return k * (k + 1.0) / out.induced_radius_sq - out.Q; };
  for (int k = 0; k <= k_max; ++k) out.eigenvalues.push_back(eigen(k));
  for (int k = 0;; ++k) {
    const double scaled = eigen(k) * out.induced_radius_sq;
    if (std::abs(scaled) <= zero_tol) {
      out.nullity += 2 * k + 1;
    } else if (scaled < 0.0) {
      out.index += 2 * k + 1;
    } else {
      break;  // eigenvalues increase with k
    }
  }
  return out;
}

std::vector<LatitudeSphere> minimal_coordinate_spheres(const AxisymProfile& p) {
  const GridFunction area = area_profile(p);
  const double h = p.spacing();
  std::vector<LatitudeSphere> out;
  for (const auto& cp : numerics::critical_points(area)) {
    const std::size_t i = cp.index;
    if (i == 0 || i + 1 == area.size()) continue;
    const double node = static_cast<double>(i) * h;
    double theta = node;
    const double d = area[i - 1] - 2.0 * area[i] + area[i + 1];
    if (d != 0.0) {
      const double off = 0.5 * (area[i - 1] - area[i + 1]) / d;
      if (std::abs(off) <= 1.0) theta = node + off * h;
    }
    const LocalInterpolant li(p, node);
    double refined = theta;
    bool ok = true;
    for (int it = 0; it < 20; ++it) {
      const auto slope = area_slope(li, refined);
      if (slope.second == 0.0) {
        ok = false;
        break;
      }
      const double step = slope.first / slope.second;
      refined -= step;
      if (std::abs(refined - node) > 1.5 * h) {
        ok = false;
        break;
      }
      if (std::abs(step) < 1e-15) break;
    }
    if (ok) theta = refined;

    LatitudeSphere sphere;
    sphere.theta = theta;
    sphere.kind = cp.kind;
    const LocalInterpolant at(p, theta);
    const double u = at.value(theta);
    const double s = std::sin(theta);
    sphere.induced_radius_sq = pow4(u) * s * s;
    sphere.area = 4.0 * kPi * sphere.induced_radius_sq;
    sphere.minimality_residual = 4.0 * kPi * std::abs(area_slope(at, theta).first);
    const auto spec = jacobi_spectrum(p, theta);
    sphere.jacobi_Q = spec.Q;
    sphere.index = spec.index;
    sphere.nullity = spec.nullity;
    out.push_back(sphere);
  }
  return out;
}

WidthMaximizer width_maximizer(const AxisymProfile& p) {
  const GridFunction area = area_profile(p);
  const auto v = area.values();
  const auto i = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const double h = p.spacing();
  WidthMaximizer m{static_cast<double>(i) * h, v[i]};
  if (i == 0 || i + 1 == v.size()) return m;
  const double a = v[i - 1], b = v[i], c = v[i + 1];
  const double d = a - 2.0 * b + c;
  if (d < 0.0) {
    const double off = 0.5 * (a - c) / d;
    m.theta += off * h;
    m.area = b - 0.25 * (a - c) * off;
  }
  return m;
}

double width_upper_bound(const AxisymProfile& p) { return width_maximizer(p).area; }

StarReport star_scan(const AxisymProfile& p) {
  StarReport r;
  r.width_upper_bound = width_upper_bound(p);
  r.minimal_spheres = minimal_coordinate_spheres(p);
  for (const auto& s : r.minimal_spheres) {
    if (s.index == 0 && s.nullity == 0 && s.area <= r.width_upper_bound) {
      r.star_holds_on_axisym_candidates = false;
    }
  }
  return r;
}

double curvature_integral_over_sphere(const AxisymProfile& p, double theta_star) {
  if (!(theta_star > 0.0 && theta_star < kPi)) {
    throw ValidationError("curvature_integral_over_sphere requires theta in (0, pi)");
  }
  const GridFunction r = scalar_curvature_field(p);
  const double x = theta_star / p.spacing();
  const auto i = std::min(static_cast<std::size_t>(x), p.size() - 2);
  const double t = x - static_cast<double>(i);
  const double r_star = (1.0 - t) * r[i] + t * r[i + 1];
  return r_star * sphere_area(p, theta_star);
}

IsoperimetricCheck isoperimetric_check(const AxisymProfile& p, double tol) {
  IsoperimetricCheck c;
  c.tol = tol;
  c.max_profile_area = width_upper_bound(p);
  c.round_equator_area_same_volume =
      4.0 * kPi * std::pow(volume(p) / (2.0 * kPi * kPi), 2.0 / 3.0);
  c.pass = c.max_profile_area <= c.round_equator_area_same_volume + tol;
  const GridFunction r = scalar_curvature_field(p);
  c.scalar_curvature_positive =
      std::all_of(r.values().begin(), r.values().end(), [](double x) { return x > 0.0; });
  return c;
}

GreatSphereCheck great_sphere_average_check(const AmbientFunction& f, std::int64_t samples,
                                            std::uint64_t seed) {
  if (samples < 1000) throw ValidationError("great_sphere_average_check needs >= 1000 samples");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&] {
    std::array<double, 4> x{};
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& c : x) {
        c = normal(rng);
        norm += c * c;
      }
    } while (norm < 1e-300);
    norm = std::sqrt(norm);
    for (double& c : x) c /= norm;
    return x;
  };

  // Product rule on S^2, exact for polynomials of degree <= 15.
  const auto zr = numerics::gauss_legendre(8);
  constexpr int kAzimuth = 16;

  double lhs = 0.0;
  for (std::int64_t s = 0; s < samples; ++s) {
    const auto nu = random_unit();
    // Householder reflection taking e4 to +-nu; its first three columns span nu-perp.
    std::array<double, 4> v = nu;
    const double sign = nu[3] >= 0.0 ? 1.0 : -1.0;
    v[3] += sign;
    double vv = 0.0;
    for (double c : v) vv += c * c;
    std::array<std::array<double, 4>, 3> basis{};
    for (int col = 0; col < 3; ++col) {
      for (int row = 0; row < 4; ++row) {
        basis[col][row] = (row == col ? 1.0 : 0.0) - 2.0 * v[row] * v[col] / vv;
      }
    }
    double mean = 0.0;
    for (std::size_t iz = 0; iz < zr.nodes.size(); ++iz) {
      const double z = zr.nodes[iz];
      const double rho = std::sqrt(1.0 - z * z);
      for (int ia = 0; ia < kAzimuth; ++ia) {
        const double phi = 2.0 * kPi * ia / kAzimuth;
        const double a = rho * std::cos(phi), b = rho * std::sin(phi);
        std::array<double, 4> x{};
        for (int row = 0; row < 4; ++row) {
          x[row] = a * basis[0][row] + b * basis[1][row] + z * basis[2][row];
        }
        mean += zr.weights[iz] * f(x);
      }
    }
    lhs += mean / (2.0 * kAzimuth);
  }
  lhs /= static_cast<double>(samples);

  double rhs = 0.0;
  for (std::int64_t s = 0; s < samples; ++s) rhs += f(random_unit());
  rhs /= static_cast<double>(samples);

  GreatSphereCheck out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.abs_err = std::abs(lhs - rhs);
  out.rel_err = rhs != 0.0 ? out.abs_err / std::abs(rhs) : out.abs_err;
  out.samples = samples;
  out.seed = seed;
  return out;
}

}  // namespace widthlab::conformal
