#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "widthlab/numerics.hpp"

// Axisymmetric conformally round metrics g = u^4 g_1 on S^3, where u > 0 is a
// function of the polar angle theta in [0, pi] measured from the north pole.
namespace widthlab::conformal {

/// Positive conformal factor on the uniform latitude grid, regular at the
/// poles: |u_1 - u_0| and |u_{n-2} - u_{n-1}| are at most
/// kPoleRegularityConstant * h^2.
class AxisymProfile {
 public:
  static constexpr double kPoleRegularityConstant = 50.0;

  AxisymProfile() = default;
  explicit AxisymProfile(numerics::GridFunction u, std::string description = {});

  static AxisymProfile sample(const std::function<double(double)>& u, std::size_t n,
                              std::string description = {});

  const numerics::GridFunction& grid() const { return u_; }
  std::size_t size() const { return u_.size(); }
  double spacing() const { return u_.spacing(); }
  double operator[](std::size_t i) const { return u_[i]; }
  const std::string& description() const { return description_; }
  bool north_pole_regular() const { return north_regular_; }
  bool south_pole_regular() const { return south_regular_; }

  /// Piecewise-linear interpolation between nodes.
  double value_linear(double theta) const;

  /// The profile multiplied by c > 0 (metric scaled by c^4).
  AxisymProfile scaled(double c) const;

 private:
  numerics::GridFunction u_;
  std::string description_;
  bool north_regular_ = true;
  bool south_regular_ = true;
};

/// Degree-6 Lagrange interpolant through the seven nodes nearest a point,
/// with the even reflection of u across either pole.
class LocalInterpolant {
 public:
  LocalInterpolant(const AxisymProfile& p, double theta);

  double value(double theta) const;
  double derivative(double theta) const;
  double second_derivative(double theta) const;

 private:
  double centre_;
  double h_;
  std::array<double, 7> coeff_{};  // monomials in (theta - centre) / h
};

struct LatitudeSphere {
  double theta = 0.0;
  double area = 0.0;
  double minimality_residual = 0.0;
  double jacobi_Q = 0.0;
  double induced_radius_sq = 0.0;
  int index = 0;
  int nullity = 0;
  numerics::CriticalKind kind = numerics::CriticalKind::kMax;
};

struct JacobiSpectrum {
  std::vector<double> eigenvalues;  // k = 0..k_max, multiplicity 2k+1
  int index = 0;
  int nullity = 0;
  double Q = 0.0;
  double induced_radius_sq = 0.0;
};

struct StarReport {
  double width_upper_bound = 0.0;
  std::vector<LatitudeSphere> minimal_spheres;
  bool star_holds_on_axisym_candidates = true;
  std::string scope = "coordinate (latitude) spheres only";
};

struct IsoperimetricCheck {
  double max_profile_area = 0.0;
  double round_equator_area_same_volume = 0.0;
  bool pass = false;
  bool scalar_curvature_positive = false;
  double tol = 0.0;
};

struct GreatSphereCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

struct WidthMaximizer {
  double theta;
  double area;
};

/// R_g = u^-5 (-8 Lap_1 u + 6 u), Lap_1 u = u'' + 2 cot(theta) u'; at the
/// poles Lap_1 u = 3 u''. Fourth-order differences, mirror ghosts u_{-k} = u_k.
numerics::GridFunction scalar_curvature_field(const AxisymProfile& p);

/// 4 pi * int_0^pi u^6 sin^2 theta dtheta (trapezoid on the grid; the
/// integrand extends to a smooth even periodic function).
double volume(const AxisymProfile& p);

/// 4 pi u(theta)^4 sin^2 theta with u linearly interpolated.
double sphere_area(const AxisymProfile& p, double theta);

/// Area of each coordinate sphere at the grid nodes.
numerics::GridFunction area_profile(const AxisymProfile& p);

/// |A'(theta)| from the local interpolant.
double minimality_residual(const AxisymProfile& p, double theta);

/// Second difference in eps of the area of the normal graph
/// theta(omega) = theta_star + eps * P_k(cos alpha) / u(theta_star)^2, Richardson
/// extrapolated from eps and eps/2, divided by the L^2(Sigma) norm of P_k.
/// This is the Rayleigh quotient of the Jacobi form on the mode: for k = 0
/// it equals -Q.
double second_variation_oracle(const AxisymProfile& p, double theta_star, int k, double eps,
                               double criticality_tol = 1e-3);

/// lambda_k = k(k+1)/induced_radius_sq - Q with Q measured by the oracle.
/// Zero detection uses |lambda_k * induced_radius_sq| <= zero_tol, which is
/// invariant under u -> c u. Index and nullity count every k with
/// non-positive eigenvalue, even beyond k_max.
JacobiSpectrum jacobi_spectrum(const AxisymProfile& p, double theta_star, int k_max = 4,
                               double zero_tol = 1e-6);

/// One sphere per interior critical point of the area profile, located by
/// parabolic refinement then Newton on the local interpolant.
std::vector<LatitudeSphere> minimal_coordinate_spheres(const AxisymProfile& p);

/// Largest coordinate-sphere area (grid max refined by a parabola through
/// the three nodes around it). An upper bound for the width.
WidthMaximizer width_maximizer(const AxisymProfile& p);
double width_upper_bound(const AxisymProfile& p);

/// Property (star) restricted to coordinate spheres: fails iff some sphere
/// has index 0, nullity 0 and area <= width_upper_bound.
StarReport star_scan(const AxisymProfile& p);

/// R_g(theta_star) * area: R_g is constant on each latitude sphere.
double curvature_integral_over_sphere(const AxisymProfile& p, double theta_star);

IsoperimetricCheck isoperimetric_check(const AxisymProfile& p, double tol = 1e-3);

using AmbientFunction = std::function<double(const std::array<double, 4>&)>;

/// Round S^3: Monte Carlo mean over random great spheres of the sphere mean
/// of f (product Gauss rule on each sphere), against the Monte Carlo volume
/// mean of f. Both sides draw from one mt19937_64 stream seeded with seed.
GreatSphereCheck great_sphere_average_check(const AmbientFunction& f, std::int64_t samples,
                                            std::uint64_t seed);

}  // namespace widthlab::conformal
