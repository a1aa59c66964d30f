#pragma once

#include <vector>

#include "widthlab/numerics.hpp"

// One-parameter family of Berger metrics g_rho on S^3: the round metric with
// the Hopf field rescaled to norm rho.
namespace widthlab::berger {

class BergerParameter {
 public:
  explicit BergerParameter(double rho);
  double rho() const { return rho_; }

 private:
  double rho_;
};

struct BergerReport {
  double rho;
  double scalar_curvature;
  bool ricci_positive;
  double volume;
  double width;
  double normalized_width;
};

/// 8 - 2 rho^2.
double scalar_curvature(BergerParameter p);

/// Ricci curvature is positive exactly for 0 < rho < sqrt(2).
bool has_positive_ricci(BergerParameter p);

/// Riemannian volume 2 pi^2 rho (the Hopf fibres are stretched by rho).
double volume(BergerParameter p);

/// W / vol^(2/3) from the closed-form integral
///   (2/pi)^(1/3) * int_0^pi sin s * sqrt(cos^2 s * rho^(-4/3) + sin^2 s * rho^(2/3)) ds.
double normalized_width(BergerParameter p, const numerics::QuadratureConfig& cfg);

/// normalized_width * volume^(2/3): the area of the unique minimal sphere.
double width(BergerParameter p, const numerics::QuadratureConfig& cfg);

BergerReport report(BergerParameter p, const numerics::QuadratureConfig& cfg);

/// Reports at n log-spaced rho values in [rho_min, rho_max], ascending.
std::vector<BergerReport> scan(double rho_min, double rho_max, int n,
                               const numerics::QuadratureConfig& cfg);

struct LocalMinCertificate {
  double h;
  double first_diff;
  double second_diff;
  bool pass;
};

/// Central first and second differences of normalized_width at rho = 1.
/// pass requires |first_diff| < first_diff_tol and second_diff > 0.
LocalMinCertificate local_min_certificate(double h, const numerics::QuadratureConfig& cfg,
                                          double first_diff_tol = 1e-4);

struct ScalarBoundCheck {
  double rho;
  double product;
  double bound;
  bool pass;
  bool equality;
  double tol;
};

/// width * scalar_curvature against 24 pi. Requires 0 < rho < 2.
ScalarBoundCheck scalar_normalized_bound_check(BergerParameter p,
                                               const numerics::QuadratureConfig& cfg,
                                               double tol = 1e-4);

}  // namespace widthlab::berger
