#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace widthlab {

/// Precondition or input-validation failure. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure (positivity loss, depth exhaustion, ...). Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace widthlab

namespace widthlab::numerics {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  int max_depth = 50;

  void validate() const;
};

/// Thrown by integrate_adaptive when some subinterval hit max_depth before
/// meeting its share of the tolerance.
class QuadratureError : public NumericalError {
 public:
  QuadratureError(double best_estimate, double error_bound);

  double best_estimate() const { return best_estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double best_estimate_;
  double error_bound_;
};

/// Adaptive Simpson with Richardson extrapolation. Each accepted panel
/// satisfies |S2 - S1| <= 15 * local_tol, the local tolerance halving on
/// every bisection, so the summed error is bounded by abs_tol for smooth f.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureConfig& cfg);

/// (f(x-h) - 2 f(x) + f(x+h)) / h^2. Throws NumericalError on non-finite samples.
double central_second_difference(const std::function<double(double)>& f, double x, double h);

/// Values on the uniform latitude grid theta_i = i*pi/(n-1), i = 0..n-1.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(std::vector<double> values);

  static GridFunction sample(const std::function<double(double)>& f, std::size_t n);

  std::size_t size() const { return values_.size(); }
  double spacing() const;
  double node(std::size_t i) const;
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

enum class CriticalKind { kMax, kMin, kSaddleFlat };

struct CriticalPoint {
  std::size_t index;
  CriticalKind kind;
};

std::string to_string(CriticalKind kind);

/// Interior sign changes of the first difference, classified by the second
/// difference. Differences with |d| <= flat_rel_tol * (max - min) count as
/// zero; a flat run between a rise and a fall (or fall and rise) is reported
/// as a max (min) at its midpoint, any other flat run as saddle-flat.
std::vector<CriticalPoint> critical_points(const GridFunction& f, double flat_rel_tol = 1e-12);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(std::size_t order);

/// Composite trapezoid rule on uniform samples with spacing h.
double trapezoid(std::span<const double> samples, double h);

/// Number of worker threads honoured by parallel loops: WIDTHLAB_THREADS if
/// set to a positive integer, otherwise the hardware concurrency.
unsigned worker_threads();

/// Runs body(i) for i in [0, count) over worker_threads() threads. The body
/// must write only to slot i of its output; ordering of results is by index.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace widthlab::numerics
