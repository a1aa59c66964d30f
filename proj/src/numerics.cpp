#include "widthlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <thread>

namespace widthlab::numerics {

void QuadratureConfig::validate() const {
  if (!(abs_tol > 0.0)) throw ValidationError("quadrature abs_tol must be positive");
  if (max_depth < 1) throw ValidationError("quadrature max_depth must be >= 1");
}

namespace {

std::string quadrature_message(double estimate, double bound) {
  std::ostringstream os;
  os.precision(17);
  os << "adaptive quadrature exhausted its depth budget (estimate " << estimate
     << ", error bound " << bound << ")";
  return os.str();
}

struct Panel {
  double a, b;
  double fa, fm, fb;
  double whole;
  double tol;
  int depth;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

QuadratureError::QuadratureError(double best_estimate, double error_bound)
    : NumericalError(quadrature_message(best_estimate, error_bound)),
      best_estimate_(best_estimate),
      error_bound_(error_bound) {}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(a < b)) throw ValidationError("integrate_adaptive requires a < b");

  auto eval = [&f](double x) {
    const double y = f(x);
    if (!std::isfinite(y)) throw NumericalError("integrand is not finite");
    return y;
  };

  const double fa = eval(a);
  const double fb = eval(b);
  const double fm = eval(0.5 * (a + b));

  // Depth-first so that the summation order, and hence the result, is
  // deterministic.
  std::vector<Panel> stack;
  stack.push_back({a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), cfg.abs_tol, 0});

  double total = 0.0;
  double error = 0.0;
  bool exhausted = false;

  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();

    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = simpson(p.a, m, p.fa, flm, p.fm);
    const double right = simpson(m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;

    if (std::abs(delta) <= 15.0 * p.tol || p.depth + 1 >= cfg.max_depth) {
      if (std::abs(delta) > 15.0 * p.tol) exhausted = true;
      total += left + right + delta / 15.0;
      error += std::abs(delta) / 15.0;
      continue;
    }
    stack.push_back({m, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol, p.depth + 1});
    stack.push_back({p.a, m, p.fa, flm, p.fm, left, 0.5 * p.tol, p.depth + 1});
  }

  if (exhausted) throw QuadratureError(total, error);
  return total;
}

double central_second_difference(const std::function<double(double)>& f, double x, double h) {
  if (!(h > 0.0)) throw ValidationError("central_second_difference requires h > 0");
  const double lo = f(x - h);
  const double mid = f(x);
  const double hi = f(x + h);
  if (!std::isfinite(lo) || !std::isfinite(mid) || !std::isfinite(hi)) {
    throw NumericalError("central_second_difference: non-finite evaluation");
  }
  return (lo - 2.0 * mid + hi) / (h * h);
}

GridFunction::GridFunction(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 5) throw ValidationError("GridFunction needs at least 5 nodes");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("GridFunction values must be finite");
  }
}

GridFunction GridFunction::sample(const std::function<double(double)>& f, std::size_t n) {
  if (n < 5) throw ValidationError("GridFunction needs at least 5 nodes");
  std::vector<double> v(n);
  const double h = std::numbers::pi / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(static_cast<double>(i) * h);
  return GridFunction(std::move(v));
}

double GridFunction::spacing() const {
  return std::numbers::pi / static_cast<double>(values_.size() - 1);
}

double GridFunction::node(std::size_t i) const {
  if (i + 1 == values_.size()) return std::numbers::pi;
  return static_cast<double>(i) * spacing();
}

std::string to_string(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::kMax: return "max";
    case CriticalKind::kMin: return "min";
    case CriticalKind::kSaddleFlat: return "saddle-flat";
  }
  return "unknown";
}

std::vector<CriticalPoint> critical_points(const GridFunction& f, double flat_rel_tol) {
  const auto v = f.values();
  const std::size_t n = v.size();
  if (n < 5) throw ValidationError("critical_points needs at least 5 nodes");

  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double flat = flat_rel_tol * (*hi - *lo);

  // sign of each forward difference: +1, -1 or 0 (flat)
  std::vector<int> sign(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = v[i + 1] - v[i];
    sign[i] = std::abs(d) <= flat ? 0 : (d > 0 ? 1 : -1);
  }

  std::vector<CriticalPoint> out;
  std::size_t i = 0;
  while (i < sign.size()) {
    if (sign[i] != 0) {
      // strict interior extremum at node i+1
      if (i + 1 < sign.size() && sign[i + 1] != 0 && sign[i + 1] != sign[i]) {
        const double second = (v[i + 2] - v[i + 1]) - (v[i + 1] - v[i]);
        out.push_back({i + 1, second < 0 ? CriticalKind::kMax : CriticalKind::kMin});
      }
      ++i;
      continue;
    }
    // flat run sign[i..j)
    std::size_t j = i;
    while (j < sign.size() && sign[j] == 0) ++j;
    const int before = i > 0 ? sign[i - 1] : 0;
    const int after = j < sign.size() ? sign[j] : 0;
    const std::size_t mid = (i + j) / 2;
    if (before == 1 && after == -1) {
      out.push_back({mid, CriticalKind::kMax});
    } else if (before == -1 && after == 1) {
      out.push_back({mid, CriticalKind::kMin});
    } else {
      out.push_back({mid, CriticalKind::kSaddleFlat});
    }
    i = j;
  }
  return out;
}

GaussRule gauss_legendre(std::size_t order) {
  if (order < 1) throw ValidationError("gauss_legendre order must be >= 1");
  if (order == 1) return GaussRule{{0.0}, {2.0}};
  GaussRule rule{std::vector<double>(order), std::vector<double>(order)};
  const std::size_t half = (order + 1) / 2;
  for (std::size_t k = 0; k < half; ++k) {
    // Tricomi initial guess, then Newton on P_order
    double x = std::cos(std::numbers::pi * (static_cast<double>(k) + 0.75) /
                        (static_cast<double>(order) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t j = 2; j <= order; ++j) {
        const double jj = static_cast<double>(j);
        const double p2 = ((2.0 * jj - 1.0) * x * p1 - (jj - 1.0) * p0) / jj;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[k] = -x;
    rule.weights[k] = w;
    rule.nodes[order - 1 - k] = x;
    rule.weights[order - 1 - k] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

double trapezoid(std::span<const double> samples, double h) {
  if (samples.size() < 2) return 0.0;
  double s = 0.5 * (samples.front() + samples.back());
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) s += samples[i];
  return s * h;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("WIDTHLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t threads = std::min<std::size_t>(worker_threads(), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace widthlab::numerics
