#include "widthlab/yamabe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace widthlab::yamabe {

using numerics::GridFunction;

namespace {

constexpr double kPi = std::numbers::pi;

// Grid data shared by every step of a run.
struct Geometry {
  std::size_t n;
  double h;
  std::vector<double> sin2;
  std::vector<double> cot;

  explicit Geometry(std::size_t nodes) : n(nodes), h(kPi / static_cast<double>(nodes - 1)) {
    sin2.resize(n);
    cot.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = static_cast<double>(i) * h;
      const double s = std::sin(theta);
      sin2[i] = s * s;
      if (i > 0 && i + 1 < n) cot[i] = 1.0 / std::tan(theta);
    }
    sin2[n - 1] = 0.0;
  }
};

// Three-point stencils: the stable step below is sized for them. The
// reporting field in conformal uses five points.
void curvature(const std::vector<double>& u, const Geometry& g, std::vector<double>& r) {
  const std::size_t n = g.n;
  const double h2 = g.h * g.h;
  r.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lap = 0.0;
    if (i == 0) {
      lap = 6.0 * (u[1] - u[0]) / h2;
    } else if (i + 1 == n) {
      lap = 6.0 * (u[n - 2] - u[n - 1]) / h2;
    } else {
      const double du = (u[i + 1] - u[i - 1]) / (2.0 * g.h);
      const double ddu = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
      lap = ddu + 2.0 * du * g.cot[i];
    }
    const double u2 = u[i] * u[i];
    r[i] = (-8.0 * lap + 6.0 * u[i]) / (u2 * u2 * u[i]);
  }
}

// 4 pi * trapezoid of w u^6 sin^2 (w = 1 when empty).
double weighted_volume(const std::vector<double>& u, const Geometry& g,
                       const std::vector<double>* w = nullptr) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < g.n; ++i) {
    const double u2 = u[i] * u[i];
    const double v = u2 * u2 * u2 * g.sin2[i];
    s += w ? (*w)[i] * v : v;
  }
  return 4.0 * kPi * s * g.h;
}

double min_u4(const std::vector<double>& u) {
  const double m = *std::min_element(u.begin(), u.end());
  return m * m * m * m;
}

double sup_deviation(const std::vector<double>& r, double avg) {
  double m = 0.0;
  for (double x : r) m = std::max(m, std::abs(x - avg));
  return m;
}

struct Totals {
  double volume;
  double total_curvature;
};

Totals totals(const std::vector<double>& u, const std::vector<double>& r, const Geometry& g) {
  return {weighted_volume(u, g), weighted_volume(u, g, &r)};
}

conformal::LatitudeSphere max_sphere_of(const AxisymProfile& p) {
  const auto m = conformal::width_maximizer(p);
  conformal::LatitudeSphere s;
  s.theta = m.theta;
  s.area = m.area;
  s.induced_radius_sq = m.area / (4.0 * kPi);
  s.minimality_residual = conformal::minimality_residual(p, m.theta);
  s.kind = numerics::CriticalKind::kMax;
  const auto spec = conformal::jacobi_spectrum(p, m.theta);
  s.jacobi_Q = spec.Q;
  s.index = spec.index;
  s.nullity = spec.nullity;
  return s;
}

double interpolate(const GridFunction& f, double theta) {
  const double x = theta / f.spacing();
  const auto i = std::min(static_cast<std::size_t>(std::max(x, 0.0)), f.size() - 2);
  const double t = x - static_cast<double>(i);
  return (1.0 - t) * f[i] + t * f[i + 1];
}

}  // namespace

double average_scalar_curvature(const AxisymProfile& p) {
  const Geometry g(p.size());
  const std::vector<double> u(p.grid().values().begin(), p.grid().values().end());
  std::vector<double> r;
  curvature(u, g, r);
  const auto t = totals(u, r, g);
  return t.total_curvature / t.volume;
}

double hilbert_einstein_energy(const AxisymProfile& p) {
  const Geometry g(p.size());
  const std::vector<double> u(p.grid().values().begin(), p.grid().values().end());
  std::vector<double> r;
  curvature(u, g, r);
  const auto t = totals(u, r, g);
  return t.total_curvature / std::cbrt(t.volume);
}

double stable_step(const AxisymProfile& p) {
  const std::vector<double> u(p.grid().values().begin(), p.grid().values().end());
  return kStabilityConstant * p.spacing() * p.spacing() * min_u4(u);
}

FlowState make_state(const AxisymProfile& p, double time) {
  const Geometry g(p.size());
  const std::vector<double> u(p.grid().values().begin(), p.grid().values().end());
  std::vector<double> r;
  curvature(u, g, r);
  const auto t = totals(u, r, g);

  FlowState s;
  s.time = time;
  s.profile = p;
  s.volume = t.volume;
  s.r_avg = t.total_curvature / t.volume;
  s.energy = t.total_curvature / std::cbrt(t.volume);
  s.sup_R_minus_r = sup_deviation(r, s.r_avg);
  s.scalar_curvature = GridFunction(std::move(r));
  s.max_sphere = max_sphere_of(p);
  s.width_bound = s.max_sphere.area;
  return s;
}

namespace {

// Euler update plus renormalization to volume v0. Returns false on loss of
// positivity (u is then garbage).
bool advance(std::vector<double>& u, const std::vector<double>& r, double r_avg, double dt,
             double v0, const Geometry& g) {
  for (std::size_t i = 0; i < g.n; ++i) {
    u[i] += dt * 0.25 * u[i] * (r_avg - r[i]);
    if (!(u[i] > 0.0) || !std::isfinite(u[i])) return false;
  }
  const double scale = std::pow(v0 / weighted_volume(u, g), 1.0 / 6.0);
  for (double& x : u) x *= scale;
  return true;
}

std::string positivity_message(double t) {
  std::ostringstream os;
  os << "conformal factor lost positivity near t = " << t;
  return os.str();
}

}  // namespace

FlowState step(const FlowState& s, double dt) {
  if (!(dt > 0.0)) throw ValidationError("step requires dt > 0");
  const double limit = stable_step(s.profile);
  if (dt > limit) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds the stable step " << limit;
    throw ValidationError(os.str());
  }
  const Geometry g(s.profile.size());
  std::vector<double> u(s.profile.grid().values().begin(), s.profile.grid().values().end());
  std::vector<double> r;
  curvature(u, g, r);
  const auto t = totals(u, r, g);
  if (!advance(u, r, t.total_curvature / t.volume, dt, t.volume, g)) {
    throw FlowError(positivity_message(s.time + dt), s);
  }
  return make_state(AxisymProfile(GridFunction(std::move(u)), s.profile.description()),
                    s.time + dt);
}

FlowTrace run(const AxisymProfile& p0, const RunConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw ValidationError("run requires t_end > 0");
  if (!(cfg.dt > 0.0)) throw ValidationError("run requires dt > 0");
  if (!(cfg.sample_interval > 0.0)) throw ValidationError("run requires sample_interval > 0");
  if (!(cfg.conv_tol > 0.0)) throw ValidationError("run requires conv_tol > 0");

  const Geometry g(p0.size());
  std::vector<double> u(p0.grid().values().begin(), p0.grid().values().end());
  std::vector<double> r;
  curvature(u, g, r);
  auto tot = totals(u, r, g);
  const double v0 = tot.volume;
  double r_avg = tot.total_curvature / tot.volume;
  double energy = tot.total_curvature / std::cbrt(tot.volume);
  double sup = sup_deviation(r, r_avg);

  FlowTrace trace;
  trace.step_size = cfg.dt;
  trace.conv_tol = cfg.conv_tol;
  trace.states.push_back(make_state(p0, 0.0));
  if (sup < cfg.conv_tol) {
    trace.status = "converged";
    if (cfg.stop_on_convergence) return trace;
  }

  const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  const auto sample_every =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.sample_interval / cfg.dt)));
  const std::string& desc = p0.description();
  std::vector<double> previous;

  for (std::size_t k = 1; k <= steps; ++k) {
    const double limit = kStabilityConstant * g.h * g.h * min_u4(u);
    std::size_t m = 1;
    if (cfg.dt > limit) {
      if (!cfg.allow_substep) {
        std::ostringstream os;
        os << "dt = " << cfg.dt << " exceeds the stable step " << limit
           << " and substepping is disabled";
        throw ValidationError(os.str());
      }
      m = static_cast<std::size_t>(std::ceil(cfg.dt / limit));
    }
    trace.substeps = std::max(trace.substeps, m);
    const double sub = cfg.dt / static_cast<double>(m);

    StepMonitor mon;
    for (std::size_t j = 0; j < m; ++j) {
      previous = u;
      if (!advance(u, r, r_avg, sub, v0, g)) {
        const double t_prev = static_cast<double>(k - 1) * cfg.dt + static_cast<double>(j) * sub;
        throw FlowError(positivity_message(t_prev + sub),
                        make_state(AxisymProfile(GridFunction(previous), desc), t_prev));
      }
      curvature(u, g, r);
      tot = totals(u, r, g);
      r_avg = tot.total_curvature / tot.volume;
      const double e_new = tot.total_curvature / std::cbrt(tot.volume);
      mon.energy_increase = std::max(mon.energy_increase, e_new - energy);
      mon.volume_drift = std::max(mon.volume_drift, std::abs(tot.volume - v0) / v0);
      energy = e_new;
    }
    sup = sup_deviation(r, r_avg);
    const double t = static_cast<double>(k) * cfg.dt;
    mon.t = t;
    mon.energy = energy;
    mon.sup_R_minus_r = sup;
    trace.monitors.push_back(mon);

    const bool converged = sup < cfg.conv_tol;
    const bool stop = k == steps || (converged && cfg.stop_on_convergence);
    if (k % sample_every == 0 || stop) {
      trace.states.push_back(make_state(AxisymProfile(GridFunction(u), desc), t));
    }
    if (converged) trace.status = "converged";
    if (stop) break;
  }
  if (trace.status != "converged") trace.status = "t_end";
  return trace;
}

std::vector<DerivativeRecord> width_derivative_monitor(const FlowTrace& trace) {
  const auto& st = trace.states;
  if (st.size() < 3) throw ValidationError("width_derivative_monitor needs at least 3 states");
  std::vector<DerivativeRecord> out;
  for (std::size_t i = 1; i + 1 < st.size(); ++i) {
    DerivativeRecord rec;
    rec.t = st[i].time;
    rec.lhs = (st[i + 1].width_bound - st[i - 1].width_bound) / (st[i + 1].time - st[i - 1].time);
    const double r_star = interpolate(st[i].scalar_curvature, st[i].max_sphere.theta);
    rec.rhs = (st[i].r_avg - r_star) * st[i].width_bound;
    rec.residual = rec.lhs - rec.rhs;
    out.push_back(rec);
  }
  return out;
}

Theorem1Report theorem1_monitor(const FlowTrace& trace, double tol) {
  const auto& st = trace.states;
  if (st.empty()) throw ValidationError("theorem1_monitor needs a non-empty trace");
  Theorem1Report rep;
  rep.tol = tol;
  rep.bound = 24.0 * kPi;
  std::size_t best = 0;
  for (std::size_t i = 1; i < st.size(); ++i) {
    if (st[i].width_bound > st[best].width_bound) best = i;
  }
  rep.tau_star = st[best].time;
  rep.width_at_max = st[best].width_bound;
  rep.r_at_max = st[best].r_avg;
  rep.product_at_max = rep.width_at_max * rep.r_at_max;
  rep.pass = rep.product_at_max <= rep.bound + tol;

  const auto& last = st.back();
  rep.final_normalized_width = last.width_bound / std::pow(last.volume, 2.0 / 3.0);
  rep.round_normalized_width = std::cbrt(16.0 / kPi);
  rep.final_relative_deviation =
      std::abs(rep.final_normalized_width - rep.round_normalized_width) / rep.round_normalized_width;
  double min_r = last.r_avg;
  for (const auto& s : st) min_r = std::min(min_r, s.r_avg);
  rep.min_r_minus_final_r = min_r - last.r_avg;
  return rep;
}

AxisymProfile TestDirection::at(double t) const {
  const Geometry g(base.size());
  const std::vector<double> u(base.grid().values().begin(), base.grid().values().end());
  std::vector<double> w(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = 1.0 + f[i] * t;
    if (!(x > 0.0)) throw ValidationError("1 + f t must stay positive along the test family");
    w[i] = x;
  }
  std::vector<double> w32(g.n);
  for (std::size_t i = 0; i < g.n; ++i) w32[i] = w[i] * std::sqrt(w[i]);
  const double vt = weighted_volume(u, g, &w32);
  const double scale = std::pow(base_volume / vt, 1.0 / 6.0);
  std::vector<double> out(g.n);
  for (std::size_t i = 0; i < g.n; ++i) out[i] = u[i] * std::sqrt(std::sqrt(w[i])) * scale;
  return AxisymProfile(GridFunction(std::move(out)), base.description());
}

TestDirection maximum_test_direction(const AxisymProfile& p, const GridFunction& f) {
  if (f.size() != p.size()) throw ValidationError("test direction must live on the profile grid");
  const Geometry g(p.size());
  const std::vector<double> u(p.grid().values().begin(), p.grid().values().end());
  std::vector<double> fv(f.values().begin(), f.values().end());
  const double vol = weighted_volume(u, g);
  const double mean = weighted_volume(u, g, &fv) / vol;
  for (double& x : fv) x -= mean;

  TestDirection d;
  d.base = p;
  d.f = GridFunction(std::move(fv));
  d.base_volume = vol;
  const auto m = conformal::width_maximizer(p);
  d.theta_star = m.theta;
  d.trace_integral_over_max_sphere = interpolate(d.f, m.theta) * m.area;
  return d;
}

}  // namespace widthlab::yamabe
