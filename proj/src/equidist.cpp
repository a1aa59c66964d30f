#include "widthlab/equidist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace widthlab::equidist {

namespace {

constexpr double kPivotTol = 1e-12;

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct PhaseOne {
  std::vector<double> x;     // one per column
  std::vector<double> dual;  // one per row
  double objective = 0.0;
};

// min sum(a) s.t. A x + a = b, x, a >= 0 with b >= 0. cols[j] is column j of A.
PhaseOne phase_one(const std::vector<std::vector<double>>& cols, const std::vector<double>& b) {
  const std::size_t rows = b.size();
  const std::size_t m = cols.size();
  const std::size_t width = m + rows + 1;  // structural, artificial, rhs
  std::vector<std::vector<double>> t(rows + 1, std::vector<double>(width, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) t[i][j] = cols[j][i];
    t[i][m + i] = 1.0;
    t[i][width - 1] = b[i];
    basis[i] = m + i;
  }
  // reduced costs in the last row; its rhs entry holds -objective
  auto& obj = t[rows];
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) obj[j] -= t[i][j];
    obj[width - 1] -= t[i][width - 1];
  }

  const std::size_t max_iter = 1000 * (rows + m + 1);
  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_iter) throw NumericalError("simplex failed to terminate");
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (obj[j] < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;
    std::size_t leave = rows;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
      if (t[i][enter] > kPivotTol) {
        const double ratio = t[i][width - 1] / t[i][enter];
        if (ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && leave < rows && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave == rows) throw NumericalError("phase-one simplex is unbounded");
    const double piv = t[leave][enter];
    for (double& v : t[leave]) v /= piv;
    for (std::size_t i = 0; i <= rows; ++i) {
      if (i == leave) continue;
      const double f = t[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }

  PhaseOne out;
  out.x.assign(m, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (basis[i] < m) out.x[basis[i]] = std::max(0.0, t[i][width - 1]);
  }
  out.dual.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) out.dual[i] = 1.0 - obj[m + i];
  out.objective = -obj[width - 1];
  return out;
}

std::string mismatch(const char* what) {
  std::ostringstream os;
  os << what << ": measures must share one ground set";
  return os.str();
}

void check_ground(const FiniteMeasure& mu0, const std::vector<FiniteMeasure>& Y, const char* op) {
  if (Y.empty()) throw ValidationError(std::string(op) + ": family is empty");
  for (const auto& y : Y) {
    if (y.size() != mu0.size()) throw ValidationError(mismatch(op));
  }
}

}  // namespace

FiniteMeasure::FiniteMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ValidationError("measure needs a non-empty ground set");
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("measure weights must be finite and >= 0");
    mass_ += w;
  }
}

std::vector<double> FiniteMeasure::normalized() const {
  if (!(mass_ > 0.0)) throw ValidationError("cannot normalize a measure of zero mass");
  std::vector<double> v = weights_;
  for (double& x : v) x /= mass_;
  return v;
}

double pair(const std::vector<double>& f, const FiniteMeasure& mu) {
  if (f.size() != mu.size()) throw ValidationError("functional and measure sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * mu[i];
  return s;
}

void MeasureFamily::validate() const {
  if (members.empty()) throw ValidationError("measure family must be non-empty");
  const std::size_t n = members.front().size();
  for (const auto& m : members) {
    if (m.size() != n) throw ValidationError("family members must share one ground set");
  }
  if (!structure) return;
  const auto& s = *structure;
  if (s.W.empty()) throw ValidationError("structure needs a non-empty base set W");
  if (s.multiplicity_bound < 1) throw ValidationError("multiplicity bound must be >= 1");
  if (!(s.mass_lower > 0.0) || !(s.mass_lower <= s.mass_upper)) {
    throw ValidationError("mass bounds must satisfy 0 < c <= C");
  }
  for (const auto& w : s.W) {
    if (w.size() != n) throw ValidationError("base measures must share the ground set");
    if (w.total_mass() < s.mass_lower || w.total_mass() > s.mass_upper) {
      std::ostringstream os;
      os << "base measure of mass " << w.total_mass() << " violates the mass bounds ["
         << s.mass_lower << ", " << s.mass_upper << "]";
      throw ValidationError(os.str());
    }
  }
  // Each member must be sum n_i w_i with 0 <= n_i <= D; enumerate.
  const auto base = static_cast<std::size_t>(s.multiplicity_bound) + 1;
  double combos = 1.0;
  for (std::size_t i = 0; i < s.W.size(); ++i) combos *= static_cast<double>(base);
  if (combos > 1e7) throw ValidationError("structured family too large to verify");
  for (const auto& y : members) {
    const double scale = std::max(1.0, sup_norm(y.weights()));
    std::vector<std::size_t> mult(s.W.size(), 0);
    bool found = false;
    while (true) {
      double err = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        double v = 0.0;
        for (std::size_t i = 0; i < s.W.size(); ++i) v += static_cast<double>(mult[i]) * s.W[i][x];
        err = std::max(err, std::abs(v - y[x]));
      }
      if (err <= 1e-9 * scale) {
        found = true;
        break;
      }
      std::size_t k = 0;
      while (k < mult.size() && ++mult[k] == base) mult[k++] = 0;
      if (k == mult.size()) break;
    }
    if (!found) throw ValidationError("a member does not decompose over W within the multiplicity bound");
  }
}

std::string to_string(Verdict v) { return v == Verdict::kMember ? "member" : "non_member"; }

MembershipCertificate cone_hull_membership(const FiniteMeasure& mu0, const MeasureFamily& Y,
                                           double tol) {
  if (!(tol > 0.0)) throw ValidationError("membership tolerance must be positive");
  Y.validate();
  check_ground(mu0, Y.members, "cone_hull_membership");
  const std::size_t n = mu0.size();
  if (n > 64) throw ValidationError("cone_hull_membership supports at most 64 points");

  std::vector<std::size_t> live;
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < Y.members.size(); ++j) {
    if (Y.members[j].total_mass() > 0.0) {
      live.push_back(j);
      cols.push_back(Y.members[j].normalized());
    }
  }
  if (live.empty()) throw ValidationError("family consists of zero measures only");

  MembershipCertificate cert;
  cert.tol = tol;
  const double scale = std::max(1.0, sup_norm(mu0.weights()));
  if (mu0.total_mass() == 0.0) {
    cert.verdict = Verdict::kMember;
    return cert;
  }

  const auto lp = phase_one(cols, mu0.normalized());

  // Map normalized coefficients back to the original measures and check.
  std::vector<double> recon(n, 0.0);
  for (std::size_t k = 0; k < live.size(); ++k) {
    const double lambda = lp.x[k] * mu0.total_mass() / Y.members[live[k]].total_mass();
    if (lambda > 0.0) cert.coefficients.emplace_back(live[k], lambda);
    for (std::size_t x = 0; x < n; ++x) recon[x] += lambda * Y.members[live[k]][x];
  }
  double res = 0.0;
  for (std::size_t x = 0; x < n; ++x) res = std::max(res, std::abs(recon[x] - mu0[x]));
  cert.residual = res;
  if (res <= tol * scale) {
    cert.verdict = Verdict::kMember;
    return cert;
  }

  cert.verdict = Verdict::kNonMember;
  cert.coefficients.clear();
  std::vector<double> f = lp.dual;
  const double fmax = sup_norm(f);
  if (fmax > 0.0) {
    for (double& v : f) v /= fmax;
  }
  // Shift by constants until every member pairs non-positively as computed.
  for (int it = 0; it < 64; ++it) {
    double worst = 0.0;
    for (std::size_t j : live) {
      worst = std::max(worst, pair(f, Y.members[j]) / Y.members[j].total_mass());
    }
    if (worst <= 0.0) break;
    // below an ulp of f the subtraction would be a no-op
    const double floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, sup_norm(f));
    const double shift = std::max(worst * (1.0 + 1e-12), floor);
    for (double& v : f) v -= shift;
  }
  cert.f_dot_mu0 = pair(f, mu0);
  cert.max_f_dot_member = -std::numeric_limits<double>::infinity();
  for (const auto& y : Y.members) cert.max_f_dot_member = std::max(cert.max_f_dot_member, pair(f, y));
  if (!(cert.f_dot_mu0 > 0.0) || cert.max_f_dot_member > 0.0) {
    throw NumericalError("separating functional lost its margin; instance is ill-conditioned");
  }
  cert.separating_f = std::move(f);
  return cert;
}

bool condition_i_predicate(const FiniteMeasure& mu0, const MeasureFamily& Y,
                           const std::vector<double>& f) {
  if (pair(f, mu0) >= 0.0) return true;
  return std::any_of(Y.members.begin(), Y.members.end(),
                     [&](const FiniteMeasure& mu) { return pair(f, mu) <= 0.0; });
}

std::vector<double> condition_ii_violator(const FiniteMeasure& mu0, const std::vector<double>& f) {
  if (!(mu0.total_mass() > 0.0)) throw ValidationError("mu0 must have positive mass");
  const double mean = pair(f, mu0) / mu0.total_mass();
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = mean - f[i];
  return out;
}

RationalApproximation rational_approximation(const std::vector<double>& alphas, double eps) {
  if (alphas.empty()) throw ValidationError("rational_approximation needs at least one value");
  if (!(eps > 0.0)) throw ValidationError("rational_approximation requires eps > 0");
  double amin = std::numeric_limits<double>::infinity();
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("alphas must be positive and finite");
    amin = std::min(amin, a);
  }
  const double n = static_cast<double>(alphas.size());
  const double bound = eps / n;
  // rounding error is at most 1/(2d), and c_i >= 1 once d >= 1/(2 alpha_i)
  const double d_cap = std::ceil(n / (2.0 * eps)) + std::ceil(1.0 / amin) + 1.0;
  if (d_cap > 1e15) throw ValidationError("eps too small for a 64-bit denominator");

  auto fits = [&](std::int64_t d, std::vector<std::int64_t>& c) {
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      c[i] = std::llround(alphas[i] * static_cast<double>(d));
      if (c[i] < 1) return false;
      if (!(std::abs(alphas[i] - static_cast<double>(c[i]) / static_cast<double>(d)) < bound)) {
        return false;
      }
    }
    return true;
  };

  RationalApproximation out;
  out.c.resize(alphas.size());
  for (std::int64_t d = 1; static_cast<double>(d) <= d_cap; ++d) {
    if (fits(d, out.c)) {
      out.d = d;
      return out;
    }
  }
  throw NumericalError("rational_approximation found no denominator below its guarantee");
}

EquidistTrace greedy_plain(const FiniteMeasure& mu0, const std::vector<FiniteMeasure>& Y,
                           std::size_t k_max) {
  check_ground(mu0, Y, "cesaro_sequence");
  const std::size_t n = mu0.size();
  const auto target = mu0.normalized();
  std::vector<std::vector<double>> bars;
  for (const auto& y : Y) {
    if (!(y.total_mass() > 0.0)) throw ValidationError("every member needs positive mass");
    bars.push_back(y.normalized());
  }
  EquidistTrace tr;
  tr.sequence.reserve(k_max);
  tr.cesaro_errors.reserve(k_max);
  std::vector<double> sum(n, 0.0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double kk = static_cast<double>(k);
    std::size_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < bars.size(); ++j) {
      double err = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        err = std::max(err, std::abs((sum[x] + bars[j][x]) / kk - target[x]));
      }
      if (err < best_err) {
        best_err = err;
        best = j;
      }
    }
    for (std::size_t x = 0; x < n; ++x) sum[x] += bars[best][x];
    tr.sequence.push_back(best);
    tr.cesaro_errors.push_back(best_err);
  }
  return tr;
}

EquidistTrace greedy_weighted(const FiniteMeasure& mu0, const std::vector<FiniteMeasure>& W,
                              std::size_t k_max) {
  check_ground(mu0, W, "weighted_cesaro_structured");
  const std::size_t n = mu0.size();
  const auto target = mu0.normalized();
  for (const auto& w : W) {
    if (!(w.total_mass() > 0.0)) throw ValidationError("every base measure needs positive mass");
  }
  EquidistTrace tr;
  tr.sequence.reserve(k_max);
  tr.cesaro_errors.reserve(k_max);
  std::vector<double> sum(n, 0.0);
  double mass = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::size_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < W.size(); ++j) {
      const double total = mass + W[j].total_mass();
      double err = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        err = std::max(err, std::abs((sum[x] + W[j][x]) / total - target[x]));
      }
      if (err < best_err) {
        best_err = err;
        best = j;
      }
    }
    for (std::size_t x = 0; x < n; ++x) sum[x] += W[best][x];
    mass += W[best].total_mass();
    tr.sequence.push_back(best);
    tr.cesaro_errors.push_back(best_err);
  }
  return tr;
}

EquidistTrace cesaro_sequence(const FiniteMeasure& mu0, const MeasureFamily& Y, std::size_t k_max) {
  if (k_max < 1) throw ValidationError("cesaro_sequence requires k_max >= 1");
  if (!(mu0.total_mass() > 0.0)) throw ValidationError("mu0 must have positive mass");
  const auto cert = cone_hull_membership(mu0, Y);
  if (cert.verdict != Verdict::kMember) {
    throw ValidationError(
        "mu0 is not in the cone over the family; run cone_hull_membership for a certificate");
  }
  return greedy_plain(mu0, Y.members, k_max);
}

EquidistTrace weighted_cesaro_structured(const FiniteMeasure& mu0, const MeasureFamily& Y,
                                         std::size_t k_max) {
  if (!Y.structure) throw ValidationError("weighted_cesaro_structured needs a structured family");
  if (k_max < 1) throw ValidationError("weighted_cesaro_structured requires k_max >= 1");
  if (!(mu0.total_mass() > 0.0)) throw ValidationError("mu0 must have positive mass");
  Y.validate();
  MeasureFamily base;
  base.members = Y.structure->W;
  const auto cert = cone_hull_membership(mu0, base);
  if (cert.verdict != Verdict::kMember) {
    throw ValidationError(
        "mu0 is not in the cone over W; run cone_hull_membership for a certificate");
  }
  return greedy_weighted(mu0, Y.structure->W, k_max);
}

namespace {

struct Instance {
  FiniteMeasure mu0;
  MeasureFamily Y;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> n_dist(2, 6), m_dist(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = n_dist(rng);
  const std::size_t m = m_dist(rng);
  auto random_weights = [&] {
    std::vector<double> w(n);
    double mass = 0.0;
    for (double& x : w) {
      x = unit(rng) < 0.3 ? 0.0 : unit(rng);
      mass += x;
    }
    if (mass == 0.0) w[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 0.5 + unit(rng);
    return w;
  };
  Instance inst;
  for (std::size_t j = 0; j < m; ++j) inst.Y.members.emplace_back(random_weights());
  if (unit(rng) < 0.5) {
    std::vector<double> w(n, 0.0);
    bool any = false;
    for (const auto& y : inst.Y.members) {
      const double lambda = unit(rng) < 0.25 ? 0.0 : 2.0 * unit(rng);
      any = any || lambda > 0.0;
      for (std::size_t x = 0; x < n; ++x) w[x] += lambda * y[x];
    }
    if (!any) w = inst.Y.members.front().weights();
    inst.mu0 = FiniteMeasure(std::move(w));
  } else {
    inst.mu0 = FiniteMeasure(random_weights());
  }
  return inst;
}

TrialRecord run_trial(const HarnessConfig& cfg, std::size_t trial) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = splitmix64(cfg.seed ^ splitmix64(trial));
  std::mt19937_64 rng(rec.seed);
  const Instance inst = random_instance(rng);
  rec.n = inst.mu0.size();
  rec.m = inst.Y.members.size();
  auto flag = [&rec](const std::string& s) { rec.inconsistencies.push_back(s); };

  const auto cert = cone_hull_membership(inst.mu0, inst.Y);
  rec.lp = cert.verdict;
  const bool member = cert.verdict == Verdict::kMember;
  if (cfg.oracle) {
    rec.oracle_member = cfg.oracle(inst.mu0, inst.Y.members);
    if (*rec.oracle_member != member) flag("LP verdict disagrees with the membership oracle");
  }

  MeasureFamily structured = inst.Y;
  Structure s;
  s.W = inst.Y.members;
  s.multiplicity_bound = 1;
  s.mass_lower = std::numeric_limits<double>::infinity();
  s.mass_upper = 0.0;
  for (const auto& w : s.W) {
    s.mass_lower = std::min(s.mass_lower, w.total_mass());
    s.mass_upper = std::max(s.mass_upper, w.total_mass());
  }
  structured.structure = s;

  if (member) {
    const auto plain = cesaro_sequence(inst.mu0, inst.Y, cfg.k_max);
    const auto weighted = weighted_cesaro_structured(inst.mu0, structured, cfg.k_max);
    rec.plain_error = plain.cesaro_errors.back();
    rec.weighted_error = weighted.cesaro_errors.back();
    if (!(rec.plain_error < cfg.cesaro_threshold)) flag("plain Cesaro mean did not converge");
    if (!(rec.weighted_error < cfg.cesaro_threshold)) flag("weighted Cesaro mean did not converge");

    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (std::size_t q = 0; q < cfg.functionals; ++q) {
      std::vector<double> f(rec.n);
      for (double& v : f) v = coef(rng);
      if (!condition_i_predicate(inst.mu0, inst.Y, f)) flag("condition i) fails on a member");
    }
    double reconstructed = 0.0;
    for (const auto& [j, lambda] : cert.coefficients) {
      if (lambda < 0.0 || j >= rec.m) flag("member certificate has an invalid coefficient");
      reconstructed += lambda * inst.Y.members[j].total_mass();
    }
    if (std::abs(reconstructed - inst.mu0.total_mass()) > 1e-6 * inst.mu0.total_mass()) {
      flag("member certificate does not reproduce the mass of mu0");
    }
    return rec;
  }

  const auto& f = cert.separating_f;
  if (!(pair(f, inst.mu0) > 0.0)) flag("separating functional is not positive on mu0");
  for (const auto& y : inst.Y.members) {
    if (pair(f, y) > 0.0) flag("separating functional is positive on a member");
  }
  const auto f0 = condition_ii_violator(inst.mu0, f);
  const double scale = std::max(1.0, inst.mu0.total_mass()) * std::max(1.0, sup_norm(f));
  if (std::abs(pair(f0, inst.mu0)) > 1e-12 * scale) flag("f0 does not annihilate mu0");
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& y : inst.Y.members) {
    const double v = pair(f0, y);
    if (!(v > 0.0)) flag("f0 is not positive on a member, so ii) is not violated");
    margin = std::min(margin, v / y.total_mass());
  }
  if (margin > 0.0 && std::isfinite(margin)) {
    std::vector<double> g = f0;
    for (double& v : g) v -= 0.5 * margin;
    if (condition_i_predicate(inst.mu0, inst.Y, g)) flag("condition i) holds on a non-member");
  }

  // Every Cesaro mean lies in the convex hull of the normalized members.
  double l1 = 0.0;
  for (double v : f) l1 += std::abs(v);
  rec.hull_distance_lower_bound = pair(f, inst.mu0) / inst.mu0.total_mass() / l1;
  const auto plain = greedy_plain(inst.mu0, inst.Y.members, cfg.k_max);
  const auto weighted = greedy_weighted(inst.mu0, inst.Y.members, cfg.k_max);
  rec.plain_error = plain.cesaro_errors.back();
  rec.weighted_error = weighted.cesaro_errors.back();
  const double slack = 1e-12;
  if (rec.plain_error < rec.hull_distance_lower_bound - slack) {
    flag("plain Cesaro mean came closer to mu0 than the separation allows");
  }
  if (rec.weighted_error < rec.hull_distance_lower_bound - slack) {
    flag("weighted Cesaro mean came closer to mu0 than the separation allows");
  }
  return rec;
}

}  // namespace

HarnessReport equivalence_harness(const HarnessConfig& cfg) {
  if (cfg.trials < 1) throw ValidationError("equivalence_harness requires trials >= 1");
  if (cfg.k_max < 1) throw ValidationError("equivalence_harness requires k_max >= 1");
  HarnessReport rep;
  rep.seed = cfg.seed;
  rep.trials = cfg.trials;
  rep.records.resize(cfg.trials);
  numerics::parallel_for(cfg.trials, [&](std::size_t t) { rep.records[t] = run_trial(cfg, t); });
  for (const auto& r : rep.records) {
    if (r.lp == Verdict::kMember) {
      ++rep.members;
      rep.worst_member_plain_error = std::max(rep.worst_member_plain_error, r.plain_error);
      rep.worst_member_weighted_error = std::max(rep.worst_member_weighted_error, r.weighted_error);
    } else {
      ++rep.non_members;
    }
    rep.inconsistencies += r.inconsistencies.size();
  }
  return rep;
}

}  // namespace widthlab::equidist
