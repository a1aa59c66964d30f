#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "widthlab/numerics.hpp"

// Measures on a finite set X = {0..n-1} as nonnegative weight vectors; the
// weak-* topology is the sup norm on weights.
namespace widthlab::equidist {

class FiniteMeasure {
 public:
  FiniteMeasure() = default;
  explicit FiniteMeasure(std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  double total_mass() const { return mass_; }
  /// weights / total_mass; throws on zero mass.
  std::vector<double> normalized() const;

 private:
  std::vector<double> weights_;
  double mass_ = 0.0;
};

double pair(const std::vector<double>& f, const FiniteMeasure& mu);

struct Structure {
  std::vector<FiniteMeasure> W;
  int multiplicity_bound = 1;
  double mass_lower = 0.0;
  double mass_upper = 0.0;
};

struct MeasureFamily {
  std::vector<FiniteMeasure> members;
  std::optional<Structure> structure;

  std::size_t ground_size() const { return members.empty() ? 0 : members.front().size(); }
  /// Non-empty, common ground set; when structured, mass bounds on W and a
  /// decomposition of every member as sum n_i w_i with 0 <= n_i <= D.
  void validate() const;
};

enum class Verdict { kMember, kNonMember };
std::string to_string(Verdict v);

struct MembershipCertificate {
  Verdict verdict = Verdict::kMember;
  std::vector<std::pair<std::size_t, double>> coefficients;  // member
  double residual = 0.0;                                    // sup norm, member
  std::vector<double> separating_f;                         // non-member
  double f_dot_mu0 = 0.0;
  double max_f_dot_member = 0.0;
  double tol = 0.0;
};

/// Phase-one simplex (Bland's rule) on sum_j lambda_j mu_j = mu0, lambda >= 0,
/// after normalizing every measure to unit mass. Member when the
/// reconstruction is within tol * max(1, |mu0|_inf); otherwise the phase-one
/// dual, shifted by a constant so that <f, mu> <= 0 holds as computed,
/// separates.
MembershipCertificate cone_hull_membership(const FiniteMeasure& mu0, const MeasureFamily& Y,
                                           double tol = 1e-9);

/// Vacuously true when <f, mu0> >= 0, else whether some member has <f, mu> <= 0.
bool condition_i_predicate(const FiniteMeasure& mu0, const MeasureFamily& Y,
                           const std::vector<double>& f);

/// <f, mu0> / mu0(X) - f for a separating f: zero against mu0, strictly
/// positive on every member of positive mass.
std::vector<double> condition_ii_violator(const FiniteMeasure& mu0, const std::vector<double>& f);

struct RationalApproximation {
  std::int64_t d = 1;
  std::vector<std::int64_t> c;
};

/// Smallest d with positive integers c_i = round(alpha_i d) such that
/// |alpha_i - c_i/d| < eps/N for all i. The bound is re-verified before
/// returning.
RationalApproximation rational_approximation(const std::vector<double>& alphas, double eps);

struct EquidistTrace {
  std::vector<std::size_t> sequence;
  std::vector<double> cesaro_errors;
};

/// Greedy choice of the member whose addition brings the mean of normalized
/// measures closest to normalized mu0 in sup norm (ties to the lowest
/// index). Refuses non-members.
EquidistTrace cesaro_sequence(const FiniteMeasure& mu0, const MeasureFamily& Y, std::size_t k_max);

/// Same greedy rule over the base set W with the mass-weighted mean
/// sum w_i / sum w_i(X).
EquidistTrace weighted_cesaro_structured(const FiniteMeasure& mu0, const MeasureFamily& Y,
                                         std::size_t k_max);

/// The greedy loops without the membership precondition.
EquidistTrace greedy_plain(const FiniteMeasure& mu0, const std::vector<FiniteMeasure>& Y,
                           std::size_t k_max);
EquidistTrace greedy_weighted(const FiniteMeasure& mu0, const std::vector<FiniteMeasure>& W,
                              std::size_t k_max);

using MembershipOracle =
    std::function<bool(const FiniteMeasure& mu0, const std::vector<FiniteMeasure>& Y)>;

struct HarnessConfig {
  std::uint64_t seed = 42;
  std::size_t trials = 200;
  std::size_t k_max = 10000;
  double cesaro_threshold = 5e-2;
  std::size_t functionals = 64;  // random f per trial for condition i)
  MembershipOracle oracle;      // optional independent check of iii)
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  Verdict lp = Verdict::kMember;
  std::optional<bool> oracle_member;
  double plain_error = 0.0;
  double weighted_error = 0.0;
  double hull_distance_lower_bound = 0.0;  // non-members: <f, mu0bar> / |f|_1
  std::vector<std::string> inconsistencies;
};

struct HarnessReport {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t members = 0;
  std::size_t non_members = 0;
  std::size_t inconsistencies = 0;
  double worst_member_plain_error = 0.0;
  double worst_member_weighted_error = 0.0;
  std::vector<TrialRecord> records;
};

/// Random instances (n <= 6, |Y| <= 5) from per-trial seeds derived from
/// cfg.seed; trials run in parallel and are reported in order.
HarnessReport equivalence_harness(const HarnessConfig& cfg);

}  // namespace widthlab::equidist
