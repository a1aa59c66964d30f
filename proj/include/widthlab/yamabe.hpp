#pragma once

#include <string>
#include <vector>

#include "widthlab/conformal.hpp"

// Normalized Yamabe flow d/dt g = (r - R) g on axisymmetric profiles. With
// g = u^4 g_1 this reads u_t = (u/4)(r - R).
namespace widthlab::yamabe {

using conformal::AxisymProfile;

struct FlowState {
  double time = 0.0;
  AxisymProfile profile;
  numerics::GridFunction scalar_curvature;
  double r_avg = 0.0;
  double energy = 0.0;
  double volume = 0.0;
  double width_bound = 0.0;
  conformal::LatitudeSphere max_sphere;
  double sup_R_minus_r = 0.0;
};

/// Per requested step; substeps are folded in (worst value over them).
struct StepMonitor {
  double t = 0.0;
  double volume_drift = 0.0;     // |V - V0| / V0 after renormalization
  double energy = 0.0;           // after the step
  double energy_increase = 0.0;  // max over substeps of E_new - E_old
  double sup_R_minus_r = 0.0;
};

struct FlowTrace {
  std::vector<FlowState> states;
  double step_size = 0.0;
  std::size_t substeps = 1;  // per requested step
  std::vector<StepMonitor> monitors;
  std::string status = "running";  // "converged" or "t_end"
  double conv_tol = 1e-3;
};

/// Carries the last state that passed every check.
class FlowError : public NumericalError {
 public:
  FlowError(const std::string& what, FlowState last_good)
      : NumericalError(what), last_good_(std::move(last_good)) {}
  const FlowState& last_good() const { return last_good_; }

 private:
  FlowState last_good_;
};

/// int R dV / V.
double average_scalar_curvature(const AxisymProfile& p);

/// int R dV / V^(1/3).
double hilbert_einstein_energy(const AxisymProfile& p);

/// Largest explicit-Euler step accepted by step():
/// kStabilityConstant * h^2 * min(u^4). The diffusion coefficient is 2 u^-4
/// and the pole rows carry a factor 3 from Lap u = 3 u''.
inline constexpr double kStabilityConstant = 1.0 / 16.0;
double stable_step(const AxisymProfile& p);

/// Snapshot with every derived quantity filled in.
FlowState make_state(const AxisymProfile& p, double time);

/// One Euler step followed by rescaling to the volume of s. Throws
/// ValidationError when dt exceeds stable_step and FlowError when u loses
/// positivity.
FlowState step(const FlowState& s, double dt);

struct RunConfig {
  double t_end = 1.0;
  double dt = 1e-5;
  double sample_interval = 1e-2;
  double conv_tol = 1e-3;
  bool allow_substep = true;
  bool stop_on_convergence = true;
};

/// Each requested dt is split into ceil(dt / stable_step) equal substeps
/// (or rejected when allow_substep is false). States are recorded at t = 0,
/// every sample_interval, and at the final time.
FlowTrace run(const AxisymProfile& p0, const RunConfig& cfg);

struct DerivativeRecord {
  double t = 0.0;
  double lhs = 0.0;  // centred difference of width_bound
  double rhs = 0.0;  // (r - R(theta*)) * A(theta*)
  double residual = 0.0;
};

/// Compares dW/dt with the integral of (r - R) over the maximal coordinate
/// sphere at each interior sample. Needs at least three states.
std::vector<DerivativeRecord> width_derivative_monitor(const FlowTrace& trace);

struct Theorem1Report {
  double tau_star = 0.0;
  double width_at_max = 0.0;
  double r_at_max = 0.0;
  double product_at_max = 0.0;
  double bound = 0.0;
  bool pass = false;
  double tol = 0.0;
  double final_normalized_width = 0.0;
  double round_normalized_width = 0.0;
  double final_relative_deviation = 0.0;
  double min_r_minus_final_r = 0.0;  // >= -1e-6 expected from E-monotonicity
  std::string ricci_hypothesis = "assumed, not verified";
};

Theorem1Report theorem1_monitor(const FlowTrace& trace, double tol = 1e-3);

/// Volume-preserving conformal family through p with d/dt g(0) = f g:
/// g(t) = (1 + f t) V^(2/3) / V_t^(2/3) g with V_t the volume of (1 + f t) g.
struct TestDirection {
  AxisymProfile base;
  numerics::GridFunction f;  // mean zero in dV_g
  double base_volume = 0.0;
  double theta_star = 0.0;
  double trace_integral_over_max_sphere = 0.0;  // int_Sigma f dA

  AxisymProfile at(double t) const;
};

TestDirection maximum_test_direction(const AxisymProfile& p, const numerics::GridFunction& f);

}  // namespace widthlab::yamabe
