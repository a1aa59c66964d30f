#include "widthlab/cli.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "widthlab/io.hpp"

namespace widthlab::cli {

using io::json;

namespace {

constexpr double kPi = std::numbers::pi;

// Options of one subcommand, remembered so the resolved config can be
// written back out.
class Registry {
 public:
  explicit Registry(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    getters_.emplace_back(name, [&var] { return json(var); });
    return app_->add_option("--" + name, var, help);
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    getters_.emplace_back(name, [&var] { return json(var); });
    return app_->add_flag("--" + name, var, help);
  }

  json resolved(const std::string& command) const {
    json j;
    j["command"] = command;
    for (const auto& [name, get] : getters_) j[name] = get();
    return j;
  }

  CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<json()>>> getters_;
};

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) {
      throw ValidationError(std::string("--") + what + " expects comma-separated numbers");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError(std::string("--") + what + " is empty");
  return out;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-" || path.empty()) {
    out << content;
    out.flush();
  } else {
    io::write_atomic(path, content);
  }
}

struct ProfileOptions {
  std::string profile;
  std::string preset = "cos";
  double amplitude = 0.3;
  int n = 401;

  void add(Registry& r) {
    r.add("profile", profile, "profile JSON {n, u, description}; overrides --preset");
    r.add("preset", preset, "round | cos (1 + a cos t) | cos2 (1 + a cos 2t) | mobius");
    r.add("amplitude", amplitude, "preset amplitude a (mobius: boost s)");
    r.add("n", n, "grid nodes for presets");
  }

  conformal::AxisymProfile load() const {
    if (!profile.empty()) return io::profile_from_json(json::parse(io::read_text(profile)));
    if (n < 5) throw ValidationError("--n must be >= 5");
    const auto nodes = static_cast<std::size_t>(n);
    const double a = amplitude;
    std::ostringstream desc;
    if (preset == "round") {
      return conformal::AxisymProfile::sample([](double) { return 1.0; }, nodes, "round");
    }
    if (preset == "cos") {
      desc << "1 + " << a << " cos(theta)";
      return conformal::AxisymProfile::sample([a](double t) { return 1.0 + a * std::cos(t); }, nodes,
                                              desc.str());
    }
    if (preset == "cos2") {
      desc << "1 + " << a << " cos(2 theta)";
      return conformal::AxisymProfile::sample(
          [a](double t) { return 1.0 + a * std::cos(2.0 * t); }, nodes, desc.str());
    }
    if (preset == "mobius") {
      desc << "(cosh s - sinh s cos(theta))^(-1/2), s = " << a;
      return conformal::AxisymProfile::sample(
          [a](double t) { return 1.0 / std::sqrt(std::cosh(a) - std::sinh(a) * std::cos(t)); },
          nodes, desc.str());
    }
    throw ValidationError("unknown preset '" + preset + "'");
  }
};

// ---- commands ---------------------------------------------------------------

struct BergerScan {
  double rho_min = 1e-3, rho_max = 1e4, abs_tol = 1e-10;
  int n = 50, max_depth = 50;
  std::string output = "-";

  void add(Registry& r) {
    r.add("rho-min", rho_min, "smallest rho");
    r.add("rho-max", rho_max, "largest rho");
    r.add("n", n, "number of log-spaced samples");
    r.add("abs-tol", abs_tol, "quadrature tolerance");
    r.add("max-depth", max_depth, "quadrature depth limit");
    r.add("output", output, "CSV path, - for stdout");
  }

  void run(const json& config, std::ostream& out) const {
    const numerics::QuadratureConfig q{abs_tol, max_depth};
    const auto rows = berger::scan(rho_min, rho_max, n, q);
    emit(output, io::berger_scan_csv(rows, config), out);
  }
};

struct BergerCertify {
  std::string h = "1e-2,1e-3";
  std::string rho = "0.5,1,1.9";
  double abs_tol = 1e-10, bound_tol = 1e-4;
  int max_depth = 50;
  std::string output = "-";

  void add(Registry& r) {
    r.add("steps", h, "finite-difference steps h at rho = 1");
    r.add("rho", rho, "rho values for the W R <= 24 pi check");
    r.add("abs-tol", abs_tol, "quadrature tolerance");
    r.add("max-depth", max_depth, "quadrature depth limit");
    r.add("bound-tol", bound_tol, "tolerance of the 24 pi comparison");
    r.add("output", output, "JSON path, - for stdout");
  }

  void run(const json& config, std::ostream& out) const {
    const numerics::QuadratureConfig q{abs_tol, max_depth};
    json body;
    body["round"] = io::to_json(berger::report(berger::BergerParameter(1.0), q));
    body["round_normalized_width_exact"] = std::cbrt(16.0 / kPi);
    body["local_min"] = json::array();
    bool ok = true;
    for (double step : parse_list(h, "steps")) {
      const auto c = berger::local_min_certificate(step, q);
      ok = ok && c.pass;
      body["local_min"].push_back(io::to_json(c));
    }
    body["scalar_bound"] = json::array();
    for (double r : parse_list(rho, "rho")) {
      const auto c = berger::scalar_normalized_bound_check(berger::BergerParameter(r), q, bound_tol);
      ok = ok && c.pass;
      body["scalar_bound"].push_back(io::to_json(c));
    }
    body["all_pass"] = ok;
    emit(output, io::report_document(config, body), out);
  }
};

json profile_summary(const conformal::AxisymProfile& p) {
  const auto r = conformal::scalar_curvature_field(p);
  const auto v = r.values();
  const double vol = conformal::volume(p);
  const auto m = conformal::width_maximizer(p);
  return {{"n", p.size()},
          {"description", p.description()},
          {"volume", vol},
          {"width_upper_bound", m.area},
          {"width_upper_bound_theta", m.theta},
          {"normalized_width_upper_bound", m.area / std::pow(vol, 2.0 / 3.0)},
          {"scalar_curvature_min", *std::min_element(v.begin(), v.end())},
          {"scalar_curvature_max", *std::max_element(v.begin(), v.end())},
          {"average_scalar_curvature", yamabe::average_scalar_curvature(p)},
          {"hilbert_einstein_energy", yamabe::hilbert_einstein_energy(p)},
          {"width_label", "upper bound (coordinate-sphere sweep-out)"}};
}

struct ConformalAnalyze {
  ProfileOptions prof;
  int k_max = 4;
  long long great_sphere_samples = 0;
  long long seed = 42;
  std::string output = "-";

  void add(Registry& r) {
    prof.add(r);
    r.add("k-max", k_max, "highest Jacobi mode listed");
    r.add("great-sphere-samples", great_sphere_samples,
          "round-metric great-sphere average check (0 = skip, else >= 1000)");
    r.add("seed", seed, "Monte Carlo seed");
    r.add("output", output, "JSON path, - for stdout");
  }

  void run(const json& config, std::ostream& out) const {
    const auto p = prof.load();
    json body;
    body["profile"] = profile_summary(p);
    const auto star = conformal::star_scan(p);
    body["star"] = io::to_json(star);
    json spectra = json::array();
    for (const auto& s : star.minimal_spheres) {
      json e = io::to_json(conformal::jacobi_spectrum(p, s.theta, k_max));
      e["theta"] = s.theta;
      e["curvature_integral"] = conformal::curvature_integral_over_sphere(p, s.theta);
      e["curvature_integral_bound"] = 24.0 * kPi;
      spectra.push_back(e);
    }
    body["spectra"] = spectra;
    body["isoperimetric"] = io::to_json(conformal::isoperimetric_check(p));
    if (great_sphere_samples > 0) {
      const auto s = static_cast<std::uint64_t>(seed);
      body["great_sphere"] = {
          {"x4_squared", io::to_json(conformal::great_sphere_average_check(
                             [](const std::array<double, 4>& x) { return x[3] * x[3]; },
                             great_sphere_samples, s))},
          {"x4", io::to_json(conformal::great_sphere_average_check(
                     [](const std::array<double, 4>& x) { return x[3]; }, great_sphere_samples, s))}};
    }
    emit(output, io::report_document(config, body), out);
  }
};

struct YamabeRun {
  ProfileOptions prof;
  double t_end = 5.0, dt = 1e-5, sample_interval = 1e-2, conv_tol = 1e-3, bound_tol = 1e-3;
  bool no_substep = false, no_early_stop = false;
  std::string output = "-", trace, final_profile;

  void add(Registry& r) {
    prof.add(r);
    r.add("t-end", t_end, "final time");
    r.add("dt", dt, "requested time step (split into stable substeps)");
    r.add("sample-interval", sample_interval, "time between recorded states");
    r.add("conv-tol", conv_tol, "stop when sup |R - r| drops below this");
    r.add("bound-tol", bound_tol, "tolerance of the W r <= 24 pi comparison");
    r.flag("no-substep", no_substep, "reject dt above the stable step instead of substepping");
    r.flag("no-early-stop", no_early_stop, "keep running after convergence");
    r.add("output", output, "JSON summary path, - for stdout");
    r.add("trace", trace, "trace CSV path (optional)");
    r.add("final-profile", final_profile, "final profile JSON path (optional)");
  }

  void run(const json& config, std::ostream& out) const {
    const auto p0 = prof.load();
    yamabe::RunConfig rc;
    rc.t_end = t_end;
    rc.dt = dt;
    rc.sample_interval = sample_interval;
    rc.conv_tol = conv_tol;
    rc.allow_substep = !no_substep;
    rc.stop_on_convergence = !no_early_stop;
    const auto tr = yamabe::run(p0, rc);

    double drift = 0.0, rise = 0.0;
    for (const auto& m : tr.monitors) {
      drift = std::max(drift, m.volume_drift);
      rise = std::max(rise, m.energy_increase);
    }
    const auto& last = tr.states.back();
    json body;
    body["status"] = tr.status;
    body["substeps_per_step"] = tr.substeps;
    body["steps"] = tr.monitors.size();
    body["samples"] = tr.states.size();
    body["initial"] = profile_summary(p0);
    body["final"] = {{"time", last.time},
                     {"volume", last.volume},
                     {"r_avg", last.r_avg},
                     {"energy", last.energy},
                     {"width_bound", last.width_bound},
                     {"sup_R_minus_r", last.sup_R_minus_r},
                     {"max_sphere", io::to_json(last.max_sphere)}};
    body["max_volume_drift"] = drift;
    body["max_energy_increase"] = rise;
    body["theorem1"] = io::to_json(yamabe::theorem1_monitor(tr, bound_tol));
    if (tr.states.size() >= 3) {
      const auto recs = yamabe::width_derivative_monitor(tr);
      double res = 0.0, mag = 0.0;
      json arr = json::array();
      for (const auto& rec : recs) {
        res = std::max(res, std::abs(rec.residual));
        mag = std::max(mag, std::abs(rec.rhs));
        arr.push_back(io::to_json(rec));
      }
      body["width_derivative"] = {{"records", arr},
                                  {"max_abs_residual", res},
                                  {"max_abs_rhs", mag},
                                  {"relative_residual", mag > 0.0 ? res / mag : res}};
    }
    body["positive_ricci"] = "assumed, not verified";
    if (!trace.empty()) emit(trace, io::trace_csv(tr, config), out);
    if (!final_profile.empty()) {
      emit(final_profile, io::profile_to_json(last.profile).dump(2) + "\n", out);
    }
    emit(output, io::report_document(config, body), out);
  }
};

struct EquidistCheck {
  std::string input;
  double tol = 1e-9;
  long long harness_trials = 0;
  long long seed = 42;
  long long k_max = 10000;
  std::string output = "-";

  void add(Registry& r) {
    r.add("input", input, "instance JSON {n, mu0, Y, structure?}");
    r.add("tol", tol, "membership tolerance (relative to max(1, |mu0|_inf))");
    r.add("harness-trials", harness_trials, "run the random equivalence harness instead");
    r.add("seed", seed, "harness seed");
    r.add("k-max", k_max, "Cesaro length used by the harness");
    r.add("output", output, "JSON path, - for stdout");
  }

  void run(const json& config, std::ostream& out) const {
    json body;
    if (harness_trials > 0) {
      equidist::HarnessConfig hc;
      hc.seed = static_cast<std::uint64_t>(seed);
      hc.trials = static_cast<std::size_t>(harness_trials);
      hc.k_max = static_cast<std::size_t>(k_max);
      body["harness"] = io::to_json(equidist::equivalence_harness(hc));
    } else {
      if (input.empty()) throw ValidationError("equidist-check needs --input or --harness-trials");
      const auto inst = io::instance_from_json(json::parse(io::read_text(input)));
      const auto cert = equidist::cone_hull_membership(inst.mu0, inst.Y, tol);
      body["certificate"] = io::to_json(cert);
      if (cert.verdict == equidist::Verdict::kNonMember && inst.mu0.total_mass() > 0.0) {
        body["condition_ii_violator"] = equidist::condition_ii_violator(inst.mu0, cert.separating_f);
      }
    }
    emit(output, io::report_document(config, body), out);
  }
};

struct EquidistSequence {
  std::string input;
  long long k_max = 10000;
  bool weighted = false;
  std::string output = "-";

  void add(Registry& r) {
    r.add("input", input, "instance JSON {n, mu0, Y, structure?}")->required();
    r.add("k-max", k_max, "sequence length");
    r.flag("weighted", weighted, "mass-weighted selection over the structure's W");
    r.add("output", output, "CSV path, - for stdout");
  }

  void run(const json& config, std::ostream& out) const {
    if (k_max < 1) throw ValidationError("--k-max must be >= 1");
    const auto inst = io::instance_from_json(json::parse(io::read_text(input)));
    const auto k = static_cast<std::size_t>(k_max);
    const auto tr = weighted ? equidist::weighted_cesaro_structured(inst.mu0, inst.Y, k)
                             : equidist::cesaro_sequence(inst.mu0, inst.Y, k);
    emit(output, io::cesaro_csv(tr, config), out);
  }
};

struct RoundCheck {
  std::string output;
  int n = 201;

  void add(Registry& r) {
    r.add("n", n, "grid nodes for the conformal and flow items");
    r.add("output", output, "optional JSON report path");
  }

  bool run(const json& config, std::ostream& out) const {
    json items = json::array();
    bool all = true;
    auto item = [&](const std::string& name, bool pass, const std::string& detail) {
      out << (pass ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
      items.push_back({{"item", name}, {"pass", pass}, {"detail", detail}});
      all = all && pass;
    };
    auto fmt = [](double x) { return io::format_double(x); };
    const numerics::QuadratureConfig q;
    const double round_nw = std::cbrt(16.0 / kPi);

    const double nw = berger::normalized_width(berger::BergerParameter(1.0), q);
    item("berger normalized width", std::abs(nw - round_nw) < 1e-6,
         fmt(nw) + " vs cbrt(16/pi) = " + fmt(round_nw));
    const double w = berger::width(berger::BergerParameter(1.0), q);
    item("berger width", std::abs(w - 4.0 * kPi) < 1e-5, fmt(w) + " vs 4 pi");

    if (n < 5) throw ValidationError("--n must be >= 5");
    const auto p = conformal::AxisymProfile::sample([](double) { return 1.0; },
                                                    static_cast<std::size_t>(n), "round");
    const double vol = conformal::volume(p);
    item("conformal volume", std::abs(vol - 2.0 * kPi * kPi) < 1e-8, fmt(vol) + " vs 2 pi^2");
    const double wb = conformal::width_upper_bound(p);
    item("conformal equator area", std::abs(wb - 4.0 * kPi) < 1e-8, fmt(wb) + " vs 4 pi");
    const auto spec = conformal::jacobi_spectrum(p, kPi / 2.0);
    item("conformal equator index", spec.index == 1 && spec.nullity == 3 && std::abs(spec.Q - 2.0) < 1e-3,
         "index " + std::to_string(spec.index) + ", nullity " + std::to_string(spec.nullity) +
             ", Q " + fmt(spec.Q));

    const auto s0 = yamabe::make_state(p, 0.0);
    const auto s1 = yamabe::step(s0, yamabe::stable_step(p));
    double change = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) change = std::max(change, std::abs(s1.profile[i] - p[i]));
    item("yamabe stationarity", change < 1e-12, "max |du| " + fmt(change));
    const double e_round = 6.0 * std::pow(2.0 * kPi * kPi, 2.0 / 3.0);
    item("yamabe round energy", std::abs(s0.energy - e_round) < 1e-6,
         fmt(s0.energy) + " vs 6 (2 pi^2)^(2/3)");

    equidist::MeasureFamily ray;
    ray.members = {equidist::FiniteMeasure({1.0, 1.0})};
    const auto in = equidist::cone_hull_membership(equidist::FiniteMeasure({3.0, 3.0}), ray);
    item("equidist ray member",
         in.verdict == equidist::Verdict::kMember && in.coefficients.size() == 1 &&
             std::abs(in.coefficients[0].second - 3.0) < 1e-12,
         "verdict " + equidist::to_string(in.verdict));
    const auto outc = equidist::cone_hull_membership(equidist::FiniteMeasure({1.0, 2.0}), ray);
    const bool sep = outc.verdict == equidist::Verdict::kNonMember && outc.f_dot_mu0 > 0.0 &&
                     outc.max_f_dot_member <= 0.0;
    item("equidist ray separation", sep, "verdict " + equidist::to_string(outc.verdict));
    const auto ra = equidist::rational_approximation({0.5, 0.5}, 0.1);
    item("equidist rational approximation", ra.d == 2 && ra.c == std::vector<std::int64_t>{1, 1},
         "d = " + std::to_string(ra.d));

    if (!output.empty()) {
      json body;
      body["items"] = items;
      body["all_pass"] = all;
      emit(output, io::report_document(config, body), out);
    }
    return all;
  }
};

// Prepends "--key=value" pairs from a JSON config file right after the
// subcommand, so later command-line flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& commands) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  json cfg;
  try {
    cfg = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw ValidationError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw ValidationError("config file must hold a JSON object");

  std::vector<std::string> out = args;
  auto pos = std::find_if(out.begin(), out.end(), [&](const std::string& a) {
    return std::find(commands.begin(), commands.end(), a) != commands.end();
  });
  if (pos == out.end()) {
    if (!cfg.contains("command") || !cfg["command"].is_string()) return args;
    pos = out.insert(out.begin(), cfg["command"].get<std::string>());
  }
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command" || key == "config") continue;
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back("--" + name);
    } else if (value.is_string()) {
      extra.push_back("--" + name + "=" + value.get<std::string>());
    } else if (value.is_number_integer()) {
      extra.push_back("--" + name + "=" + std::to_string(value.get<long long>()));
    } else if (value.is_number()) {
      extra.push_back("--" + name + "=" + io::format_double(value.get<double>()));
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& x : value) {
        if (!joined.empty()) joined += ',';
        joined += x.is_string() ? x.get<std::string>() : x.dump();
      }
      extra.push_back("--" + name + "=" + joined);
    } else {
      throw ValidationError("config key '" + key + "' has an unsupported type");
    }
  }
  out.insert(pos + 1, extra.begin(), extra.end());
  return out;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"widthlab: widths of three-spheres, Yamabe flow monitors and measure equidistribution",
               "widthlab"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  BergerScan berger_scan;
  BergerCertify berger_certify;
  ConformalAnalyze conformal_analyze;
  YamabeRun yamabe_run;
  EquidistCheck equidist_check;
  EquidistSequence equidist_sequence;
  RoundCheck roundcheck;

  std::map<std::string, Registry> reg;
  std::string config_path;
  auto sub = [&](const std::string& name, const std::string& help) -> Registry& {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "JSON config file; command-line flags override it");
    return reg.emplace(name, Registry(s)).first->second;
  };
  berger_scan.add(sub("berger-scan", "normalized width of Berger spheres on a log grid (CSV)"));
  berger_certify.add(sub("berger-certify", "local minimum at rho = 1 and the W R <= 24 pi check"));
  conformal_analyze.add(sub("conformal-analyze", "minimal latitude spheres, index and bounds of a profile"));
  yamabe_run.add(sub("yamabe-run", "normalized Yamabe flow with width monitors"));
  equidist_check.add(sub("equidist-check", "cone membership certificate for a finite instance"));
  equidist_sequence.add(sub("equidist-sequence", "greedy Cesaro sequence (CSV k,error)"));
  roundcheck.add(sub("roundcheck", "self-test against the round sphere"));

  std::vector<std::string> names;
  for (const auto& [name, r] : reg) names.push_back(name);

  if (!args.empty() && !args.front().empty() && args.front()[0] != '-' &&
      std::find(names.begin(), names.end(), args.front()) == names.end()) {
    err << "error: unknown command '" << args.front() << "'\n\n" << app.help();
    return 1;
  }

  try {
    auto expanded = expand_config(args, names);
    std::vector<std::string> rev(expanded.rbegin(), expanded.rend());
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n\n" << app.help();
      return 1;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    const json config = reg.at(name).resolved(name);
    if (name == "berger-scan") berger_scan.run(config, out);
    else if (name == "berger-certify") berger_certify.run(config, out);
    else if (name == "conformal-analyze") conformal_analyze.run(config, out);
    else if (name == "yamabe-run") yamabe_run.run(config, out);
    else if (name == "equidist-check") equidist_check.run(config, out);
    else if (name == "equidist-sequence") equidist_sequence.run(config, out);
    else if (name == "roundcheck") return roundcheck.run(config, out) ? 0 : 2;
    return 0;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "validation error: malformed JSON: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return 2;
  }
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace widthlab::cli
