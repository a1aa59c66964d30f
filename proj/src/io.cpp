#include "widthlab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

namespace widthlab::io {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

std::string csv_preamble(const json& config, const std::vector<std::string>& header) {
  std::string s = "# format_version=";
  s += kFormatVersion;
  s += "\n# config=";
  s += config.dump();
  s += "\n";
  s += join(header);
  s += "\n";
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s) {
  if (s == "true") return 1.0;
  if (s == "false") return 0.0;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("CSV cell is not numeric: '" + s + "'");
  }
  if (used != s.size()) throw ValidationError("CSV cell is not numeric: '" + s + "'");
  return v;
}

std::vector<double> doubles(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ValidationError(std::string("missing array field '") + key + "'");
  }
  std::vector<double> v;
  for (const auto& x : j.at(key)) {
    if (!x.is_number()) throw ValidationError(std::string("field '") + key + "' must be numeric");
    v.push_back(x.get<double>());
  }
  return v;
}

std::vector<equidist::FiniteMeasure> measures(const json& j, const char* key, std::size_t n) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ValidationError(std::string("missing array field '") + key + "'");
  }
  std::vector<equidist::FiniteMeasure> out;
  for (const auto& row : j.at(key)) {
    if (!row.is_array()) throw ValidationError(std::string("'") + key + "' must be an array of arrays");
    std::vector<double> w;
    for (const auto& x : row) {
      if (!x.is_number()) throw ValidationError(std::string("'") + key + "' entries must be numeric");
      w.push_back(x.get<double>());
    }
    if (w.size() != n) throw ValidationError(std::string("'") + key + "' rows must have n entries");
    out.emplace_back(std::move(w));
  }
  return out;
}

json weights(const equidist::FiniteMeasure& m) { return json(m.weights()); }

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  if (path == "-" || path.empty()) {
    std::cout << content;
    std::cout.flush();
    return;
  }
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw ValidationError("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ValidationError("cannot move output into '" + path + "'");
  }
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json profile_to_json(const conformal::AxisymProfile& p) {
  const auto v = p.grid().values();
  return json{{"n", p.size()},
              {"u", std::vector<double>(v.begin(), v.end())},
              {"description", p.description()}};
}

conformal::AxisymProfile profile_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("profile must be a JSON object");
  auto u = doubles(j, "u");
  if (j.contains("n")) {
    if (!j.at("n").is_number_integer() || j.at("n").get<long long>() != static_cast<long long>(u.size())) {
      throw ValidationError("profile field 'n' does not match the length of 'u'");
    }
  }
  std::string desc;
  if (j.contains("description")) {
    if (!j.at("description").is_string()) throw ValidationError("'description' must be a string");
    desc = j.at("description").get<std::string>();
  }
  return conformal::AxisymProfile(numerics::GridFunction(std::move(u)), std::move(desc));
}

json instance_to_json(const Instance& inst) {
  json j;
  j["n"] = inst.mu0.size();
  j["mu0"] = weights(inst.mu0);
  j["Y"] = json::array();
  for (const auto& y : inst.Y.members) j["Y"].push_back(weights(y));
  if (inst.Y.structure) {
    const auto& s = *inst.Y.structure;
    json w = json::array();
    for (const auto& m : s.W) w.push_back(weights(m));
    j["structure"] = {{"W", w},
                      {"multiplicity_bound", s.multiplicity_bound},
                      {"mass_bounds", {s.mass_lower, s.mass_upper}}};
  }
  return j;
}

Instance instance_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("instance must be a JSON object");
  if (!j.contains("n") || !j.at("n").is_number_integer() || j.at("n").get<long long>() < 1) {
    throw ValidationError("instance needs a positive integer 'n'");
  }
  const auto n = j.at("n").get<std::size_t>();
  auto mu0 = doubles(j, "mu0");
  if (mu0.size() != n) throw ValidationError("'mu0' must have n entries");
  Instance inst;
  inst.mu0 = equidist::FiniteMeasure(std::move(mu0));
  inst.Y.members = measures(j, "Y", n);
  if (j.contains("structure") && !j.at("structure").is_null()) {
    const auto& s = j.at("structure");
    equidist::Structure st;
    st.W = measures(s, "W", n);
    if (!s.contains("multiplicity_bound") || !s.at("multiplicity_bound").is_number_integer()) {
      throw ValidationError("structure needs an integer 'multiplicity_bound'");
    }
    st.multiplicity_bound = s.at("multiplicity_bound").get<int>();
    const auto bounds = doubles(s, "mass_bounds");
    if (bounds.size() != 2) throw ValidationError("'mass_bounds' must be [c, C]");
    st.mass_lower = bounds[0];
    st.mass_upper = bounds[1];
    inst.Y.structure = std::move(st);
  }
  inst.Y.validate();
  return inst;
}

json to_json(const berger::BergerReport& r) {
  return {{"rho", r.rho},
          {"scalar_curvature", r.scalar_curvature},
          {"ricci_positive", r.ricci_positive},
          {"volume", r.volume},
          {"width", r.width},
          {"normalized_width", r.normalized_width}};
}

json to_json(const berger::LocalMinCertificate& c) {
  return {{"h", c.h}, {"first_diff", c.first_diff}, {"second_diff", c.second_diff}, {"pass", c.pass}};
}

json to_json(const berger::ScalarBoundCheck& c) {
  return {{"rho", c.rho},   {"product", c.product},   {"bound", c.bound},
          {"pass", c.pass}, {"equality", c.equality}, {"tol", c.tol}};
}

json to_json(const conformal::LatitudeSphere& s) {
  return {{"theta", s.theta},
          {"area", s.area},
          {"minimality_residual", s.minimality_residual},
          {"jacobi_Q", s.jacobi_Q},
          {"induced_radius_sq", s.induced_radius_sq},
          {"index", s.index},
          {"nullity", s.nullity},
          {"kind", numerics::to_string(s.kind)}};
}

json to_json(const conformal::JacobiSpectrum& s) {
  return {{"eigenvalues", s.eigenvalues},
          {"index", s.index},
          {"nullity", s.nullity},
          {"Q", s.Q},
          {"induced_radius_sq", s.induced_radius_sq}};
}

json to_json(const conformal::StarReport& r) {
  json spheres = json::array();
  for (const auto& s : r.minimal_spheres) spheres.push_back(to_json(s));
  return {{"width_upper_bound", r.width_upper_bound},
          {"minimal_spheres", spheres},
          {"star_holds_on_axisym_candidates", r.star_holds_on_axisym_candidates},
          {"scope", r.scope}};
}

json to_json(const conformal::IsoperimetricCheck& c) {
  return {{"max_profile_area", c.max_profile_area},
          {"round_equator_area_same_volume", c.round_equator_area_same_volume},
          {"pass", c.pass},
          {"scalar_curvature_positive", c.scalar_curvature_positive},
          {"tol", c.tol},
          {"note", "max_profile_area is an upper bound for the width"}};
}

json to_json(const conformal::GreatSphereCheck& c) {
  return {{"lhs", c.lhs},         {"rhs", c.rhs},         {"abs_err", c.abs_err},
          {"rel_err", c.rel_err}, {"samples", c.samples}, {"seed", c.seed}};
}

json to_json(const yamabe::Theorem1Report& r) {
  return {{"tau_star", r.tau_star},
          {"width_at_max", r.width_at_max},
          {"r_at_max", r.r_at_max},
          {"product_at_max", r.product_at_max},
          {"bound", r.bound},
          {"pass", r.pass},
          {"tol", r.tol},
          {"final_normalized_width", r.final_normalized_width},
          {"round_normalized_width", r.round_normalized_width},
          {"final_relative_deviation", r.final_relative_deviation},
          {"min_r_minus_final_r", r.min_r_minus_final_r},
          {"ricci_hypothesis", r.ricci_hypothesis}};
}

json to_json(const yamabe::DerivativeRecord& r) {
  return {{"t", r.t}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"residual", r.residual}};
}

json to_json(const equidist::MembershipCertificate& c) {
  json j{{"verdict", equidist::to_string(c.verdict)}, {"tol", c.tol}};
  if (c.verdict == equidist::Verdict::kMember) {
    json coeffs = json::array();
    for (const auto& [idx, lambda] : c.coefficients) coeffs.push_back({{"index", idx}, {"coefficient", lambda}});
    j["coefficients"] = coeffs;
    j["residual"] = c.residual;
  } else {
    j["separating_f"] = c.separating_f;
    j["f_dot_mu0"] = c.f_dot_mu0;
    j["max_f_dot_member"] = c.max_f_dot_member;
  }
  return j;
}

json to_json(const equidist::RationalApproximation& r) { return {{"d", r.d}, {"c", r.c}}; }

json to_json(const equidist::HarnessReport& r) {
  json bad = json::array();
  for (const auto& t : r.records) {
    for (const auto& msg : t.inconsistencies) bad.push_back({{"trial", t.trial}, {"seed", t.seed}, {"issue", msg}});
  }
  return {{"seed", r.seed},
          {"trials", r.trials},
          {"members", r.members},
          {"non_members", r.non_members},
          {"inconsistencies", r.inconsistencies},
          {"worst_member_plain_error", r.worst_member_plain_error},
          {"worst_member_weighted_error", r.worst_member_weighted_error},
          {"issues", bad}};
}

std::string report_document(const json& config, json body) {
  body["format_version"] = kFormatVersion;
  body["config"] = config;
  return body.dump(2) + "\n";
}

std::string berger_scan_csv(const std::vector<berger::BergerReport>& rows, const json& config) {
  std::string s = csv_preamble(config, kBergerHeader);
  for (const auto& r : rows) {
    s += format_double(r.rho) + ',' + format_double(r.scalar_curvature) + ',' +
         (r.ricci_positive ? "true" : "false") + ',' + format_double(r.volume) + ',' +
         format_double(r.width) + ',' + format_double(r.normalized_width) + '\n';
  }
  return s;
}

std::string trace_csv(const yamabe::FlowTrace& trace, const json& config) {
  std::string s = csv_preamble(config, kTraceHeader);
  for (const auto& st : trace.states) {
    s += format_double(st.time) + ',' + format_double(st.volume) + ',' + format_double(st.r_avg) +
         ',' + format_double(st.energy) + ',' + format_double(st.width_bound) + ',' +
         format_double(st.max_sphere.theta) + ',' + format_double(st.sup_R_minus_r) + '\n';
  }
  return s;
}

std::string cesaro_csv(const equidist::EquidistTrace& trace, const json& config) {
  std::string s = csv_preamble(config, kCesaroHeader);
  for (std::size_t k = 0; k < trace.cesaro_errors.size(); ++k) {
    s += std::to_string(k + 1) + ',' + format_double(trace.cesaro_errors[k]) + '\n';
  }
  return s;
}

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string meta = line.substr(1);
      const auto start = meta.find_first_not_of(' ');
      const std::string body = start == std::string::npos ? "" : meta.substr(start);
      if (body.rfind("format_version=", 0) == 0) {
        csv.format_version = body.substr(15);
      } else if (body.rfind("config=", 0) == 0) {
        try {
          csv.config = json::parse(body.substr(7));
        } catch (const json::exception& e) {
          throw ValidationError(std::string("CSV config line is not JSON: ") + e.what());
        }
      }
      continue;
    }
    if (!have_header) {
      csv.header = split(line);
      have_header = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != csv.header.size()) throw ValidationError("CSV row width differs from header");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_cell(c));
    csv.rows.push_back(std::move(row));
  }
  if (!have_header) throw ValidationError("CSV has no header");
  return csv;
}

}  // namespace widthlab::io
