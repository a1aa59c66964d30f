#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "widthlab/berger.hpp"
#include "widthlab/conformal.hpp"
#include "widthlab/equidist.hpp"
#include "widthlab/yamabe.hpp"

namespace widthlab::io {

using nlohmann::json;

inline constexpr const char* kFormatVersion = "widthlab-report/1";

std::string read_text(const std::string& path);

/// Writes to a temporary sibling and renames it over path. "-" means stdout.
void write_atomic(const std::string& path, const std::string& content);

/// %.17g
std::string format_double(double x);

// ---- profiles and instances -------------------------------------------------

json profile_to_json(const conformal::AxisymProfile& p);
conformal::AxisymProfile profile_from_json(const json& j);

struct Instance {
  equidist::FiniteMeasure mu0;
  equidist::MeasureFamily Y;
};

json instance_to_json(const Instance& inst);
Instance instance_from_json(const json& j);

// ---- reports ----------------------------------------------------------------

json to_json(const berger::BergerReport& r);
json to_json(const berger::LocalMinCertificate& c);
json to_json(const berger::ScalarBoundCheck& c);
json to_json(const conformal::LatitudeSphere& s);
json to_json(const conformal::JacobiSpectrum& s);
json to_json(const conformal::StarReport& r);
json to_json(const conformal::IsoperimetricCheck& c);
json to_json(const conformal::GreatSphereCheck& c);
json to_json(const yamabe::Theorem1Report& r);
json to_json(const yamabe::DerivativeRecord& r);
json to_json(const equidist::MembershipCertificate& c);
json to_json(const equidist::RationalApproximation& r);
json to_json(const equidist::HarnessReport& r);

/// {"format_version", "config", ...body}; keys sorted by the json library.
std::string report_document(const json& config, json body);

// ---- CSV --------------------------------------------------------------------
// Every CSV starts with "# format_version=..." and "# config=<json>" lines.

struct Csv {
  std::string format_version;
  json config;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string berger_scan_csv(const std::vector<berger::BergerReport>& rows, const json& config);
std::string trace_csv(const yamabe::FlowTrace& trace, const json& config);
std::string cesaro_csv(const equidist::EquidistTrace& trace, const json& config);

/// Numeric CSV reader for the files above ("true"/"false" read as 1/0).
Csv parse_csv(const std::string& text);

inline const std::vector<std::string> kBergerHeader = {
    "rho", "scalar_curvature", "ricci_positive", "volume", "width", "normalized_width"};
inline const std::vector<std::string> kTraceHeader = {
    "t", "volume", "r_avg", "energy", "width_bound", "max_theta", "sup_R_minus_r"};
inline const std::vector<std::string> kCesaroHeader = {"k", "error"};

}  // namespace widthlab::io
