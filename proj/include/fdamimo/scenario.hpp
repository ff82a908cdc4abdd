#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdamimo/estimators.hpp"
#include "fdamimo/noise_stats.hpp"

namespace fdamimo {

using Json = nlohmann::ordered_json;

struct SweepSpec {
  std::string axis = "none";      // none | sigma_t | sigma_r | snr
  std::vector<double> values;     // Hz for offsets, dB for snr
};

struct GridConfig {
  double theta_min_deg = -90.0;
  double theta_max_deg = 90.0;
  double theta_step_deg = 0.1;
  int r_points = 1500;            // r = k r_max / r_points

  GridSpec build(const RadarConfig& cfg) const;
};

struct Scenario {
  RadarConfig radar;
  std::vector<Target> targets;
  OffsetModel offsets;
  double snr_db = 20.0;           // +inf means no white noise
  int n_pulses = 200;
  int n_trials = 1000;
  std::vector<std::string> estimators{"music2d"};
  SweepSpec sweep;
  GridConfig grid;
  std::optional<double> tau;      // ANM constraint; default from the noise level

  /// Single target at 30°, 6000 m; σ_t = σ_r = 500 Hz; SNR 20 dB; L = 200.
  static Scenario defaults();
  void validate() const;
};

/// Angles in degrees, everything else SI. Unknown keys raise ConfigError.
Json to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);

/// Parses JSON text; syntax errors become ConfigError with line and column.
Json parse_json_text(const std::string& text, const std::string& origin);
Scenario load_scenario(const std::string& path);

/// Applies a dotted `key=value` override (e.g. offsets.sigma_t=500,
/// targets.0.theta_deg=20) to the JSON form of a scenario.
void apply_override(Json& j, const std::string& assignment);

Json to_json(const Estimate& e);
Estimate estimate_from_json(const Json& j);

Json to_json(const EqualizedSnrReport& r);
Json to_json(const StructureReport& r);

/// Known estimator names.
const std::vector<std::string>& estimator_names();

}  // namespace fdamimo
