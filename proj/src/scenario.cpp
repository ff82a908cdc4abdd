#include "fdamimo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace fdamimo {
namespace {

void reject_unknown(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!keys.count(k)) throw ConfigError("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

template <typename T>
void read(const Json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("wrong type for '" + where + "." + key + "'");
  }
}

double read_snr(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
  }
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  throw ConfigError("snr_db must be a number or \"inf\"");
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Json parse_scalar(const std::string& raw) {
  try {
    return Json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    return Json(raw);
  }
}

}  // namespace

GridSpec GridConfig::build(const RadarConfig& cfg) const {
  return GridSpec::uniform(theta_min_deg, theta_max_deg, theta_step_deg, 0.0, cfg.r_max() / r_points, r_points);
}

Scenario Scenario::defaults() {
  Scenario s;
  s.targets = {Target{deg2rad(30.0), 6000.0, {1.0, 0.0}}};
  s.offsets.sigma_t = 500.0;
  s.offsets.sigma_r = 500.0;
  return s;
}

const std::vector<std::string>& estimator_names() {
  static const std::vector<std::string> names{"music2d", "music_rows", "music_c4", "omp", "omp_anm", "anm_music"};
  return names;
}

void Scenario::validate() const {
  radar.validate();
  if (targets.empty()) throw DomainError("scenario needs at least one target");
  for (const auto& t : targets) t.validate(radar);
  offsets.validate();
  if (n_pulses < 1) throw DomainError("n_pulses must be >= 1");
  if (n_trials < 1) throw DomainError("n_trials must be >= 1");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    throw DomainError("snr_db must be finite or +inf");
  for (const auto& e : estimators)
    if (std::find(estimator_names().begin(), estimator_names().end(), e) == estimator_names().end())
      throw DomainError("unknown estimator '" + e + "'");
  if (sweep.axis != "none" && sweep.axis != "sigma_t" && sweep.axis != "sigma_r" && sweep.axis != "snr")
    throw DomainError("sweep.axis must be none, sigma_t, sigma_r or snr");
  if (sweep.axis != "none" && sweep.values.empty()) throw DomainError("sweep.values must not be empty");
  if (tau && !(*tau > 0.0)) throw DomainError("tau must be positive");
  grid.build(radar);
}

Json to_json(const Scenario& s) {
  Json j;
  j["radar"] = {{"n_tx", s.radar.n_tx},     {"n_rx", s.radar.n_rx},         {"f0", s.radar.f0},
                {"delta_f", s.radar.delta_f}, {"energy", s.radar.energy}, {"c", s.radar.c}};
  j["targets"] = Json::array();
  for (const auto& t : s.targets)
    j["targets"].push_back(
        {{"theta_deg", rad2deg(t.theta)}, {"r_m", t.r}, {"alpha_re", t.alpha.real()}, {"alpha_im", t.alpha.imag()}});
  j["offsets"] = {{"sigma_t", s.offsets.sigma_t}, {"sigma_r", s.offsets.sigma_r}, {"seed", s.offsets.seed}};
  j["snr_db"] = std::isfinite(s.snr_db) ? Json(s.snr_db) : Json("inf");
  j["n_pulses"] = s.n_pulses;
  j["n_trials"] = s.n_trials;
  j["estimators"] = s.estimators;
  j["sweep"] = {{"axis", s.sweep.axis}, {"values", s.sweep.values}};
  j["grid"] = {{"theta_min_deg", s.grid.theta_min_deg},
               {"theta_max_deg", s.grid.theta_max_deg},
               {"theta_step_deg", s.grid.theta_step_deg},
               {"r_points", s.grid.r_points}};
  j["tau"] = s.tau ? Json(*s.tau) : Json(nullptr);
  return j;
}

Scenario scenario_from_json(const Json& j) {
  reject_unknown(j, "", {"radar", "targets", "offsets", "snr_db", "n_pulses", "n_trials", "estimators", "sweep",
                         "grid", "tau"});
  Scenario s = Scenario::defaults();
  if (j.contains("radar")) {
    const Json& r = j["radar"];
    reject_unknown(r, "radar", {"n_tx", "n_rx", "f0", "delta_f", "energy", "c"});
    read(r, "n_tx", s.radar.n_tx, "radar");
    read(r, "n_rx", s.radar.n_rx, "radar");
    read(r, "f0", s.radar.f0, "radar");
    read(r, "delta_f", s.radar.delta_f, "radar");
    read(r, "energy", s.radar.energy, "radar");
    read(r, "c", s.radar.c, "radar");
  }
  if (j.contains("targets")) {
    if (!j["targets"].is_array()) throw ConfigError("targets must be an array");
    s.targets.clear();
    for (std::size_t i = 0; i < j["targets"].size(); ++i) {
      const Json& t = j["targets"][i];
      const std::string where = "targets." + std::to_string(i);
      reject_unknown(t, where, {"theta_deg", "r_m", "alpha_re", "alpha_im"});
      double theta_deg = 30.0;
      double r = 6000.0;
      double are = 1.0;
      double aim = 0.0;
      read(t, "theta_deg", theta_deg, where);
      read(t, "r_m", r, where);
      read(t, "alpha_re", are, where);
      read(t, "alpha_im", aim, where);
      s.targets.push_back(Target{deg2rad(theta_deg), r, {are, aim}});
    }
  }
  if (j.contains("offsets")) {
    const Json& o = j["offsets"];
    reject_unknown(o, "offsets", {"sigma_t", "sigma_r", "seed"});
    read(o, "sigma_t", s.offsets.sigma_t, "offsets");
    read(o, "sigma_r", s.offsets.sigma_r, "offsets");
    read(o, "seed", s.offsets.seed, "offsets");
  }
  if (j.contains("snr_db")) s.snr_db = read_snr(j["snr_db"]);
  read(j, "n_pulses", s.n_pulses, "");
  read(j, "n_trials", s.n_trials, "");
  if (j.contains("estimators")) {
    const Json& e = j["estimators"];
    if (e.is_string()) {
      s.estimators.clear();
      std::stringstream ss(e.get<std::string>());
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) s.estimators.push_back(item);
    } else {
      read(j, "estimators", s.estimators, "");
    }
    for (const auto& name : s.estimators)
      if (std::find(estimator_names().begin(), estimator_names().end(), name) == estimator_names().end())
        throw ConfigError("estimators: unknown estimator '" + name + "'");
  }
  if (j.contains("sweep")) {
    const Json& w = j["sweep"];
    reject_unknown(w, "sweep", {"axis", "values"});
    read(w, "axis", s.sweep.axis, "sweep");
    read(w, "values", s.sweep.values, "sweep");
  }
  if (j.contains("grid")) {
    const Json& g = j["grid"];
    reject_unknown(g, "grid", {"theta_min_deg", "theta_max_deg", "theta_step_deg", "r_points"});
    read(g, "theta_min_deg", s.grid.theta_min_deg, "grid");
    read(g, "theta_max_deg", s.grid.theta_max_deg, "grid");
    read(g, "theta_step_deg", s.grid.theta_step_deg, "grid");
    read(g, "r_points", s.grid.r_points, "grid");
  }
  if (j.contains("tau")) {
    if (j["tau"].is_null()) {
      s.tau.reset();
    } else {
      double tau = 0.0;
      read(j, "tau", tau, "");
      s.tau = tau;
    }
  }
  return s;
}

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": malformed JSON";
    throw ConfigError(os.str());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(parse_json_text(buf.str(), path));
}

void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const Json value = parse_scalar(assignment.substr(eq + 1));

  Json* node = &j;
  std::stringstream ss(path);
  std::vector<std::string> parts;
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& key = parts[i];
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw ConfigError("override path '" + path + "': '" + key + "' is not an index");
      }
      if (idx > node->size()) throw ConfigError("override path '" + path + "': index out of range");
      if (idx == node->size()) {
        if (node->empty()) throw ConfigError("override path '" + path + "': cannot extend an empty list");
        node->push_back(node->back());
      }
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (!node->contains(key)) throw ConfigError("unknown key '" + path + "'");
      node = &(*node)[key];
    } else {
      throw ConfigError("override path '" + path + "' descends into a scalar");
    }
    if (last) *node = value;
  }
}

Json to_json(const Estimate& e) {
  Json d = Json::object();
  for (const auto& [k, v] : e.diagnostics) d[k] = number_or_null(v);
  return {{"theta_deg", rad2deg(e.theta)},  {"r_m", number_or_null(e.r)},
          {"amplitude_re", e.amplitude.real()}, {"amplitude_im", e.amplitude.imag()},
          {"method", e.method},              {"diagnostics", d}};
}

Estimate estimate_from_json(const Json& j) {
  Estimate e;
  e.theta = deg2rad(j.at("theta_deg").get<double>());
  e.r = j.at("r_m").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("r_m").get<double>();
  e.amplitude = {j.at("amplitude_re").get<double>(), j.at("amplitude_im").get<double>()};
  e.method = j.at("method").get<std::string>();
  for (const auto& [k, v] : j.at("diagnostics").items())
    e.diagnostics[k] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  return e;
}

Json to_json(const EqualizedSnrReport& r) {
  auto db = [](double v) {
    if (std::isnan(v)) return Json(nullptr);
    if (std::isinf(v)) return Json("inf");
    return Json(v);
  };
  return {{"scenario", to_string(r.scenario)},
          {"sigma_over_df", r.sigma_over_df},
          {"r_over_rmax", r.r_over_rmax},
          {"snr_model_db", db(r.snr_model_db)},
          {"snr_empirical_db", db(r.snr_empirical_db)}};
}

Json to_json(const StructureReport& r) {
  return {{"ct_block_toeplitz", r.ct_block_toeplitz}, {"ct_blocks_rank1", r.ct_blocks_rank1},
          {"ct_singular", r.ct_singular},             {"cr_diagonal", r.cr_diagonal},
          {"all_hermitian", r.all_hermitian},         {"toeplitz_deviation", r.toeplitz_deviation},
          {"block_rank1_ratio", r.block_rank1_ratio}, {"ct_eig_ratio", r.ct_eig_ratio},
          {"cr_offdiag_max", r.cr_offdiag_max},       {"hermitian_deviation", r.hermitian_deviation}};
}

}  // namespace fdamimo
