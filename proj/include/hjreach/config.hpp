#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hjreach/format.hpp"
#include "hjreach/hybrid_model.hpp"
#include "hjreach/solver.hpp"

namespace hjreach {

enum class ConfigErrorKind { kMissingFile, kSchema, kInvalidValue };

struct ConfigError : std::runtime_error {
  ConfigError(ConfigErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  ConfigErrorKind kind;
};

/// One run of the tool is fully determined by this struct; the text config
/// file is a flat key = value format split into [model], [scheme] and
/// [output] sections, with '#' comments. Unknown keys are rejected.
struct RunConfig {
  // model
  double a_x = 0.1;
  double a_y = 0.15;
  double u_max = 0.07;
  double delta = 2.0;
  double x0 = 0.3;
  double y0 = 0.8;
  double x0_radius = 0.0;  // 0 = pick 2*dx at solve time
  double k_x_min = 0.0;
  double k_x_max = 1.0;
  double k_y_min = 0.0;
  double k_y_max = 1.0;
  std::string switch_policy = "toggle";  // toggle | full | none

  // scheme
  double dx = 0.025;
  double dp = 0.05;
  double horizon = 8.0;
  double cfl_factor = 0.9;
  double clip_bound = 1.0;
  double margin = 0.1;
  int control_samples = 50;
  double reach_tol = 0.0;

  // output
  int cadence = 20;
  bool retain_fields = false;
  int workers = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(ConfigErrorKind::kSchema, "key '" + key + "': not a number: " + text);
  }
}

inline long long parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(ConfigErrorKind::kSchema, "key '" + key + "': not an integer: " + text);
  }
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(ConfigErrorKind::kSchema, "key '" + key + "': expected true/false: " + text);
}

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  const auto last = s.find_last_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, last - first + 1);
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, bool> seen;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(ConfigErrorKind::kSchema,
                          "line " + std::to_string(line_no) + ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "scheme" && section != "output")
        throw ConfigError(ConfigErrorKind::kSchema, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ConfigErrorKind::kSchema,
                        "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const std::string scoped = section.empty() ? key : section + "." + key;
    if (seen.count(scoped))
      throw ConfigError(ConfigErrorKind::kSchema, "duplicate key '" + scoped + "'");
    seen[scoped] = true;

    if (scoped == "model.a_x") cfg.a_x = detail::parse_double(scoped, value);
    else if (scoped == "model.a_y") cfg.a_y = detail::parse_double(scoped, value);
    else if (scoped == "model.u_max") cfg.u_max = detail::parse_double(scoped, value);
    else if (scoped == "model.delta") cfg.delta = detail::parse_double(scoped, value);
    else if (scoped == "model.x0") cfg.x0 = detail::parse_double(scoped, value);
    else if (scoped == "model.y0") cfg.y0 = detail::parse_double(scoped, value);
    else if (scoped == "model.x0_radius") cfg.x0_radius = value == "auto" ? 0.0 : detail::parse_double(scoped, value);
    else if (scoped == "model.k_x_min") cfg.k_x_min = detail::parse_double(scoped, value);
    else if (scoped == "model.k_x_max") cfg.k_x_max = detail::parse_double(scoped, value);
    else if (scoped == "model.k_y_min") cfg.k_y_min = detail::parse_double(scoped, value);
    else if (scoped == "model.k_y_max") cfg.k_y_max = detail::parse_double(scoped, value);
    else if (scoped == "model.switch_policy") cfg.switch_policy = value;
    else if (scoped == "scheme.dx") cfg.dx = detail::parse_double(scoped, value);
    else if (scoped == "scheme.dp") cfg.dp = detail::parse_double(scoped, value);
    else if (scoped == "scheme.horizon") cfg.horizon = detail::parse_double(scoped, value);
    else if (scoped == "scheme.cfl_factor") cfg.cfl_factor = detail::parse_double(scoped, value);
    else if (scoped == "scheme.clip_bound") cfg.clip_bound = detail::parse_double(scoped, value);
    else if (scoped == "scheme.margin") cfg.margin = detail::parse_double(scoped, value);
    else if (scoped == "scheme.control_samples") cfg.control_samples = static_cast<int>(detail::parse_int(scoped, value));
    else if (scoped == "scheme.reach_tol") cfg.reach_tol = detail::parse_double(scoped, value);
    else if (scoped == "output.cadence") cfg.cadence = static_cast<int>(detail::parse_int(scoped, value));
    else if (scoped == "output.retain_fields") cfg.retain_fields = detail::parse_bool(scoped, value);
    else if (scoped == "output.workers") cfg.workers = static_cast<int>(detail::parse_int(scoped, value));
    else if (scoped == "output.seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_int(scoped, value));
    else throw ConfigError(ConfigErrorKind::kSchema, "unknown key '" + scoped + "'");
  }
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigErrorKind::kMissingFile, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Physical and numerical sanity checks; violations are reported with the
/// invalid-value error class. Accepted-but-odd settings only warn.
inline void validate(const RunConfig& cfg) {
  auto bad = [](const std::string& msg) {
    throw ConfigError(ConfigErrorKind::kInvalidValue, msg);
  };
  if (!(cfg.a_x > 0.0)) bad("a_x must be positive");
  if (!(cfg.a_y > 0.0)) bad("a_y must be positive");
  if (cfg.u_max < 0.0) bad("u_max must be nonnegative");
  if (!(cfg.delta > 0.0)) bad("delta must be positive");
  if (!(cfg.dx > 0.0)) bad("dx must be positive");
  if (!(cfg.dp > 0.0)) bad("dp must be positive");
  if (!(cfg.horizon > 0.0)) bad("horizon must be positive");
  if (!(cfg.cfl_factor > 0.0) || cfg.cfl_factor > 1.0) bad("cfl_factor must lie in (0, 1]");
  if (!(cfg.clip_bound > 0.0)) bad("clip_bound must be positive");
  if (cfg.margin + 1e-12 < cfg.dx) bad("margin must cover at least one grid cell");
  if (cfg.control_samples < 2) bad("control_samples must be at least 2");
  if (cfg.reach_tol < 0.0) bad("reach_tol must be nonnegative");
  if (cfg.x0_radius < 0.0) bad("x0_radius must be nonnegative (0 = auto)");
  if (!(cfg.k_x_max > cfg.k_x_min) || !(cfg.k_y_max > cfg.k_y_min))
    bad("admissible box must have positive extent");
  if (cfg.switch_policy != "toggle" && cfg.switch_policy != "full" &&
      cfg.switch_policy != "none")
    bad("switch_policy must be toggle, full or none");
  if (cfg.workers < 0) bad("workers must be nonnegative (0 = hardware)");
  if (cfg.dp > cfg.delta)
    std::cerr << "warning: dp > delta; the lag resolves to a single lock cell\n";
  if (cfg.horizon < cfg.delta)
    std::cerr << "warning: horizon < delta; switching never unlocks\n";
}

inline SwitchPolicy switch_policy_of(const RunConfig& cfg) {
  if (cfg.switch_policy == "toggle") return SwitchPolicy::kToggleOnly;
  if (cfg.switch_policy == "full") return SwitchPolicy::kFull;
  return SwitchPolicy::kNone;
}

inline HybridModel<2> build_model(const RunConfig& cfg) {
  return make_vehicle_model(VehicleParams{cfg.a_x, cfg.a_y, cfg.u_max}, cfg.delta,
                            Box<2>{{cfg.k_x_min, cfg.k_y_min}, {cfg.k_x_max, cfg.k_y_max}},
                            Ball<2>{{cfg.x0, cfg.y0}, cfg.x0_radius}, switch_policy_of(cfg));
}

inline SchemeConfig scheme_of(const RunConfig& cfg) {
  SchemeConfig s;
  s.cfl_factor = cfg.cfl_factor;
  s.clip_bound = cfg.clip_bound;
  s.horizon = cfg.horizon;
  s.dx = cfg.dx;
  s.dp = cfg.dp;
  s.margin = cfg.margin;
  s.control_samples = cfg.control_samples;
  s.reach_tol = cfg.reach_tol;
  s.record_cadence = cfg.cadence;
  s.retain_fields = cfg.retain_fields;
  s.workers = cfg.workers;
  return s;
}

/// Canonical text form: fixed section and key order, shortest-round-trip
/// numbers. Reparsing it reproduces the struct exactly; its hash names the
/// run in every output file.
inline std::string canonical_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[model]\n";
  out << "a_x = " << format_double(cfg.a_x) << "\n";
  out << "a_y = " << format_double(cfg.a_y) << "\n";
  out << "u_max = " << format_double(cfg.u_max) << "\n";
  out << "delta = " << format_double(cfg.delta) << "\n";
  out << "x0 = " << format_double(cfg.x0) << "\n";
  out << "y0 = " << format_double(cfg.y0) << "\n";
  out << "x0_radius = " << format_double(cfg.x0_radius) << "\n";
  out << "k_x_min = " << format_double(cfg.k_x_min) << "\n";
  out << "k_x_max = " << format_double(cfg.k_x_max) << "\n";
  out << "k_y_min = " << format_double(cfg.k_y_min) << "\n";
  out << "k_y_max = " << format_double(cfg.k_y_max) << "\n";
  out << "switch_policy = " << cfg.switch_policy << "\n";
  out << "[scheme]\n";
  out << "dx = " << format_double(cfg.dx) << "\n";
  out << "dp = " << format_double(cfg.dp) << "\n";
  out << "horizon = " << format_double(cfg.horizon) << "\n";
  out << "cfl_factor = " << format_double(cfg.cfl_factor) << "\n";
  out << "clip_bound = " << format_double(cfg.clip_bound) << "\n";
  out << "margin = " << format_double(cfg.margin) << "\n";
  out << "control_samples = " << cfg.control_samples << "\n";
  out << "reach_tol = " << format_double(cfg.reach_tol) << "\n";
  out << "[output]\n";
  out << "cadence = " << cfg.cadence << "\n";
  out << "retain_fields = " << (cfg.retain_fields ? "true" : "false") << "\n";
  out << "workers = " << cfg.workers << "\n";
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

inline std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a64(canonical_text(cfg))); }

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  return nlohmann::json{
      {"model",
       {{"a_x", cfg.a_x},
        {"a_y", cfg.a_y},
        {"u_max", cfg.u_max},
        {"delta", cfg.delta},
        {"x0", cfg.x0},
        {"y0", cfg.y0},
        {"x0_radius", cfg.x0_radius},
        {"k_x_min", cfg.k_x_min},
        {"k_x_max", cfg.k_x_max},
        {"k_y_min", cfg.k_y_min},
        {"k_y_max", cfg.k_y_max},
        {"switch_policy", cfg.switch_policy}}},
      {"scheme",
       {{"dx", cfg.dx},
        {"dp", cfg.dp},
        {"horizon", cfg.horizon},
        {"cfl_factor", cfg.cfl_factor},
        {"clip_bound", cfg.clip_bound},
        {"margin", cfg.margin},
        {"control_samples", cfg.control_samples},
        {"reach_tol", cfg.reach_tol}}},
      {"output",
       {{"cadence", cfg.cadence},
        {"retain_fields", cfg.retain_fields},
        {"workers", cfg.workers},
        {"seed", cfg.seed}}}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  const auto& m = j.at("model");
  cfg.a_x = m.at("a_x");
  cfg.a_y = m.at("a_y");
  cfg.u_max = m.at("u_max");
  cfg.delta = m.at("delta");
  cfg.x0 = m.at("x0");
  cfg.y0 = m.at("y0");
  cfg.x0_radius = m.at("x0_radius");
  cfg.k_x_min = m.at("k_x_min");
  cfg.k_x_max = m.at("k_x_max");
  cfg.k_y_min = m.at("k_y_min");
  cfg.k_y_max = m.at("k_y_max");
  cfg.switch_policy = m.at("switch_policy");
  const auto& s = j.at("scheme");
  cfg.dx = s.at("dx");
  cfg.dp = s.at("dp");
  cfg.horizon = s.at("horizon");
  cfg.cfl_factor = s.at("cfl_factor");
  cfg.clip_bound = s.at("clip_bound");
  cfg.margin = s.at("margin");
  cfg.control_samples = s.at("control_samples");
  cfg.reach_tol = s.at("reach_tol");
  const auto& o = j.at("output");
  cfg.cadence = o.at("cadence");
  cfg.retain_fields = o.at("retain_fields");
  cfg.workers = o.at("workers");
  cfg.seed = o.at("seed");
  return cfg;
}

}  // namespace hjreach
