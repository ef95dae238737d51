#include "lqrq/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace lqrq {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::string format_list(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

Vector parse_list(std::string_view s) {
  Vector out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::size_t end = comma == std::string_view::npos ? s.size() : comma;
    out.push_back(parse_double(s.substr(pos, end - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

namespace {

using RawConfig = std::map<std::string, std::string, std::less<>>;

// Keys in echo order. run.warm_start_summary is input-only: it resolves to
// run.warm_start_m.
const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "plant.m",          "plant.M_cart",         "plant.l",
      "plant.g",          "plant.mode",           "weights.q_diag",
      "weights.r",        "learner.n_s",          "learner.noise_std",
      "learner.h_threshold", "learner.bounds_lo", "learner.bounds_hi",
      "learner.mu",       "learner.nu",           "learner.ridge_fallback",
      "run.dt",           "run.duration",         "run.seed",
      "run.learning",     "run.convergence_ratio", "run.fault_time",
      "run.fault_scale_m", "run.fault_scale_l",   "run.warm_start_gain",
      "run.warm_start_m", "run.warm_start_summary",
  };
  return keys;
}

bool is_known(std::string_view key) {
  for (const auto& k : known_keys())
    if (k == key) return true;
  return false;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void set_raw(RawConfig& raw, const std::string& key, const std::string& value,
             const std::string& where) {
  if (!is_known(key)) throw ConfigError(where + "unknown key '" + key + "'");
  raw[key] = value;
}

void apply_override_strings(RawConfig& raw, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected key=value");
    set_raw(raw, trim(std::string_view(o).substr(0, eq)), trim(std::string_view(o).substr(eq + 1)),
            "override: ");
  }
}

bool is_none(const std::string& v) { return v.empty() || v == "none"; }

double get_double(const std::string& key, const std::string& v) {
  try {
    const double d = parse_double(v);
    if (!std::isfinite(d)) throw std::invalid_argument("non-finite");
    return d;
  } catch (const std::invalid_argument&) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
}

Vector get_list(const std::string& key, const std::string& v, std::size_t expected) {
  Vector out;
  try {
    out = parse_list(v);
  } catch (const std::invalid_argument&) {
    throw ConfigError(key + ": expected a comma-separated list of numbers, got '" + v + "'");
  }
  if (out.size() != expected) {
    throw ConfigError(key + ": expected " + std::to_string(expected) + " values, got " +
                      std::to_string(out.size()));
  }
  for (double d : out)
    if (!std::isfinite(d)) throw ConfigError(key + ": non-finite value");
  return out;
}

std::uint64_t get_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool get_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

State to_state(const Vector& v) { return {v[0], v[1], v[2], v[3]}; }

ExperimentConfig build(const RawConfig& raw, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  auto has = [&](const char* key) { return raw.find(key) != raw.end(); };
  auto value = [&](const char* key) -> const std::string& { return raw.find(key)->second; };

  if (has("plant.m")) cfg.plant.m = get_double("plant.m", value("plant.m"));
  if (has("plant.M_cart")) cfg.plant.M_cart = get_double("plant.M_cart", value("plant.M_cart"));
  if (has("plant.l")) cfg.plant.l = get_double("plant.l", value("plant.l"));
  if (has("plant.g")) cfg.plant.g = get_double("plant.g", value("plant.g"));
  if (has("plant.mode")) {
    const std::string& mode = value("plant.mode");
    if (mode == "nonlinear") {
      cfg.plant_mode = PlantMode::Nonlinear;
    } else if (mode == "linearized") {
      cfg.plant_mode = PlantMode::Linearized;
    } else {
      throw ConfigError("plant.mode: expected nonlinear or linearized, got '" + mode + "'");
    }
  }

  {
    Vector q_diag = {100.0, 1.0, 10.0, 1.0};
    double r = 1.0;
    if (has("weights.q_diag")) q_diag = get_list("weights.q_diag", value("weights.q_diag"), kStateDim);
    if (has("weights.r")) r = get_double("weights.r", value("weights.r"));
    cfg.weights = CostWeights::diagonal(q_diag, r);
  }

  LearnerConfig& l = cfg.learner;
  if (has("learner.n_s")) l.n_s = get_unsigned("learner.n_s", value("learner.n_s"));
  if (has("learner.noise_std")) l.noise_std = get_double("learner.noise_std", value("learner.noise_std"));
  if (has("learner.h_threshold")) {
    l.h_threshold = get_double("learner.h_threshold", value("learner.h_threshold"));
  }
  if (has("learner.bounds_lo")) {
    l.bounds_lo = to_state(get_list("learner.bounds_lo", value("learner.bounds_lo"), kStateDim));
  }
  if (has("learner.bounds_hi")) {
    l.bounds_hi = to_state(get_list("learner.bounds_hi", value("learner.bounds_hi"), kStateDim));
  }
  if (has("learner.mu")) l.mu = get_double("learner.mu", value("learner.mu"));
  if (has("learner.nu")) l.nu = get_double("learner.nu", value("learner.nu"));
  if (has("learner.ridge_fallback")) {
    l.ridge_fallback = get_bool("learner.ridge_fallback", value("learner.ridge_fallback"));
  }

  if (has("run.dt")) cfg.dt = get_double("run.dt", value("run.dt"));
  if (has("run.duration")) cfg.duration = get_double("run.duration", value("run.duration"));
  if (has("run.seed")) l.rng_seed = get_unsigned("run.seed", value("run.seed"));
  if (has("run.learning")) cfg.learning = get_bool("run.learning", value("run.learning"));
  if (has("run.convergence_ratio")) {
    cfg.convergence_ratio = get_double("run.convergence_ratio", value("run.convergence_ratio"));
  }

  if (has("run.fault_time") && !is_none(value("run.fault_time"))) {
    FaultSpec f;
    f.time = get_double("run.fault_time", value("run.fault_time"));
    if (has("run.fault_scale_m")) f.scale_m = get_double("run.fault_scale_m", value("run.fault_scale_m"));
    if (has("run.fault_scale_l")) f.scale_l = get_double("run.fault_scale_l", value("run.fault_scale_l"));
    cfg.fault = f;
  }

  if (has("run.warm_start_gain") && !is_none(value("run.warm_start_gain"))) {
    cfg.warm_start_gain = Gain{get_list("run.warm_start_gain", value("run.warm_start_gain"), kStateDim)};
  }
  const bool inline_m = has("run.warm_start_m") && !is_none(value("run.warm_start_m"));
  const bool summary_m = has("run.warm_start_summary") && !is_none(value("run.warm_start_summary"));
  if (inline_m && summary_m) {
    throw ConfigError("run.warm_start_m and run.warm_start_summary are mutually exclusive");
  }
  if (inline_m) {
    const Vector p = get_list("run.warm_start_m", value("run.warm_start_m"), kQParamCount);
    cfg.warm_start_m = QParams{SvecBasis(kQDim).decode(p)};
  }
  if (summary_m) {
    std::filesystem::path p = value("run.warm_start_summary");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    RunSummary s;
    try {
      s = read_summary(p);
    } catch (const IoError& e) {
      throw ConfigError(std::string("run.warm_start_summary: ") + e.what());
    }
    if (s.final_m.m.dim() != kQDim) {
      throw ConfigError("run.warm_start_summary: " + p.string() + " has no final_m");
    }
    cfg.warm_start_m = s.final_m;
  }

  cfg.validate();
  return cfg;
}

RawConfig to_raw(const ExperimentConfig& cfg) {
  RawConfig raw;
  for (auto& [k, v] : config_to_key_values(cfg)) raw[k] = v;
  return raw;
}

}  // namespace

KeyValues config_to_key_values(const ExperimentConfig& cfg) {
  KeyValues kv;
  auto put = [&](std::string key, std::string value) { kv.emplace_back(std::move(key), std::move(value)); };
  put("plant.m", format_double(cfg.plant.m));
  put("plant.M_cart", format_double(cfg.plant.M_cart));
  put("plant.l", format_double(cfg.plant.l));
  put("plant.g", format_double(cfg.plant.g));
  put("plant.mode", cfg.plant_mode == PlantMode::Nonlinear ? "nonlinear" : "linearized");
  Vector q_diag;
  for (std::size_t i = 0; i < cfg.weights.q.dim(); ++i) q_diag.push_back(cfg.weights.q(i, i));
  put("weights.q_diag", format_list(q_diag));
  put("weights.r", format_double(cfg.weights.r(0, 0)));
  const LearnerConfig& l = cfg.learner;
  put("learner.n_s", std::to_string(l.n_s));
  put("learner.noise_std", format_double(l.noise_std));
  put("learner.h_threshold", format_double(l.h_threshold));
  put("learner.bounds_lo", format_list(l.bounds_lo));
  put("learner.bounds_hi", format_list(l.bounds_hi));
  put("learner.mu", format_double(l.mu));
  put("learner.nu", format_double(l.nu));
  put("learner.ridge_fallback", l.ridge_fallback ? "true" : "false");
  put("run.dt", format_double(cfg.dt));
  put("run.duration", format_double(cfg.duration));
  put("run.seed", std::to_string(l.rng_seed));
  put("run.learning", cfg.learning ? "true" : "false");
  put("run.convergence_ratio", format_double(cfg.convergence_ratio));
  if (cfg.fault) {
    put("run.fault_time", format_double(cfg.fault->time));
    put("run.fault_scale_m", format_double(cfg.fault->scale_m));
    put("run.fault_scale_l", format_double(cfg.fault->scale_l));
  } else {
    put("run.fault_time", "none");
  }
  put("run.warm_start_gain", cfg.warm_start_gain ? format_list(cfg.warm_start_gain->k) : "none");
  put("run.warm_start_m",
      cfg.warm_start_m ? format_list(SvecBasis(kQDim).encode(cfg.warm_start_m->m)) : "none");
  return kv;
}

ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides,
                              const std::filesystem::path& base_dir) {
  RawConfig raw;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) throw ConfigError(where + "malformed section header");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    set_raw(raw, key, trim(std::string_view(body).substr(eq + 1)), where);
  }
  apply_override_strings(raw, overrides);
  return build(raw, base_dir);
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides, path.parent_path());
}

void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides,
                     const std::filesystem::path& base_dir) {
  RawConfig raw = to_raw(cfg);
  apply_override_strings(raw, overrides);
  cfg = build(raw, base_dir);
}

}  // namespace lqrq
