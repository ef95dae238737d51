#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lqrq/harness.hpp"

namespace lqrq {

// Flat key-value configuration with optional [section] headers:
//
//   [plant]
//   m = 0.2          # becomes plant.m
//   [learner]
//   bounds_lo = -0.5, -3, -3, -5
//
// Overrides ("plant.m=0.4") are applied after the file. Unknown keys, malformed
// lines and invariant violations raise ConfigError with the line or field name.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

// Same, from text. base_dir resolves relative paths (run.warm_start_summary).
ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {},
                              const std::filesystem::path& base_dir = {});

// Every key needed to rebuild cfg bit-exactly, in a fixed order.
KeyValues config_to_key_values(const ExperimentConfig& cfg);

// Applies "key=value" settings on top of cfg.
void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides,
                     const std::filesystem::path& base_dir = {});

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);
std::string format_list(std::span<const double> values);
Vector parse_list(std::string_view s);

}  // namespace lqrq
