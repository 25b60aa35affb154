#pragma once

// Flat `section.key = value` configuration for PipelineConfig. Every key is
// also exposed as a `--section.key` command-line flag.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mapalign/pipeline.hpp"

namespace mapalign {

struct ConfigKey {
  std::string name;
  std::string help;
};

const std::vector<ConfigKey>& config_keys();

// Throws kInvalidArgument for unknown keys and out-of-range values.
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const PipelineConfig& config, std::string_view key);

// One `key = value` per line; blank lines and '#' comments are ignored.
void apply_config_text(PipelineConfig& config, const std::string& text);
void load_config_file(PipelineConfig& config, const std::filesystem::path& path);

// (key, value) for every key, in declaration order.
std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& config);

}  // namespace mapalign
