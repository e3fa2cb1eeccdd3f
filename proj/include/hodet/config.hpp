#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hodet/data.hpp"
#include "hodet/trainer.hpp"

namespace hodet {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

// Every recognised key, in the order they are echoed.
const std::vector<ConfigKey>& config_keys();

using KeyValues = std::map<std::string, std::string>;

// Flat "key = value" lines; '#' starts a comment. Unknown keys are rejected.
KeyValues parse_key_values(const std::string& text, const std::string& source = "<config>");
KeyValues read_config_file(const std::filesystem::path& path);

enum class DataSource { Synthetic, Manifest };

struct RunConfig {
  KeyValues values;  // effective key/value map, defaults filled in

  DataSource source = DataSource::Synthetic;
  std::filesystem::path manifest;
  std::string voc_class;
  SyntheticSpec synthetic;
  TrainConfig train;
  std::filesystem::path out_dir;
  std::filesystem::path checkpoint;
  std::filesystem::path image;
  std::filesystem::path annotation;
  std::filesystem::path trace_output;

  // Layers `overrides` on top of `file_values` on top of the defaults.
  // Throws ConfigError on unknown keys or malformed values.
  static RunConfig resolve(const KeyValues& file_values, const KeyValues& overrides);

  std::string dump() const;
};

// Scenes from the configured data source.
std::vector<Scene> load_scenes(const RunConfig& cfg);

}  // namespace hodet
