#pragma once

#include "i2p/training.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace i2p {

/// Fully resolved settings of one CLI invocation.
struct RunConfig {
  AdaptConfig adapt;
  std::string preset = "desk";  // "full" switches the iteration default to 5002
  std::string source;           // source checkpoint for adapt / generate
  std::string data;             // few-shot image directory
  std::string out;              // output directory or file
  std::string resume;           // train-state checkpoint to continue from
  std::string domain = "two-tone-shapes";
  int pretrain_iterations = 2000;
  std::string metrics = "fid,intra_lpips,feature_cosine";
  std::string extractor = "frozen-conv-v1";
  std::string real;
  std::string fake;
  int num_samples = 16;
  int grid_cols = 8;
  std::string ablate_key = "alpha";
  std::string ablate_values = "0.1,0.3,0.5,0.7,0.9";

  void validate() const;
  std::vector<std::string> metric_list() const;

  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string doc;
};

/// Every accepted key with its default and a one-line description.
const std::vector<ConfigKey>& config_keys();

/// Environment variable that overrides the seed from files (flags still win).
inline constexpr const char* kSeedEnv = "I2P_SEED";

/// Parses "key = value" lines ('#' starts a comment).
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Resolution order: defaults < preset < file < $I2P_SEED < flags.
/// Unknown keys, malformed values and out-of-range values raise ConfigError
/// naming the key.
RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::map<std::string, std::string>& flags);

/// Applies one key; throws ConfigError on unknown keys or bad values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);

/// All keys as "key = value" lines, round-trippable through parse_config.
std::string emit_config(const RunConfig& cfg);

}  // namespace i2p
