#include "i2p/config.hpp"

#include "i2p/errors.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace i2p {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct KeyImpl {
  ConfigKey key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Field>
KeyImpl real_key(std::string name, std::string doc, Field field) {
  RunConfig defaults;
  const std::string def = fmt_real(field(defaults));
  return {{name, def, std::move(doc)},
          [name, field](RunConfig& c, const std::string& v) { field(c) = parse_real(name, v); },
          [field](const RunConfig& c) { return fmt_real(field(const_cast<RunConfig&>(c))); }};
}

template <typename Field>
KeyImpl int_key(std::string name, std::string doc, Field field) {
  RunConfig defaults;
  const std::string def = std::to_string(field(defaults));
  return {{name, def, std::move(doc)},
          [name, field](RunConfig& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(field(c))>;
            const long long parsed = parse_int(name, v);
            if constexpr (std::is_unsigned_v<T>) {
              if (parsed < 0) throw ConfigError("config key '" + name + "' must be non-negative");
            }
            field(c) = static_cast<T>(parsed);
          },
          [field](const RunConfig& c) { return std::to_string(field(const_cast<RunConfig&>(c))); }};
}

template <typename Field>
KeyImpl str_key(std::string name, std::string doc, Field field) {
  RunConfig defaults;
  const std::string def = field(defaults);
  return {{name, def, std::move(doc)}, [field](RunConfig& c, const std::string& v) { field(c) = v; },
          [field](const RunConfig& c) { return field(const_cast<RunConfig&>(c)); }};
}

const std::vector<KeyImpl>& key_table() {
  static const std::vector<KeyImpl> table = {
      real_key("alpha", "identity injection degree in [0,1]", [](RunConfig& c) -> double& { return c.adapt.alpha; }),
      real_key("lambda", "weight of the identity consistency terms (>= 0)",
               [](RunConfig& c) -> double& { return c.adapt.lambda; }),
      real_key("loss_ratio_r", "share of the synthesis term vs content+style, in [0,1]",
               [](RunConfig& c) -> double& { return c.adapt.loss_ratio_r; }),
      real_key("learning_rate", "Adam step size for every trainable collection",
               [](RunConfig& c) -> double& { return c.adapt.learning_rate; }),
      int_key("batch_size", "images per step", [](RunConfig& c) -> int& { return c.adapt.batch_size; }),
      int_key("iterations", "adaptation steps (full scale: 5002)",
              [](RunConfig& c) -> int& { return c.adapt.iterations; }),
      str_key("preset", "desk | full; full sets iterations=5002 unless given",
              [](RunConfig& c) -> std::string& { return c.preset; }),
      int_key("seed", "seed for latents, data sampling and decoupler init",
              [](RunConfig& c) -> std::uint64_t& { return c.adapt.seed; }),
      real_key("r1_gamma", "R1 penalty weight on the critic (0 disables)",
               [](RunConfig& c) -> double& { return c.adapt.r1_gamma; }),
      int_key("checkpoint_every", "steps between checkpoints (0 disables)",
              [](RunConfig& c) -> int& { return c.adapt.checkpoint_every; }),
      int_key("log_every", "steps between loss-log rows", [](RunConfig& c) -> int& { return c.adapt.log_every; }),
      str_key("encoder", "frozen encoder feeding the decoupler",
              [](RunConfig& c) -> std::string& { return c.adapt.encoder; }),
      int_key("feature_dim", "length of style/content vectors",
              [](RunConfig& c) -> int& { return c.adapt.feature_dim; }),
      str_key("style_loss_source", "target | source: style vectors compared with raw images",
              [](RunConfig& c) -> std::string& { return c.adapt.style_loss_source; }),
      str_key("source", "source checkpoint path", [](RunConfig& c) -> std::string& { return c.source; }),
      str_key("data", "few-shot image directory", [](RunConfig& c) -> std::string& { return c.data; }),
      str_key("out", "output directory (or file for pretrain/generate/evaluate)",
              [](RunConfig& c) -> std::string& { return c.out; }),
      str_key("resume", "train-state checkpoint to continue from",
              [](RunConfig& c) -> std::string& { return c.resume; }),
      str_key("domain", "procedural source domain for pretrain", [](RunConfig& c) -> std::string& { return c.domain; }),
      int_key("pretrain_iterations", "pretraining steps",
              [](RunConfig& c) -> int& { return c.pretrain_iterations; }),
      str_key("metrics", "comma list of fid, intra_lpips, feature_cosine",
              [](RunConfig& c) -> std::string& { return c.metrics; }),
      str_key("extractor", "feature extractor id for metrics",
              [](RunConfig& c) -> std::string& { return c.extractor; }),
      str_key("real", "directory of reference images", [](RunConfig& c) -> std::string& { return c.real; }),
      str_key("fake", "directory of generated images", [](RunConfig& c) -> std::string& { return c.fake; }),
      int_key("num_samples", "images drawn by generate", [](RunConfig& c) -> int& { return c.num_samples; }),
      int_key("grid_cols", "columns of emitted grids", [](RunConfig& c) -> int& { return c.grid_cols; }),
      str_key("ablate_key", "config key swept by ablate", [](RunConfig& c) -> std::string& { return c.ablate_key; }),
      str_key("ablate_values", "comma list of values for ablate_key",
              [](RunConfig& c) -> std::string& { return c.ablate_values; }),
  };
  return table;
}

const KeyImpl& find_key(const std::string& key) {
  for (const auto& k : key_table())
    if (k.key.name == key) return k;
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) { return emit_config(a) == emit_config(b); }

void RunConfig::validate() const {
  adapt.validate();
  if (preset != "desk" && preset != "full") throw ConfigError("preset must be 'desk' or 'full'");
  if (pretrain_iterations < 1) throw ConfigError("pretrain_iterations must be >= 1");
  if (num_samples < 1) throw ConfigError("num_samples must be >= 1");
  if (grid_cols < 1) throw ConfigError("grid_cols must be >= 1");
  for (const auto& m : metric_list())
    if (m != "fid" && m != "intra_lpips" && m != "feature_cosine")
      throw ConfigError("metrics: unknown metric '" + m + "'");
  if (ablate_key == "ablate_key" || ablate_key == "ablate_values") throw ConfigError("ablate_key cannot sweep itself");
  find_key(ablate_key);
}

std::vector<std::string> RunConfig::metric_list() const { return split_list(metrics); }

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& k : key_table()) out.push_back(k.key);
    return out;
  }();
  return keys;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  find_key(key).set(cfg, value);
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) { return find_key(key).get(cfg); }

RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::map<std::string, std::string>& flags) {
  std::map<std::string, std::string> merged;
  if (file) merged = read_config_file(*file);
  if (const char* env = std::getenv(kSeedEnv); env && *env) merged["seed"] = env;
  for (const auto& [k, v] : flags) merged[k] = v;

  RunConfig cfg;
  for (const auto& [k, v] : merged) find_key(k);  // reject unknown keys before applying anything
  if (auto it = merged.find("preset"); it != merged.end()) {
    set_config_value(cfg, "preset", it->second);
    if (it->second == "full" && !merged.contains("iterations")) cfg.adapt.iterations = 5002;
  }
  for (const auto& [k, v] : merged) set_config_value(cfg, k, v);
  cfg.validate();
  return cfg;
}

std::string emit_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : key_table()) out += k.key.name + " = " + k.get(cfg) + "\n";
  return out;
}

}  // namespace i2p
