// Command-line front end: pretrain, adapt, generate, evaluate, ablate, synth-data.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical abort.

#include "i2p/domains.hpp"
#include "i2p/errors.hpp"
#include "i2p/run.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

constexpr int kConfigExit = 2;
constexpr int kDataExit = 3;
constexpr int kNumericalExit = 4;

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& c : s)
    if (c == '_') c = '-';
  return "--" + s;
}

struct CommandOptions {
  std::string config_file;
  std::map<std::string, std::string> values;
};

void add_config_options(CLI::App* cmd, CommandOptions& opts) {
  cmd->add_option("--config", opts.config_file, "key = value config file")->check(CLI::ExistingFile);
  for (const auto& key : i2p::config_keys()) {
    std::string names = flag_name(key.name);
    if (key.name == "iterations") names += ",--iters";
    cmd->add_option_function<std::string>(
        names, [&opts, k = key.name](const std::string& v) { opts.values[k] = v; },
        key.doc + " (default: " + key.default_value + ")");
  }
}

i2p::RunConfig resolve(const CommandOptions& opts) {
  std::optional<std::filesystem::path> file;
  if (!opts.config_file.empty()) file = opts.config_file;
  return i2p::parse_config(file, opts.values);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot adaptation of a toy style-based generator"};
  app.require_subcommand(1);

  CommandOptions pretrain_opts, adapt_opts, generate_opts, evaluate_opts, ablate_opts, synth_opts;
  auto* pretrain = app.add_subcommand("pretrain", "train a source generator on a procedural domain");
  add_config_options(pretrain, pretrain_opts);
  auto* adapt = app.add_subcommand("adapt", "adapt a source checkpoint to a few-shot image directory");
  add_config_options(adapt, adapt_opts);
  auto* generate = app.add_subcommand("generate", "sample images from a checkpoint into a grid");
  add_config_options(generate, generate_opts);
  auto* evaluate = app.add_subcommand("evaluate", "FID / Intra-LPIPS / feature cosine between two image dirs");
  add_config_options(evaluate, evaluate_opts);
  auto* ablate = app.add_subcommand("ablate", "sweep one config key, one run directory per value");
  add_config_options(ablate, ablate_opts);
  auto* synth = app.add_subcommand("synth-data", "write procedural domain images (uses domain, num_samples, seed, out)");
  add_config_options(synth, synth_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*pretrain) {
      const auto cfg = resolve(pretrain_opts);
      const auto result = i2p::run_pretrain(cfg);
      std::cout << "pretrained " << cfg.pretrain_iterations << " steps on " << cfg.domain << " -> " << cfg.out << "\n";
      if (!result.log.empty())
        std::cout << "final l_adv_d=" << result.log.back().l_adv_d << " l_adv_g=" << result.log.back().l_adv_g << "\n";
    } else if (*adapt) {
      const auto cfg = resolve(adapt_opts);
      const auto result = i2p::run_adapt(cfg);
      std::cout << "adapted " << result.log.size() << " steps -> " << cfg.out << "\n";
    } else if (*generate) {
      const auto cfg = resolve(generate_opts);
      i2p::run_generate(cfg);
      std::cout << "wrote " << cfg.num_samples << " samples -> " << cfg.out << "\n";
    } else if (*evaluate) {
      const auto cfg = resolve(evaluate_opts);
      const auto report = i2p::run_evaluate(cfg);
      std::cout << report.to_json().dump(2) << "\n";
    } else if (*ablate) {
      const auto cfg = resolve(ablate_opts);
      for (const auto& dir : i2p::run_ablate(cfg)) std::cout << dir.string() << "\n";
    } else if (*synth) {
      const auto cfg = resolve(synth_opts);
      if (cfg.out.empty()) throw i2p::ConfigError("config key 'out' is required for this command");
      i2p::save_images(i2p::sample_domain(cfg.domain, cfg.num_samples, 32, cfg.adapt.seed), cfg.out);
      std::cout << "wrote " << cfg.num_samples << " " << cfg.domain << " images -> " << cfg.out << "\n";
    }
  } catch (const i2p::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const i2p::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kNumericalExit;
  } catch (const i2p::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataExit;
  } catch (const i2p::InvalidInput& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataExit;
  }
  return 0;
}
