#include "i2p/run.hpp"

#include "i2p/errors.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace i2p {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write " + path.string());
  os << text;
}

void require(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string("config key '") + key + "' is required for this command");
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

PretrainResult run_pretrain(const RunConfig& cfg, const ArchConfig& arch) {
  require(cfg.out, "out");
  PretrainConfig pc;
  pc.arch = arch;
  pc.iterations = cfg.pretrain_iterations;
  pc.batch_size = cfg.adapt.batch_size;
  pc.learning_rate = cfg.adapt.learning_rate;
  pc.r1_gamma = cfg.adapt.r1_gamma;
  pc.seed = cfg.adapt.seed;
  PretrainResult result = pretrain_source(cfg.domain, pc);
  save_checkpoint(cfg.out, source_checkpoint(result.source, pc, cfg.domain));
  write_text(cfg.out + ".config.txt", emit_config(cfg));
  return result;
}

AdaptResult run_adapt(const RunConfig& cfg) {
  require(cfg.source, "source");
  require(cfg.data, "data");
  require(cfg.out, "out");
  const ModelBundle source = load_source(cfg.source);
  const FewShotDataset data = load_dataset(cfg.data, source.arch.img_res());
  const fs::path out(cfg.out);
  fs::create_directories(out);
  write_text(out / "config.txt", emit_config(cfg));

  std::optional<TrainState> resume;
  if (!cfg.resume.empty()) {
    const AdaptContext ctx = AdaptContext::create(source, cfg.adapt);
    resume = restore_train_state(load_checkpoint(cfg.resume), ctx);
  }
  AdaptResult result = adapt(source, data, cfg.adapt, out, std::move(resume));
  verify_run_dir(out);
  return result;
}

void run_generate(const RunConfig& cfg) {
  require(cfg.source, "source");
  require(cfg.out, "out");
  const std::vector<Tensor> images = Generator::load(cfg.source).generate(cfg.num_samples, cfg.adapt.seed);
  const int cols = std::min(cfg.grid_cols, cfg.num_samples);
  const int rows = (cfg.num_samples + cols - 1) / cols;
  const fs::path out(cfg.out);
  if (out.extension() == ".png") {
    emit_grid(images, rows, cols, out);
    return;
  }
  save_images(images, out / "samples", "sample_");
  emit_grid(images, rows, cols, out / "grid.png");
}

MetricReport run_evaluate(const RunConfig& cfg) {
  require(cfg.real, "real");
  require(cfg.fake, "fake");
  const auto extractor = make_extractor(cfg.extractor);
  const fs::path first = [&] {
    for (const auto& e : fs::directory_iterator(cfg.real))
      if (e.is_regular_file() && e.path().extension() == ".png") return e.path();
    throw DataError("no .png images in " + cfg.real);
  }();
  const int res = read_image(first).dim(1);
  const FewShotDataset real = load_dataset(cfg.real, res);
  const FewShotDataset fake = load_dataset(cfg.fake, res);
  const MetricReport report = evaluate(real.images, fake.images, cfg.metric_list(), *extractor);
  if (!cfg.out.empty()) write_text(cfg.out, report.to_json().dump(2) + "\n");
  return report;
}

std::vector<fs::path> run_ablate(const RunConfig& cfg) {
  require(cfg.out, "out");
  const std::vector<std::string> values = split(cfg.ablate_values);
  if (values.empty()) throw ConfigError("ablate_values is empty");
  std::vector<fs::path> dirs;
  for (const std::string& v : values) {
    RunConfig run = cfg;
    set_config_value(run, cfg.ablate_key, v);
    run.validate();
    run.out = (fs::path(cfg.out) / (cfg.ablate_key + "=" + v)).string();
    std::cerr << "ablate: " << cfg.ablate_key << "=" << v << " -> " << run.out << "\n";
    run_adapt(run);
    dirs.emplace_back(run.out);
  }
  return dirs;
}

void verify_run_dir(const fs::path& dir) {
  std::vector<std::string> missing;
  for (const char* name : {"config.txt", "loss.csv", "final.ckpt", "grid.png"})
    if (!fs::is_regular_file(dir / name)) missing.emplace_back(name);
  if (!fs::is_directory(dir / "checkpoints")) missing.emplace_back("checkpoints/");
  if (!missing.empty()) {
    std::string msg = "run directory " + dir.string() + " is incomplete, missing:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }
}

}  // namespace i2p
