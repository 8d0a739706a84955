#include "i2p/training.hpp"

#include "i2p/domains.hpp"
#include "i2p/errors.hpp"
#include "i2p/ops.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace i2p {

namespace fs = std::filesystem;

namespace {

constexpr double kCosWarn = 0.99;
constexpr double kCosFail = 0.999;
constexpr double kDivergence = 1e4;

std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

std::mt19937_64 rng_from_string(const std::string& s) {
  std::mt19937_64 rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw DataError("corrupt RNG state in checkpoint");
  return rng;
}

Tensor sample_raw_batch(const FewShotDataset& data, int n, std::mt19937_64& rng) {
  if (data.size() == 0) throw InvalidInput("few-shot dataset is empty");
  std::uniform_int_distribution<int> pick(0, data.size() - 1);
  std::vector<Tensor> chosen;
  chosen.reserve(n);
  for (int i = 0; i < n; ++i) chosen.push_back(data.images[pick(rng)]);
  return batch_of(chosen);
}

std::string describe(const LossReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "l_adv_d=%g l_adv_g=%g l_c=%g l_s=%g l_r=%g l_total=%g grad_norm_F=%g",
                r.l_adv_d, r.l_adv_g, r.l_c, r.l_s, r.l_r, r.l_total, r.grad_norm_f);
  return buf;
}

void require_finite(const LossReport& r, std::int64_t step, const char* where) {
  if (!r.all_finite())
    throw NumericalError(std::string(where) + ": non-finite loss at step " + std::to_string(step) + " (" +
                         describe(r) + ")");
}

/// Critic update on a real batch and detached fakes. Returns the critic loss
/// including the R1 penalty value.
double critic_step(TrainState& state, const Tensor& x_real, const Tensor& x_fake, const AdaptConfig& cfg) {
  ParamSet& d = state.target.discriminator;
  const ArchConfig& arch = state.target.arch;
  d.zero_grad();
  const Var loss = discriminator_loss(discriminate(d, arch, Var(x_real)), discriminate(d, arch, Var(x_fake)));
  double value = loss.item();
  if (cfg.r1_gamma > 0.0) {
    const R1Penalty r1 = r1_penalty(d, arch, x_real, cfg.r1_gamma);
    backward(ops::add(loss, r1.surrogate));
    value += r1.value;
  } else {
    backward(loss);
  }
  adam_step(d, state.opt_discriminator, cfg.adam());
  return value;
}

void write_csv_header(std::ostream& os) { os << "step,l_adv_d,l_adv_g,l_c,l_s,l_r,l_total,grad_norm_F\n"; }

void write_csv_row(std::ostream& os, std::int64_t step, const LossReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", static_cast<long long>(step),
                r.l_adv_d, r.l_adv_g, r.l_c, r.l_s, r.l_r, r.l_total, r.grad_norm_f);
  os << buf;
}

bool is_logged(std::int64_t step, const AdaptConfig& cfg) {
  return (step - 1) % cfg.log_every == 0 || step == cfg.iterations;
}

Tensor history_tensor(const std::vector<LossReport>& h) {
  Tensor t({static_cast<int>(h.size()), 7});
  for (std::size_t i = 0; i < h.size(); ++i) {
    const LossReport& r = h[i];
    const double row[7] = {r.l_adv_d, r.l_adv_g, r.l_c, r.l_s, r.l_r, r.l_total, r.grad_norm_f};
    std::copy(row, row + 7, t.data() + i * 7);
  }
  return t;
}

std::vector<LossReport> history_from(const Tensor& t) {
  std::vector<LossReport> h;
  if (t.ndim() != 2) return h;
  for (int i = 0; i < t.dim(0); ++i) {
    const double* p = t.data() + static_cast<std::size_t>(i) * 7;
    h.push_back({p[0], p[1], p[2], p[3], p[4], p[5], p[6]});
  }
  return h;
}

StepDiagnostics injection_diagnostics(const Var& w_injected, const Var& w_source) {
  StepDiagnostics d;
  const Tensor& a = w_injected.value();
  const Tensor& b = w_source.value();
  const int width = a.shape().back();
  const std::size_t rows = a.numel() / static_cast<std::size_t>(width);
  for (std::size_t r = 0; r < rows; ++r) {
    const ChannelStats sa = stats(a.span().subspan(r * width, width));
    const ChannelStats sb = stats(b.span().subspan(r * width, width));
    d.injected_mean_dev = std::max(d.injected_mean_dev, std::abs(sa.mean - sb.mean));
    d.injected_std_dev = std::max(d.injected_std_dev, std::abs(sa.std - sb.std));
  }
  return d;
}

}  // namespace

void AdaptConfig::validate() const {
  injection().validate();
  weights().validate();
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(r1_gamma >= 0.0)) throw ConfigError("r1_gamma must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0 (0 disables)");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (feature_dim < 2) throw ConfigError("feature_dim must be >= 2");
  if (style_loss_source != "target" && style_loss_source != "source")
    throw ConfigError("style_loss_source must be 'target' or 'source'");
}

void to_json(nlohmann::json& j, const AdaptConfig& c) {
  j = nlohmann::json{{"alpha", c.alpha},
                     {"lambda", c.lambda},
                     {"loss_ratio_r", c.loss_ratio_r},
                     {"learning_rate", c.learning_rate},
                     {"batch_size", c.batch_size},
                     {"iterations", c.iterations},
                     {"seed", c.seed},
                     {"r1_gamma", c.r1_gamma},
                     {"checkpoint_every", c.checkpoint_every},
                     {"log_every", c.log_every},
                     {"encoder", c.encoder},
                     {"feature_dim", c.feature_dim},
                     {"style_loss_source", c.style_loss_source}};
}

void from_json(const nlohmann::json& j, AdaptConfig& c) {
  j.at("alpha").get_to(c.alpha);
  j.at("lambda").get_to(c.lambda);
  j.at("loss_ratio_r").get_to(c.loss_ratio_r);
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("batch_size").get_to(c.batch_size);
  j.at("iterations").get_to(c.iterations);
  j.at("seed").get_to(c.seed);
  j.at("r1_gamma").get_to(c.r1_gamma);
  j.at("checkpoint_every").get_to(c.checkpoint_every);
  j.at("log_every").get_to(c.log_every);
  j.at("encoder").get_to(c.encoder);
  j.at("feature_dim").get_to(c.feature_dim);
  j.at("style_loss_source").get_to(c.style_loss_source);
}

AdaptContext AdaptContext::create(const ModelBundle& source, const AdaptConfig& cfg) {
  AdaptContext ctx;
  ctx.source = clone_model(source);
  ctx.source.set_trainable(false);
  ctx.encoder = make_extractor(cfg.encoder, source.arch.img_channels);
  const Shape fs = ctx.encoder->feature_shape(source.arch.img_res());
  ctx.decoupler = DecouplerConfig{fs[0], fs[1], fs[0], cfg.feature_dim};
  return ctx;
}

TrainState init_train_state(const AdaptContext& ctx, const AdaptConfig& cfg) {
  cfg.validate();
  TrainState s;
  s.target = clone_model(ctx.source);
  std::mt19937_64 init_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  s.target.decoupler = init_decoupler(ctx.decoupler, ctx.source.arch.init_std, init_rng);
  s.target.set_trainable(true);
  s.rng.seed(cfg.seed);
  return s;
}

GeneratorPass generator_pass(TrainState& state, const AdaptContext& ctx, const FewShotDataset& data,
                             const AdaptConfig& cfg) {
  const ArchConfig& arch = state.target.arch;
  GeneratorPass p;
  p.z = sample_latents(cfg.batch_size, arch.z_dim, state.rng);
  p.x_raw = sample_raw_batch(data, cfg.batch_size, state.rng);
  const Var z(p.z);
  p.w_source = map_latent(ctx.source.mapping, arch, z);
  p.w_target = map_latent(state.target.mapping, arch, z);
  p.w_injected = inject(p.w_target, p.w_source, cfg.injection());
  p.x_source = synthesize(ctx.source.synthesis, arch, p.w_source);
  p.x_target = synthesize(state.target.synthesis, arch, p.w_injected);
  return p;
}

ConsistencyTerms consistency_terms(const GeneratorPass& pass, const TrainState& state, const AdaptContext& ctx,
                                   const AdaptConfig& cfg) {
  ConsistencyTerms t;
  t.features = substitution_pass(pass.x_source, pass.x_target, Var(pass.x_raw), *ctx.encoder,
                                 state.target.decoupler, ctx.decoupler);
  const SubstitutionFeatures& f = t.features;
  t.l_c = content_loss(f.source.content, f.target.content);
  t.l_s = style_loss(cfg.style_loss_source == "source" ? f.source.style : f.target.style, f.raw.style);
  t.l_r = synthesis_loss(f.m_cs_sr, f.m_ct_sr, f.m_cs_st);
  return t;
}

StepResult training_step(TrainState& state, const AdaptContext& ctx, const FewShotDataset& data,
                         const AdaptConfig& cfg) {
  ++state.step;
  StepResult out;
  GeneratorPass pass = generator_pass(state, ctx, data, cfg);
  out.diag = injection_diagnostics(pass.w_injected, pass.w_source);

  out.report.l_adv_d = critic_step(state, pass.x_raw, pass.x_target.value(), cfg);

  ModelBundle& t = state.target;
  t.mapping.zero_grad();
  t.synthesis.zero_grad();
  t.decoupler.zero_grad();
  t.discriminator.zero_grad();
  ConsistencyTerms terms = consistency_terms(pass, state, ctx, cfg);
  out.diag.max_style_content_cos = max_style_content_cosine(terms.features);
  const Var l_adv_g = generator_loss(discriminate(t.discriminator, t.arch, pass.x_target));
  const Var total = total_loss(l_adv_g, terms.l_c, terms.l_s, terms.l_r, cfg.weights());
  backward(total);
  t.discriminator.zero_grad();

  out.report.l_adv_g = l_adv_g.item();
  out.report.l_c = terms.l_c.item();
  out.report.l_s = terms.l_s.item();
  out.report.l_r = terms.l_r.item();
  out.report.l_total = total.item();
  out.report.grad_norm_f = t.mapping.grad_norm();
  require_finite(out.report, state.step, "training_step");
  if (out.diag.max_style_content_cos >= kCosFail)
    throw NumericalError("decoupled style/content vectors collapsed at step " + std::to_string(state.step) +
                         " (|cos| = " + std::to_string(out.diag.max_style_content_cos) + ")");
  if (out.diag.max_style_content_cos >= kCosWarn)
    std::cerr << "warning: step " << state.step << " style/content |cos| = " << out.diag.max_style_content_cos << "\n";

  const AdamConfig adam = cfg.adam();
  adam_step(t.mapping, state.opt_mapping, adam);
  adam_step(t.synthesis, state.opt_synthesis, adam);
  adam_step(t.decoupler, state.opt_decoupler, adam);
  state.history.push_back(out.report);
  return out;
}

namespace {

LossReport adversarial_update(TrainState& state, const Tensor& z, const Tensor& x_raw, const AdaptConfig& cfg) {
  ModelBundle& t = state.target;
  const Var x_fake = synthesize(t.synthesis, t.arch, map_latent(t.mapping, t.arch, Var(z)));

  LossReport r;
  r.l_adv_d = critic_step(state, x_raw, x_fake.value(), cfg);

  t.mapping.zero_grad();
  t.synthesis.zero_grad();
  t.discriminator.zero_grad();
  const Var l_adv_g = generator_loss(discriminate(t.discriminator, t.arch, x_fake));
  backward(l_adv_g);
  t.discriminator.zero_grad();
  r.l_adv_g = l_adv_g.item();
  r.l_total = r.l_adv_g;
  r.grad_norm_f = t.mapping.grad_norm();
  require_finite(r, state.step, "adversarial step");

  adam_step(t.mapping, state.opt_mapping, cfg.adam());
  adam_step(t.synthesis, state.opt_synthesis, cfg.adam());
  state.history.push_back(r);
  return r;
}

}  // namespace

LossReport finetune_step(TrainState& state, const FewShotDataset& data, const AdaptConfig& cfg) {
  ++state.step;
  const Tensor z = sample_latents(cfg.batch_size, state.target.arch.z_dim, state.rng);
  const Tensor x_raw = sample_raw_batch(data, cfg.batch_size, state.rng);
  return adversarial_update(state, z, x_raw, cfg);
}

Checkpoint train_state_checkpoint(const TrainState& state, const AdaptContext& ctx, const AdaptConfig& cfg) {
  Checkpoint c;
  c.manifest["format"] = "i2p-checkpoint";
  c.manifest["version"] = 1;
  c.manifest["kind"] = "train_state";
  c.manifest["seed"] = cfg.seed;
  c.manifest["step"] = state.step;
  c.manifest["rng_state"] = rng_to_string(state.rng);
  c.manifest["adapt_config"] = cfg;
  put_bundle(c, state.target);
  put_params(c, "source_mapping", ctx.source.mapping);
  put_adam(c, "mapping", state.opt_mapping);
  put_adam(c, "synthesis", state.opt_synthesis);
  put_adam(c, "decoupler", state.opt_decoupler);
  put_adam(c, "discriminator", state.opt_discriminator);
  c.tensors["history"] = history_tensor(state.history);
  return c;
}

TrainState restore_train_state(const Checkpoint& ckpt, const AdaptContext& ctx) {
  if (ckpt.manifest.value("kind", "") != "train_state")
    throw ConfigError("checkpoint is not an adaptation state (kind '" + ckpt.manifest.value("kind", "") + "')");
  TrainState s;
  s.target = get_bundle(ckpt, &ctx.source.arch);
  s.target.set_trainable(true);
  s.step = ckpt.manifest.at("step").get<std::int64_t>();
  s.rng = rng_from_string(ckpt.manifest.at("rng_state").get<std::string>());
  s.opt_mapping = get_adam(ckpt, "mapping");
  s.opt_synthesis = get_adam(ckpt, "synthesis");
  s.opt_decoupler = get_adam(ckpt, "decoupler");
  s.opt_discriminator = get_adam(ckpt, "discriminator");
  if (auto it = ckpt.tensors.find("history"); it != ckpt.tensors.end()) s.history = history_from(it->second);
  return s;
}

AdaptResult adapt(const ModelBundle& source, const FewShotDataset& data, const AdaptConfig& cfg,
                  const fs::path& out_dir, std::optional<TrainState> resume) {
  cfg.validate();
  if (data.size() == 0) throw InvalidInput("few-shot dataset is empty");
  for (const Tensor& img : data.images)
    if (img.shape() != Shape{source.arch.img_channels, source.arch.img_res(), source.arch.img_res()})
      throw InvalidInput("dataset image shape " + shape_str(img.shape()) + " does not match the generator");
  const AdaptContext ctx = AdaptContext::create(source, cfg);
  TrainState state = resume ? std::move(*resume) : init_train_state(ctx, cfg);

  fs::create_directories(out_dir / "checkpoints");
  std::ofstream loss_csv(out_dir / "loss.csv", std::ios::trunc);
  std::ofstream inj_csv(out_dir / "injection_stats.csv", std::ios::trunc);
  if (!loss_csv || !inj_csv) throw DataError("cannot write logs into " + out_dir.string());
  write_csv_header(loss_csv);
  inj_csv << "step,mean_dev,std_dev,max_style_content_cos\n";
  for (std::size_t i = 0; i < state.history.size(); ++i)
    if (is_logged(static_cast<std::int64_t>(i + 1), cfg)) write_csv_row(loss_csv, static_cast<std::int64_t>(i + 1), state.history[i]);

  AdaptResult result;
  while (state.step < cfg.iterations) {
    StepResult r;
    try {
      r = training_step(state, ctx, data, cfg);
    } catch (const NumericalError& e) {
      std::ofstream dump(out_dir / "abort_dump.json");
      nlohmann::json j{{"step", state.step}, {"error", e.what()}, {"config", cfg}};
      dump << j.dump(2) << "\n";
      throw;
    }
    result.diagnostics.push_back(r.diag);
    if (is_logged(state.step, cfg)) {
      write_csv_row(loss_csv, state.step, r.report);
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(state.step),
                    r.diag.injected_mean_dev, r.diag.injected_std_dev, r.diag.max_style_content_cos);
      inj_csv << buf;
      loss_csv.flush();
    }
    if (cfg.checkpoint_every > 0 && state.step % cfg.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "step_%06lld.ckpt", static_cast<long long>(state.step));
      save_checkpoint(out_dir / "checkpoints" / name, train_state_checkpoint(state, ctx, cfg));
    }
  }
  save_checkpoint(out_dir / "final.ckpt", train_state_checkpoint(state, ctx, cfg));

  // Paired samples: identical latents through source and adapted target.
  std::mt19937_64 grid_rng(cfg.seed + 7);
  const Tensor z = sample_latents(8, source.arch.z_dim, grid_rng);
  std::vector<Tensor> cells = generate_images(ctx.source, z);
  const std::vector<Tensor> adapted = Generator::adapted(state.target, ctx.source, cfg.injection()).generate(z);
  cells.insert(cells.end(), adapted.begin(), adapted.end());
  emit_grid(cells, 2, 8, out_dir / "grid.png");

  result.log = state.history;
  result.target = std::move(state.target);
  return result;
}

AdaptResult adapt(const fs::path& source_checkpoint, const FewShotDataset& data, const AdaptConfig& cfg,
                  const fs::path& out_dir) {
  return adapt(load_source(source_checkpoint), data, cfg, out_dir);
}

PretrainResult pretrain_source(const std::string& domain_id, const PretrainConfig& cfg) {
  const ShapesDomain domain = ShapesDomain::parse(domain_id);
  if (cfg.iterations < 1 || cfg.batch_size < 1) throw ConfigError("pretrain needs iterations >= 1 and batch_size >= 1");
  AdaptConfig step_cfg;
  step_cfg.batch_size = cfg.batch_size;
  step_cfg.learning_rate = cfg.learning_rate;
  step_cfg.r1_gamma = cfg.r1_gamma;

  TrainState state;
  state.target = ModelBundle::create(cfg.arch, cfg.seed);
  state.target.set_trainable(true);
  state.rng.seed(cfg.seed + 1);
  std::mt19937_64 data_rng(cfg.seed + 2);
  const int res = cfg.arch.img_res();

  PretrainResult out;
  for (int it = 0; it < cfg.iterations; ++it) {
    ++state.step;
    const Tensor z = sample_latents(cfg.batch_size, cfg.arch.z_dim, state.rng);
    std::vector<Tensor> real;
    for (int i = 0; i < cfg.batch_size; ++i) real.push_back(domain.sample(res, data_rng));
    const LossReport r = adversarial_update(state, z, batch_of(real), step_cfg);
    if (std::abs(r.l_adv_d) > kDivergence || std::abs(r.l_adv_g) > kDivergence)
      throw NumericalError("pretraining diverged at step " + std::to_string(state.step) + " (" + describe(r) + ")");
    if ((it + 1) % cfg.log_every == 0 || it + 1 == cfg.iterations) out.log.push_back(r);
  }
  out.source = std::move(state.target);
  out.source.set_trainable(false);
  return out;
}

Checkpoint source_checkpoint(const ModelBundle& source, const PretrainConfig& cfg, const std::string& domain) {
  Checkpoint c;
  c.manifest["format"] = "i2p-checkpoint";
  c.manifest["version"] = 1;
  c.manifest["kind"] = "source";
  c.manifest["seed"] = cfg.seed;
  c.manifest["step"] = cfg.iterations;
  c.manifest["domain"] = domain;
  put_bundle(c, source);
  return c;
}

ModelBundle load_source(const fs::path& path, const ArchConfig* expected) {
  const Checkpoint c = load_checkpoint(path);
  const std::string kind = c.manifest.value("kind", "");
  if (kind != "source" && kind != "train_state")
    throw ConfigError(path.string() + ": unexpected checkpoint kind '" + kind + "'");
  ModelBundle b = get_bundle(c, expected);
  b.decoupler = ParamSet();
  b.set_trainable(false);
  return b;
}

std::vector<Tensor> generate_images(const ModelBundle& bundle, const Tensor& z) {
  std::vector<Tensor> out;
  ModelBundle frozen = bundle;
  frozen.set_trainable(false);
  const int n = z.dim(0);
  constexpr int kChunk = 16;
  for (int b = 0; b < n; b += kChunk) {
    const int e = std::min(n, b + kChunk);
    const Var zb = ops::slice0(Var(z), b, e);
    const Var x = synthesize(frozen.synthesis, frozen.arch, map_latent(frozen.mapping, frozen.arch, zb));
    for (Tensor& img : unbatch(x.value())) out.push_back(std::move(img));
  }
  return out;
}

std::vector<Tensor> generate_images(const ModelBundle& bundle, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return generate_images(bundle, sample_latents(n, bundle.arch.z_dim, rng));
}

Generator Generator::plain(const ModelBundle& model) {
  Generator g;
  g.model = model;
  g.model.decoupler = ParamSet();
  g.model.set_trainable(false);
  return g;
}

Generator Generator::adapted(const ModelBundle& target, const ModelBundle& source, const InjectionConfig& injection) {
  if (!(target.arch == source.arch)) throw ConfigError("adapted and source architectures differ");
  injection.validate();
  Generator g = plain(target);
  g.source_mapping = source.mapping;
  g.source_mapping.set_trainable(false);
  g.injection = injection;
  return g;
}

Generator Generator::load(const fs::path& path) {
  const Checkpoint c = load_checkpoint(path);
  const std::string kind = c.manifest.value("kind", "");
  if (kind == "source") return plain(get_bundle(c));
  if (kind != "train_state") throw ConfigError(path.string() + ": unexpected checkpoint kind '" + kind + "'");
  Generator g = plain(get_bundle(c));
  g.source_mapping = get_params(c, "source_mapping");
  if (g.source_mapping.size() != g.model.mapping.size())
    throw ConfigError(path.string() + ": adaptation checkpoint lacks the source mapping");
  g.source_mapping.set_trainable(false);
  g.injection = c.manifest.at("adapt_config").get<AdaptConfig>().injection();
  return g;
}

std::vector<Tensor> Generator::generate(const Tensor& z) const {
  if (!injects()) return generate_images(model, z);
  std::vector<Tensor> out;
  const int n = z.dim(0);
  constexpr int kChunk = 16;
  for (int b = 0; b < n; b += kChunk) {
    const int e = std::min(n, b + kChunk);
    const Var zb = ops::slice0(Var(z), b, e);
    const Var w = inject(map_latent(model.mapping, model.arch, zb), map_latent(source_mapping, model.arch, zb), injection);
    for (Tensor& img : unbatch(synthesize(model.synthesis, model.arch, w).value())) out.push_back(std::move(img));
  }
  return out;
}

std::vector<Tensor> Generator::generate(int n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  return generate(sample_latents(n, model.arch.z_dim, rng));
}

std::vector<Tensor> unbatch(const Tensor& batch) {
  const int n = batch.dim(0);
  Shape item(batch.shape().begin() + 1, batch.shape().end());
  const std::size_t per = batch.numel() / static_cast<std::size_t>(n);
  std::vector<Tensor> out;
  for (int i = 0; i < n; ++i) {
    Tensor t(item);
    std::copy(batch.data() + i * per, batch.data() + (i + 1) * per, t.data());
    out.push_back(std::move(t));
  }
  return out;
}

Tensor batch_of(const std::vector<Tensor>& images) {
  if (images.empty()) throw InvalidInput("batch_of: no images");
  Shape shape{static_cast<int>(images.size())};
  shape.insert(shape.end(), images[0].shape().begin(), images[0].shape().end());
  Tensor out(shape);
  const std::size_t per = images[0].numel();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].shape() != images[0].shape()) throw InvalidInput("batch_of: image shapes differ");
    std::copy(images[i].data(), images[i].data() + per, out.data() + i * per);
  }
  return out;
}

}  // namespace i2p
