#pragma once

#include "i2p/checkpoint.hpp"
#include "i2p/consistency.hpp"
#include "i2p/image_io.hpp"
#include "i2p/injection.hpp"
#include "i2p/optim.hpp"
#include "i2p/substitution.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace i2p {

struct AdaptConfig {
  double alpha = 0.5;
  double lambda = 1.0;
  double loss_ratio_r = 0.5;
  double learning_rate = 2e-3;
  int batch_size = 4;
  int iterations = 500;
  std::uint64_t seed = 0;
  double r1_gamma = 0.1;  // 0 disables the penalty
  int checkpoint_every = 100;
  int log_every = 1;
  std::string encoder = "frozen-conv-v1";
  int feature_dim = 64;
  /// Whose style vectors the style term compares with the raw images:
  /// "target" (target-generated) or "source" (source-generated).
  std::string style_loss_source = "target";

  void validate() const;
  InjectionConfig injection() const { return {alpha}; }
  LossWeights weights() const { return LossWeights::from_ratio(lambda, loss_ratio_r); }
  AdamConfig adam() const { return {learning_rate, 0.0, 0.99, 1e-8}; }
};

void to_json(nlohmann::json& j, const AdaptConfig& c);
void from_json(const nlohmann::json& j, AdaptConfig& c);

/// Everything that evolves during adaptation.
struct TrainState {
  std::int64_t step = 0;
  ModelBundle target;
  AdamState opt_mapping;
  AdamState opt_synthesis;
  AdamState opt_decoupler;
  AdamState opt_discriminator;
  std::mt19937_64 rng;
  std::vector<LossReport> history;
};

/// Frozen pieces shared by every step of one adaptation run.
struct AdaptContext {
  ModelBundle source;  // all collections frozen
  std::unique_ptr<FeatureExtractor> encoder;
  DecouplerConfig decoupler;

  static AdaptContext create(const ModelBundle& source, const AdaptConfig& cfg);
};

/// Target starts as a trainable clone of the source plus a fresh decoupler.
TrainState init_train_state(const AdaptContext& ctx, const AdaptConfig& cfg);

/// Per-step diagnostics beyond the loss terms.
struct StepDiagnostics {
  double injected_mean_dev = 0.0;  // max |mean(w'_T^i) - mean(w_S^i)| over batch and layers
  double injected_std_dev = 0.0;   // same for the std
  double max_style_content_cos = 0.0;
};

struct StepResult {
  LossReport report;
  StepDiagnostics diag;
};

/// One alternating update: critic on (raw, detached injected fakes), then
/// mapping + synthesis + decoupler on the total objective.
StepResult training_step(TrainState& state, const AdaptContext& ctx, const FewShotDataset& data,
                         const AdaptConfig& cfg);

/// Plain adversarial fine-tuning of the target generator: no injection, no
/// consistency terms. Consumes randomness exactly like training_step.
LossReport finetune_step(TrainState& state, const FewShotDataset& data, const AdaptConfig& cfg);

/// Pieces of training_step exposed for inspection.
struct GeneratorPass {
  Tensor z;
  Var w_source;
  Var w_target;
  Var w_injected;
  Var x_source;
  Var x_target;
  Tensor x_raw;
};
GeneratorPass generator_pass(TrainState& state, const AdaptContext& ctx, const FewShotDataset& data,
                             const AdaptConfig& cfg);

struct ConsistencyTerms {
  SubstitutionFeatures features;
  Var l_c;
  Var l_s;
  Var l_r;
};
ConsistencyTerms consistency_terms(const GeneratorPass& pass, const TrainState& state, const AdaptContext& ctx,
                                   const AdaptConfig& cfg);

/// Also stores the frozen source mapping so the adapted generator can be
/// sampled from the checkpoint alone.
Checkpoint train_state_checkpoint(const TrainState& state, const AdaptContext& ctx, const AdaptConfig& cfg);
/// Restores a state saved by train_state_checkpoint; the architecture must match `ctx.source`.
TrainState restore_train_state(const Checkpoint& ckpt, const AdaptContext& ctx);

struct AdaptResult {
  ModelBundle target;
  std::vector<LossReport> log;           // one entry per executed step (all steps)
  std::vector<StepDiagnostics> diagnostics;  // for the steps run in this call
};

/// Runs steps state.step+1 .. cfg.iterations, writing into `out_dir`:
///   loss.csv              step,l_adv_d,l_adv_g,l_c,l_s,l_r,l_total,grad_norm_F
///   injection_stats.csv   step,mean_dev,std_dev,max_style_content_cos
///   checkpoints/step_NNNNNN.ckpt every cfg.checkpoint_every steps
///   final.ckpt, grid.png (source row over adapted row, shared latents)
/// With `resume`, continues from that state instead of a fresh one.
AdaptResult adapt(const ModelBundle& source, const FewShotDataset& data, const AdaptConfig& cfg,
                  const std::filesystem::path& out_dir, std::optional<TrainState> resume = std::nullopt);

/// Same, starting from a source checkpoint file (manifest kind "source").
AdaptResult adapt(const std::filesystem::path& source_checkpoint, const FewShotDataset& data,
                  const AdaptConfig& cfg, const std::filesystem::path& out_dir);

struct PretrainConfig {
  ArchConfig arch;
  int iterations = 2000;
  int batch_size = 4;
  double learning_rate = 2e-3;
  double r1_gamma = 0.1;
  std::uint64_t seed = 0;
  int log_every = 100;
};

struct PretrainResult {
  ModelBundle source;
  std::vector<LossReport> log;
};

/// Trains the toy generator on a procedural domain with the adversarial loss
/// only. Aborts with NumericalError on non-finite or exploding (> 1e4) losses.
PretrainResult pretrain_source(const std::string& domain_id, const PretrainConfig& cfg);

Checkpoint source_checkpoint(const ModelBundle& source, const PretrainConfig& cfg, const std::string& domain);
/// Loads a "source" checkpoint; everything comes back frozen.
ModelBundle load_source(const std::filesystem::path& path, const ArchConfig* expected = nullptr);

/// Generates n images [3,R,R] from a bundle for latents drawn with `seed`.
std::vector<Tensor> generate_images(const ModelBundle& bundle, int n, std::uint64_t seed);

/// Images from a bundle for explicit latents z:[n,z_dim] (evaluated in chunks).
std::vector<Tensor> generate_images(const ModelBundle& bundle, const Tensor& z);

/// Sampling path of a generator. With a source mapping present the target
/// latent is injected with the source latent of the same z before synthesis,
/// as during adaptation; without one this is plain mapping + synthesis.
struct Generator {
  ModelBundle model;
  ParamSet source_mapping;
  InjectionConfig injection{0.0};

  static Generator plain(const ModelBundle& model);
  static Generator adapted(const ModelBundle& target, const ModelBundle& source, const InjectionConfig& injection);
  /// Loads a "source" checkpoint (plain) or a "train_state" checkpoint (adapted).
  static Generator load(const std::filesystem::path& path);

  bool injects() const { return source_mapping.size() != 0; }
  std::vector<Tensor> generate(const Tensor& z) const;
  std::vector<Tensor> generate(int n, std::uint64_t seed) const;
};

std::vector<Tensor> unbatch(const Tensor& batch);
Tensor batch_of(const std::vector<Tensor>& images);

}  // namespace i2p
