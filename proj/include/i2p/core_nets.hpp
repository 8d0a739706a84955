#pragma once

#include "i2p/params.hpp"

#include "json.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace i2p {

/// Hyperparameters of the toy generator/discriminator pair.
///
/// The synthesis network starts from a learned `const_res`^2 tensor; block 0
/// convolves it in place and every later block upsamples by two first, so the
/// output resolution is const_res * 2^(num_layers - 1).
struct ArchConfig {
  int z_dim = 64;
  int w_dim = 64;
  int mapping_depth = 3;
  int const_res = 4;
  int img_channels = 3;
  std::vector<int> synth_channels{64, 48, 32, 16};  // one entry per modulated block
  std::vector<int> disc_channels{16, 32, 64, 64};   // one entry per stride-2 block
  double init_std = 0.02;
  double lrelu_slope = 0.2;

  int num_layers() const { return static_cast<int>(synth_channels.size()); }
  int img_res() const { return const_res << (num_layers() - 1); }
  void validate() const;

  /// Tiny configuration used by the finite-difference tests: 4x4 images.
  static ArchConfig micro();

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

void to_json(nlohmann::json& j, const ArchConfig& a);
void from_json(const nlohmann::json& j, ArchConfig& a);

ParamSet init_mapping(const ArchConfig& arch, std::mt19937_64& rng);
ParamSet init_synthesis(const ArchConfig& arch, std::mt19937_64& rng);
ParamSet init_discriminator(const ArchConfig& arch, std::mt19937_64& rng);

/// z:[N,z_dim] -> w:[N,L,w_dim]. An MLP trunk feeds one affine head per layer.
Var map_latent(const ParamSet& mapping, const ArchConfig& arch, const Var& z);

/// w:[N,L,w_dim] -> images [N,C,R,R] in [-1,1].
Var synthesize(const ParamSet& synthesis, const ArchConfig& arch, const Var& w);

/// images [N,C,R,R] -> logits [N].
Var discriminate(const ParamSet& discriminator, const ArchConfig& arch, const Var& images);

/// Every parameter collection of one generator + critic (+ decoupler once
/// adaptation starts). Copies are deep.
struct ModelBundle {
  ArchConfig arch;
  ParamSet mapping;
  ParamSet synthesis;
  ParamSet discriminator;
  ParamSet decoupler;  // empty for a freshly pretrained source model

  static ModelBundle create(const ArchConfig& arch, std::uint64_t seed);
  void set_trainable(bool on);
  std::uint64_t checksum() const;
};

/// Deep copy; the clone's trainable flags can be changed independently.
ModelBundle clone_model(const ModelBundle& bundle);

/// Standard-normal latent batch [n, z_dim].
Tensor sample_latents(int n, int z_dim, std::mt19937_64& rng);

}  // namespace i2p
