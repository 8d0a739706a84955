#pragma once

#include "i2p/params.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace i2p {

/// Frozen image encoder. Its output feeds the decoupler and the perceptual
/// metrics; any implementation (including large pretrained encoders) can be
/// plugged in behind this interface.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;

  virtual std::string id() const = 0;
  /// Activations after each stage; the last entry is the semantic feature map.
  /// Parameters never receive gradients, the result stays differentiable in `images`.
  virtual std::vector<Var> taps(const Var& images) const = 0;
  /// [C,H,W] of the semantic feature map for square inputs of side `img_res`.
  virtual Shape feature_shape(int img_res) const = 0;
  virtual std::size_t tap_count() const = 0;
  /// Per-tap LPIPS weights (all ones unless the extractor ships learned ones).
  virtual std::vector<double> tap_weights() const { return std::vector<double>(tap_count(), 1.0); }
  virtual std::uint64_t checksum() const = 0;

  Var encode(const Var& images) const { return taps(images).back(); }
};

/// Randomly initialised (fixed seed) conv stack with leaky-ReLU stages.
class FrozenConvEncoder final : public FeatureExtractor {
 public:
  FrozenConvEncoder(std::string id, std::uint64_t seed, int img_channels, std::vector<int> channels,
                    std::vector<int> strides);

  std::string id() const override { return id_; }
  std::vector<Var> taps(const Var& images) const override;
  Shape feature_shape(int img_res) const override;
  std::size_t tap_count() const override { return channels_.size(); }
  std::uint64_t checksum() const override { return params_.checksum(); }
  const ParamSet& params() const { return params_; }

 private:
  std::string id_;
  int img_channels_;
  std::vector<int> channels_;
  std::vector<int> strides_;
  ParamSet params_;
};

/// Known ids: "frozen-conv-v1" (3 stages, 32x8x8 features for 32px input).
std::unique_ptr<FeatureExtractor> make_extractor(const std::string& id, int img_channels = 3);

struct DecouplerConfig {
  int feature_channels = 32;
  int feature_res = 8;
  int hidden_channels = 32;
  int feature_dim = 64;

  int flat_dim() const;
};

/// Conv(3x3,s2) -> leaky-ReLU -> conv(3x3,s2) -> flatten -> {style, content} linear heads.
ParamSet init_decoupler(const DecouplerConfig& cfg, double init_std, std::mt19937_64& rng);

struct StyleContent {
  Var style;    // [N, feature_dim], unit rows
  Var content;  // [N, feature_dim], unit rows
};

/// Split semantic features [N,C,h,w] into unit-norm style and content vectors.
StyleContent decouple(const ParamSet& decoupler, const DecouplerConfig& cfg, const Var& features);

/// Re-standardise content rows to the statistics of style rows (AdaIN).
Var modulate(const Var& content, const Var& style);

struct SubstitutionFeatures {
  StyleContent source;  // from source-generated images
  StyleContent target;  // from target-generated images
  StyleContent raw;     // from few-shot training images
  Var m_cs_sr;          // modulate(C_S, S_R)
  Var m_ct_sr;          // modulate(C_T, S_R)
  Var m_cs_st;          // modulate(C_S, S_T)
};

/// Encode, decouple and remix three aligned image batches.
SubstitutionFeatures substitution_pass(const Var& x_source, const Var& x_target, const Var& x_raw,
                                       const FeatureExtractor& encoder, const ParamSet& decoupler,
                                       const DecouplerConfig& cfg);

/// Largest |cos(S, C)| over every row of the three decompositions.
double max_style_content_cosine(const SubstitutionFeatures& f);
double max_style_content_cosine(const StyleContent& sc);

}  // namespace i2p
