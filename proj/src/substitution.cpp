#include "i2p/substitution.hpp"

#include "i2p/errors.hpp"
#include "i2p/injection.hpp"
#include "i2p/ops.hpp"

#include <cmath>

namespace i2p {

namespace {
constexpr double kSlope = 0.2;
}

FrozenConvEncoder::FrozenConvEncoder(std::string id, std::uint64_t seed, int img_channels,
                                     std::vector<int> channels, std::vector<int> strides)
    : id_(std::move(id)), img_channels_(img_channels), channels_(std::move(channels)), strides_(std::move(strides)) {
  if (channels_.empty() || channels_.size() != strides_.size())
    throw ConfigError("encoder '" + id_ + "': channels and strides must be non-empty and equally long");
  std::mt19937_64 rng(seed);
  int in = img_channels_;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const double he = std::sqrt(2.0 / (in * 9.0));
    params_.add("stage" + std::to_string(i) + ".weight", normal_tensor({channels_[i], in, 3, 3}, he, rng));
    params_.add("stage" + std::to_string(i) + ".bias", Tensor({channels_[i]}));
    in = channels_[i];
  }
  params_.set_trainable(false);
}

std::vector<Var> FrozenConvEncoder::taps(const Var& images) const {
  if (images.shape().size() != 4 || images.shape()[1] != img_channels_)
    throw InvalidInput("encoder '" + id_ + "': expected [N," + std::to_string(img_channels_) + ",H,W], got " +
                       shape_str(images.shape()));
  std::vector<Var> out;
  Var x = images;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const std::string name = "stage" + std::to_string(i);
    x = ops::leaky_relu(ops::conv2d(x, params_.at(name + ".weight"), params_.at(name + ".bias"), strides_[i], 1),
                        kSlope);
    out.push_back(x);
  }
  return out;
}

Shape FrozenConvEncoder::feature_shape(int img_res) const {
  int res = img_res;
  for (int s : strides_) res = (res + 2 - 3) / s + 1;
  return {channels_.back(), res, res};
}

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& id, int img_channels) {
  if (id == "frozen-conv-v1")
    return std::make_unique<FrozenConvEncoder>(id, 0x5eedc0de, img_channels, std::vector<int>{16, 32, 32},
                                               std::vector<int>{1, 2, 2});
  throw ConfigError("unknown encoder/extractor id '" + id + "'");
}

int DecouplerConfig::flat_dim() const {
  int res = feature_res;
  for (int i = 0; i < 2; ++i) res = (res - 1) / 2 + 1;
  return hidden_channels * res * res;
}

ParamSet init_decoupler(const DecouplerConfig& cfg, double init_std, std::mt19937_64& rng) {
  if (cfg.feature_dim < 2) throw ConfigError("feature_dim must be >= 2");
  ParamSet p;
  p.add("conv0.weight", normal_tensor({cfg.hidden_channels, cfg.feature_channels, 3, 3}, init_std, rng));
  p.add("conv0.bias", Tensor({cfg.hidden_channels}));
  p.add("conv1.weight", normal_tensor({cfg.hidden_channels, cfg.hidden_channels, 3, 3}, init_std, rng));
  p.add("conv1.bias", Tensor({cfg.hidden_channels}));
  p.add("style_head.weight", normal_tensor({cfg.feature_dim, cfg.flat_dim()}, init_std, rng));
  p.add("style_head.bias", Tensor({cfg.feature_dim}));
  p.add("content_head.weight", normal_tensor({cfg.feature_dim, cfg.flat_dim()}, init_std, rng));
  p.add("content_head.bias", Tensor({cfg.feature_dim}));
  return p;
}

StyleContent decouple(const ParamSet& decoupler, const DecouplerConfig& cfg, const Var& features) {
  const Shape& s = features.shape();
  if (s.size() != 4 || s[1] != cfg.feature_channels || s[2] != cfg.feature_res || s[3] != cfg.feature_res)
    throw InvalidInput("decouple: expected [N," + std::to_string(cfg.feature_channels) + "," +
                       std::to_string(cfg.feature_res) + "," + std::to_string(cfg.feature_res) + "], got " +
                       shape_str(s));
  Var h = ops::conv2d(features, decoupler.at("conv0.weight"), decoupler.at("conv0.bias"), 2, 1);
  h = ops::leaky_relu(h, kSlope);
  h = ops::conv2d(h, decoupler.at("conv1.weight"), decoupler.at("conv1.bias"), 2, 1);
  h = ops::reshape(h, {s[0], static_cast<int>(h.numel()) / s[0]});
  Var style = ops::linear(h, decoupler.at("style_head.weight"), decoupler.at("style_head.bias"));
  Var content = ops::linear(h, decoupler.at("content_head.weight"), decoupler.at("content_head.bias"));
  return {ops::l2_normalize_rows(style), ops::l2_normalize_rows(content)};
}

Var modulate(const Var& content, const Var& style) {
  if (content.shape() != style.shape())
    throw InvalidInput("modulate: shape " + shape_str(content.shape()) + " vs " + shape_str(style.shape()));
  return adain(content, style, content.shape().back());
}

SubstitutionFeatures substitution_pass(const Var& x_source, const Var& x_target, const Var& x_raw,
                                       const FeatureExtractor& encoder, const ParamSet& decoupler,
                                       const DecouplerConfig& cfg) {
  const int n = x_source.shape().empty() ? 0 : x_source.shape()[0];
  if (x_target.shape().empty() || x_raw.shape().empty() || x_target.shape()[0] != n || x_raw.shape()[0] != n)
    throw InvalidInput("substitution_pass: batch sizes differ (" + shape_str(x_source.shape()) + ", " +
                       shape_str(x_target.shape()) + ", " + shape_str(x_raw.shape()) + ")");
  SubstitutionFeatures f;
  f.source = decouple(decoupler, cfg, encoder.encode(x_source));
  f.target = decouple(decoupler, cfg, encoder.encode(x_target));
  f.raw = decouple(decoupler, cfg, encoder.encode(x_raw));
  f.m_cs_sr = modulate(f.source.content, f.raw.style);
  f.m_ct_sr = modulate(f.target.content, f.raw.style);
  f.m_cs_st = modulate(f.source.content, f.target.style);
  return f;
}

double max_style_content_cosine(const StyleContent& sc) {
  const Tensor& s = sc.style.value();
  const Tensor& c = sc.content.value();
  const int n = s.dim(0), d = s.dim(1);
  double worst = 0.0;
  for (int r = 0; r < n; ++r) {
    double ss = 0.0, cc = 0.0, sc_dot = 0.0;
    for (int j = 0; j < d; ++j) {
      ss += s[r * d + j] * s[r * d + j];
      cc += c[r * d + j] * c[r * d + j];
      sc_dot += s[r * d + j] * c[r * d + j];
    }
    if (ss == 0.0 || cc == 0.0) return 1.0;  // a zero vector is trivially dependent
    worst = std::max(worst, std::abs(sc_dot) / std::sqrt(ss * cc));
  }
  return worst;
}

double max_style_content_cosine(const SubstitutionFeatures& f) {
  return std::max({max_style_content_cosine(f.source), max_style_content_cosine(f.target),
                   max_style_content_cosine(f.raw)});
}

}  // namespace i2p
