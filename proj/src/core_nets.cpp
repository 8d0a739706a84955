#include "i2p/core_nets.hpp"

#include "i2p/errors.hpp"
#include "i2p/ops.hpp"

#include <string>

namespace i2p {

namespace {

constexpr double kNormEps = 1e-8;

std::string blk(int i) { return "block" + std::to_string(i) + "."; }

void add_linear(ParamSet& p, const std::string& name, int out, int in, double std, std::mt19937_64& rng) {
  p.add(name + ".weight", normal_tensor({out, in}, std, rng));
  p.add(name + ".bias", Tensor({out}));
}

void add_conv(ParamSet& p, const std::string& name, int out, int in, int k, double std, std::mt19937_64& rng) {
  p.add(name + ".weight", normal_tensor({out, in, k, k}, std, rng));
  p.add(name + ".bias", Tensor({out}));
}

Var lin(const ParamSet& p, const std::string& name, const Var& x) {
  return ops::linear(x, p.at(name + ".weight"), p.at(name + ".bias"));
}

Var conv(const ParamSet& p, const std::string& name, const Var& x, int stride, int pad) {
  return ops::conv2d(x, p.at(name + ".weight"), p.at(name + ".bias"), stride, pad);
}

}  // namespace

void ArchConfig::validate() const {
  if (z_dim < 1 || w_dim < 2 || mapping_depth < 1 || const_res < 1 || img_channels < 1)
    throw ConfigError("architecture dimensions must be positive (w_dim >= 2)");
  if (synth_channels.empty() || disc_channels.empty())
    throw ConfigError("architecture needs at least one synthesis and one discriminator block");
  if ((img_res() >> static_cast<int>(disc_channels.size())) < 1)
    throw ConfigError("too many discriminator blocks for a " + std::to_string(img_res()) + "px image");
}

ArchConfig ArchConfig::micro() {
  ArchConfig a;
  a.z_dim = 5;
  a.w_dim = 6;
  a.mapping_depth = 2;
  a.const_res = 2;
  a.img_channels = 3;
  a.synth_channels = {4, 3};
  a.disc_channels = {3, 4};
  a.init_std = 0.5;
  return a;
}

void to_json(nlohmann::json& j, const ArchConfig& a) {
  j = nlohmann::json{{"z_dim", a.z_dim},
                     {"w_dim", a.w_dim},
                     {"mapping_depth", a.mapping_depth},
                     {"const_res", a.const_res},
                     {"img_channels", a.img_channels},
                     {"synth_channels", a.synth_channels},
                     {"disc_channels", a.disc_channels},
                     {"init_std", a.init_std},
                     {"lrelu_slope", a.lrelu_slope}};
}

void from_json(const nlohmann::json& j, ArchConfig& a) {
  j.at("z_dim").get_to(a.z_dim);
  j.at("w_dim").get_to(a.w_dim);
  j.at("mapping_depth").get_to(a.mapping_depth);
  j.at("const_res").get_to(a.const_res);
  j.at("img_channels").get_to(a.img_channels);
  j.at("synth_channels").get_to(a.synth_channels);
  j.at("disc_channels").get_to(a.disc_channels);
  j.at("init_std").get_to(a.init_std);
  j.at("lrelu_slope").get_to(a.lrelu_slope);
}

ParamSet init_mapping(const ArchConfig& arch, std::mt19937_64& rng) {
  ParamSet p;
  for (int i = 0; i < arch.mapping_depth; ++i)
    add_linear(p, "fc" + std::to_string(i), arch.w_dim, i == 0 ? arch.z_dim : arch.w_dim, arch.init_std, rng);
  for (int l = 0; l < arch.num_layers(); ++l)
    add_linear(p, "head" + std::to_string(l), arch.w_dim, arch.w_dim, arch.init_std, rng);
  return p;
}

ParamSet init_synthesis(const ArchConfig& arch, std::mt19937_64& rng) {
  ParamSet p;
  const int c0 = arch.synth_channels.front();
  p.add("const", normal_tensor({c0, arch.const_res, arch.const_res}, 1.0, rng));
  int in = c0;
  for (int i = 0; i < arch.num_layers(); ++i) {
    const int out = arch.synth_channels[i];
    add_conv(p, blk(i) + "conv", out, in, 3, arch.init_std, rng);
    add_linear(p, blk(i) + "style_scale", out, arch.w_dim, arch.init_std, rng);
    add_linear(p, blk(i) + "style_shift", out, arch.w_dim, arch.init_std, rng);
    in = out;
  }
  add_conv(p, "to_rgb", arch.img_channels, in, 1, arch.init_std, rng);
  return p;
}

ParamSet init_discriminator(const ArchConfig& arch, std::mt19937_64& rng) {
  ParamSet p;
  int in = arch.img_channels;
  for (std::size_t i = 0; i < arch.disc_channels.size(); ++i) {
    add_conv(p, blk(static_cast<int>(i)) + "conv", arch.disc_channels[i], in, 3, arch.init_std, rng);
    in = arch.disc_channels[i];
  }
  const int res = arch.img_res() >> static_cast<int>(arch.disc_channels.size());
  add_linear(p, "fc", 1, in * res * res, arch.init_std, rng);
  return p;
}

Var map_latent(const ParamSet& mapping, const ArchConfig& arch, const Var& z) {
  if (z.shape().size() != 2 || z.shape()[1] != arch.z_dim)
    throw ConfigError("map_latent: expected z of shape [N," + std::to_string(arch.z_dim) + "], got " +
                      shape_str(z.shape()));
  Var h = z;
  for (int i = 0; i < arch.mapping_depth; ++i)
    h = ops::leaky_relu(lin(mapping, "fc" + std::to_string(i), h), arch.lrelu_slope);
  std::vector<Var> layers;
  for (int l = 0; l < arch.num_layers(); ++l) layers.push_back(lin(mapping, "head" + std::to_string(l), h));
  return ops::stack_layers(layers);
}

Var synthesize(const ParamSet& synthesis, const ArchConfig& arch, const Var& w) {
  const Shape& ws = w.shape();
  if (ws.size() != 3 || ws[1] != arch.num_layers() || ws[2] != arch.w_dim)
    throw ConfigError("synthesize: expected w of shape [N," + std::to_string(arch.num_layers()) + "," +
                      std::to_string(arch.w_dim) + "], got " + shape_str(ws));
  const int n = ws[0];
  Var x = ops::repeat0(synthesis.at("const"), n);
  for (int i = 0; i < arch.num_layers(); ++i) {
    if (i > 0) x = ops::upsample2x(x);
    x = ops::leaky_relu(conv(synthesis, blk(i) + "conv", x, 1, 1), arch.lrelu_slope);
    const int res = x.shape()[2];
    x = ops::standardize_groups(x, res * res, kNormEps);
    const Var wi = ops::select_layer(w, i);
    const Var gain = ops::add_scalar(lin(synthesis, blk(i) + "style_scale", wi), 1.0);
    const Var bias = lin(synthesis, blk(i) + "style_shift", wi);
    x = ops::shift_groups(ops::scale_groups(x, gain), bias);
  }
  return ops::tanh(conv(synthesis, "to_rgb", x, 1, 0));
}

Var discriminate(const ParamSet& discriminator, const ArchConfig& arch, const Var& images) {
  const Shape& s = images.shape();
  if (s.size() != 4 || s[1] != arch.img_channels || s[2] != arch.img_res() || s[3] != arch.img_res())
    throw InvalidInput("discriminate: expected [N," + std::to_string(arch.img_channels) + "," +
                       std::to_string(arch.img_res()) + "," + std::to_string(arch.img_res()) + "], got " +
                       shape_str(s));
  Var x = images;
  for (std::size_t i = 0; i < arch.disc_channels.size(); ++i)
    x = ops::leaky_relu(conv(discriminator, blk(static_cast<int>(i)) + "conv", x, 2, 1), arch.lrelu_slope);
  x = ops::reshape(x, {s[0], static_cast<int>(x.numel()) / s[0]});
  return ops::reshape(lin(discriminator, "fc", x), {s[0]});
}

ModelBundle ModelBundle::create(const ArchConfig& arch, std::uint64_t seed) {
  arch.validate();
  std::mt19937_64 rng(seed);
  ModelBundle b;
  b.arch = arch;
  b.mapping = init_mapping(arch, rng);
  b.synthesis = init_synthesis(arch, rng);
  b.discriminator = init_discriminator(arch, rng);
  return b;
}

void ModelBundle::set_trainable(bool on) {
  mapping.set_trainable(on);
  synthesis.set_trainable(on);
  discriminator.set_trainable(on);
  decoupler.set_trainable(on);
}

std::uint64_t ModelBundle::checksum() const {
  std::uint64_t h = mapping.checksum();
  for (const ParamSet* p : {&synthesis, &discriminator, &decoupler}) h = h * 1099511628211ULL ^ p->checksum();
  return h;
}

ModelBundle clone_model(const ModelBundle& bundle) { return bundle; }

Tensor sample_latents(int n, int z_dim, std::mt19937_64& rng) {
  Tensor z({n, z_dim});
  std::normal_distribution<double> dist(0.0, 1.0);
  for (double& v : z.span()) v = dist(rng);
  return z;
}

}  // namespace i2p
