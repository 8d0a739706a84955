#include "i2p/optim.hpp"

#include <cmath>

namespace i2p {

void adam_step(ParamSet& params, AdamState& state, const AdamConfig& cfg) {
  if (!params.trainable()) return;
  ++state.steps;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.steps));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.steps));
  for (const auto& [name, cref] : params) {
    Var& p = params.at(name);
    const Tensor g = p.grad();
    auto [mit, _m] = state.m.try_emplace(name, Tensor(p.shape()));
    auto [vit, _v] = state.v.try_emplace(name, Tensor(p.shape()));
    Tensor& m = mit->second;
    Tensor& v = vit->second;
    Tensor& value = p.mutable_value();
    for (std::size_t i = 0; i < value.numel(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      value[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
    }
  }
}

}  // namespace i2p
