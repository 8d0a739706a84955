#pragma once

#include "i2p/params.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace i2p {

struct AdamConfig {
  double learning_rate = 2e-3;
  double beta1 = 0.0;
  double beta2 = 0.99;
  double eps = 1e-8;
};

/// First/second moment buffers for one ParamSet.
struct AdamState {
  std::int64_t steps = 0;
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
};

/// One bias-corrected Adam update from the gradients held in `params`.
/// Frozen sets are left untouched.
void adam_step(ParamSet& params, AdamState& state, const AdamConfig& cfg);

}  // namespace i2p
