#pragma once

#include "i2p/autograd.hpp"

#include <span>
#include <vector>

namespace i2p {

/// Floor applied to every standard deviation used for re-standardisation.
inline constexpr double kStatsEps = 1e-8;

struct ChannelStats {
  double mean = 0.0;
  double std = kStatsEps;  // population std, never below kStatsEps
};

/// Arithmetic mean and floored population std. Needs >= 2 entries.
ChannelStats stats(std::span<const double> v);

/// Re-standardise `content` to the mean/std of `style`.
std::vector<double> adain(std::span<const double> content, std::span<const double> style);

/// Row-wise AdaIN over the last axis (width `width`) of two equally shaped tensors.
Var adain(const Var& content, const Var& style, int width);

struct InjectionConfig {
  double alpha = 0.5;

  void validate() const;
};

/// Blend each target latent w_T^i with its copy re-standardised to the
/// statistics of the paired source latent w_S^i:
///   (1 - alpha) * w_T^i + alpha * adain(w_T^i, w_S^i).
/// Both stacks are [N,L,d]; gradients flow into both.
Var inject(const Var& w_target, const Var& w_source, const InjectionConfig& cfg);

}  // namespace i2p
