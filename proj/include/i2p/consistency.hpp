#pragma once

#include "i2p/core_nets.hpp"

namespace i2p {

struct LossWeights {
  double lambda = 1.0;
  double w_r = 0.5;   // share of the synthesis term
  double w_cs = 0.5;  // share of the content + style terms

  /// Weights with w_cs = 1 - w_r.
  static LossWeights from_ratio(double lambda, double w_r);
  void validate() const;
};

struct LossReport {
  double l_adv_d = 0.0;  // critic loss, R1 included when enabled
  double l_adv_g = 0.0;
  double l_c = 0.0;
  double l_s = 0.0;
  double l_r = 0.0;
  double l_total = 0.0;
  double grad_norm_f = 0.0;  // norm of the mapping-network gradient in the generator step

  bool all_finite() const;
};

/// Content consistency between source- and target-generated images (aligned rows).
Var content_loss(const Var& content_source, const Var& content_target);
/// Style consistency between target-generated and raw training images.
Var style_loss(const Var& style_target, const Var& style_raw);
/// Sum over the three unordered pairs of mean(1 - cos) between synthesis features.
Var synthesis_loss(const Var& m1, const Var& m2, const Var& m3);

/// mean softplus(-D(real)) + mean softplus(D(fake)).
Var discriminator_loss(const Var& real_logits, const Var& fake_logits);
/// mean softplus(-D(fake)), the non-saturating generator objective.
Var generator_loss(const Var& fake_logits);

struct AdversarialLosses {
  Var loss_d;
  Var loss_g;
};
AdversarialLosses adversarial_losses(const ParamSet& discriminator, const ArchConfig& arch, const Var& x_real,
                                     const Var& x_fake);

/// l_adv_g + lambda * (2 w_r l_r + 2 w_cs (l_c + l_s)).
Var total_loss(const Var& l_adv_g, const Var& l_c, const Var& l_s, const Var& l_r, const LossWeights& w);
double total_loss(double l_adv_g, double l_c, double l_s, double l_r, const LossWeights& w);

/// R1 penalty (gamma/2) * mean ||grad_x D(x_real)||^2.
///
/// `surrogate` is a scalar whose parameter gradient equals the penalty's
/// gradient: the Hessian-vector product is taken as a central difference of
/// D along its own input gradient, which is exact for a piecewise-linear
/// critic away from activation kinks. Its value is not the penalty.
struct R1Penalty {
  double value = 0.0;
  Var surrogate;
};
R1Penalty r1_penalty(const ParamSet& discriminator, const ArchConfig& arch, const Tensor& x_real, double gamma);

}  // namespace i2p
