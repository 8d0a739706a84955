#include "i2p/consistency.hpp"

#include "i2p/errors.hpp"
#include "i2p/ops.hpp"

#include <cmath>
#include <string>

namespace i2p {

namespace {

void require_aligned(const Var& a, const Var& b, const char* what) {
  if (a.shape() != b.shape())
    throw InvalidInput(std::string(what) + ": batch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace

LossWeights LossWeights::from_ratio(double lambda, double w_r) { return {lambda, w_r, 1.0 - w_r}; }

void LossWeights::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (!(w_r >= 0.0 && w_r <= 1.0)) throw ConfigError("loss_ratio_r must lie in [0,1]");
  if (std::abs(w_r + w_cs - 1.0) > 1e-9) throw ConfigError("loss ratio weights must sum to 1");
}

bool LossReport::all_finite() const {
  for (double v : {l_adv_d, l_adv_g, l_c, l_s, l_r, l_total, grad_norm_f})
    if (!std::isfinite(v)) return false;
  return true;
}

Var content_loss(const Var& content_source, const Var& content_target) {
  require_aligned(content_source, content_target, "content_loss");
  return ops::smooth_l1(content_source, content_target);
}

Var style_loss(const Var& style_target, const Var& style_raw) {
  require_aligned(style_target, style_raw, "style_loss");
  return ops::smooth_l1(style_target, style_raw);
}

Var synthesis_loss(const Var& m1, const Var& m2, const Var& m3) {
  require_aligned(m1, m2, "synthesis_loss");
  require_aligned(m1, m3, "synthesis_loss");
  auto dissimilarity = [](const Var& a, const Var& b) {
    return ops::mean(ops::scale(ops::add_scalar(ops::cosine_rows(a, b), -1.0), -1.0));
  };
  return ops::add(ops::add(dissimilarity(m1, m2), dissimilarity(m1, m3)), dissimilarity(m2, m3));
}

Var discriminator_loss(const Var& real_logits, const Var& fake_logits) {
  return ops::add(ops::mean(ops::softplus(ops::scale(real_logits, -1.0))), ops::mean(ops::softplus(fake_logits)));
}

Var generator_loss(const Var& fake_logits) { return ops::mean(ops::softplus(ops::scale(fake_logits, -1.0))); }

AdversarialLosses adversarial_losses(const ParamSet& discriminator, const ArchConfig& arch, const Var& x_real,
                                     const Var& x_fake) {
  const Var real_logits = discriminate(discriminator, arch, x_real);
  const Var fake_logits = discriminate(discriminator, arch, x_fake);
  return {discriminator_loss(real_logits, fake_logits), generator_loss(fake_logits)};
}

Var total_loss(const Var& l_adv_g, const Var& l_c, const Var& l_s, const Var& l_r, const LossWeights& w) {
  w.validate();
  const Var identity = ops::add(ops::scale(ops::add(l_c, l_s), 2.0 * w.w_cs), ops::scale(l_r, 2.0 * w.w_r));
  return ops::add(l_adv_g, ops::scale(identity, w.lambda));
}

double total_loss(double l_adv_g, double l_c, double l_s, double l_r, const LossWeights& w) {
  w.validate();
  return l_adv_g + w.lambda * (2.0 * w.w_cs * (l_c + l_s) + 2.0 * w.w_r * l_r);
}

R1Penalty r1_penalty(const ParamSet& discriminator, const ArchConfig& arch, const Tensor& x_real, double gamma) {
  R1Penalty out;
  const int n = x_real.dim(0);
  const std::size_t per = x_real.numel() / static_cast<std::size_t>(n);

  // Input gradient with the critic parameters held constant.
  ParamSet frozen = discriminator;
  frozen.set_trainable(false);
  Var x(x_real, true);
  backward(ops::sum(discriminate(frozen, arch, x)));
  const Tensor g = x.grad();

  double sq = 0.0;
  for (double v : g.span()) sq += v * v;
  out.value = 0.5 * gamma * sq / n;

  Tensor plus = x_real, minus = x_real;
  std::vector<double> inv_step(n, 0.0);
  for (int b = 0; b < n; ++b) {
    double norm = 0.0;
    for (std::size_t i = 0; i < per; ++i) norm += g[b * per + i] * g[b * per + i];
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double h = 1e-4 / norm;
    for (std::size_t i = 0; i < per; ++i) {
      plus[b * per + i] += h * g[b * per + i];
      minus[b * per + i] -= h * g[b * per + i];
    }
    inv_step[b] = 1.0 / (2.0 * h);
  }
  const Var diff = ops::sub(discriminate(discriminator, arch, Var(plus)), discriminate(discriminator, arch, Var(minus)));
  Tensor weights({n});
  for (int b = 0; b < n; ++b) weights[b] = gamma / n * inv_step[b];
  out.surrogate = ops::sum(ops::mul(diff, Var(weights)));
  return out;
}

}  // namespace i2p
