#include "i2p/injection.hpp"

#include "i2p/errors.hpp"
#include "i2p/ops.hpp"

#include <cmath>
#include <string>

namespace i2p {

ChannelStats stats(std::span<const double> v) {
  if (v.size() < 2) throw InvalidInput("stats needs at least 2 entries, got " + std::to_string(v.size()));
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  var /= static_cast<double>(v.size());
  return {m, std::max(std::sqrt(var), kStatsEps)};
}

std::vector<double> adain(std::span<const double> content, std::span<const double> style) {
  if (content.size() != style.size())
    throw InvalidInput("adain: length " + std::to_string(content.size()) + " vs " + std::to_string(style.size()));
  const ChannelStats c = stats(content);
  const ChannelStats s = stats(style);
  std::vector<double> out(content.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (content[i] - c.mean) / c.std * s.std + s.mean;
  return out;
}

Var adain(const Var& content, const Var& style, int width) {
  if (content.shape() != style.shape())
    throw InvalidInput("adain: shape " + shape_str(content.shape()) + " vs " + shape_str(style.shape()));
  if (width < 2) throw InvalidInput("adain needs rows of at least 2 entries");
  const Var normalized = ops::standardize_groups(content, width, kStatsEps);
  return ops::shift_groups(ops::scale_groups(normalized, ops::group_std(style, width, kStatsEps)),
                           ops::group_mean(style, width));
}

void InjectionConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1], got " + std::to_string(alpha));
}

Var inject(const Var& w_target, const Var& w_source, const InjectionConfig& cfg) {
  cfg.validate();
  if (w_target.shape() != w_source.shape() || w_target.shape().empty())
    throw InvalidInput("inject: stack shape " + shape_str(w_target.shape()) + " vs " +
                       shape_str(w_source.shape()));
  const int width = w_target.shape().back();
  const Var aligned = adain(w_target, w_source, width);
  return ops::add(ops::scale(w_target, 1.0 - cfg.alpha), ops::scale(aligned, cfg.alpha));
}

}  // namespace i2p
