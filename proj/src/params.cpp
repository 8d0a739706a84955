#include "i2p/params.hpp"

#include "i2p/errors.hpp"

#include <cmath>
#include <cstring>

namespace i2p {

ParamSet::ParamSet(const ParamSet& other) : trainable_(other.trainable_) {
  for (const auto& [name, v] : other.params_) params_.emplace(name, Var(v.value(), other.trainable_));
}

ParamSet& ParamSet::operator=(const ParamSet& other) {
  if (this != &other) {
    ParamSet copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void ParamSet::add(const std::string& name, Tensor init) {
  if (params_.contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  params_.emplace(name, Var(std::move(init), trainable_));
}

const Var& ParamSet::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("missing parameter '" + name + "'");
  return it->second;
}

Var& ParamSet::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("missing parameter '" + name + "'");
  return it->second;
}

std::size_t ParamSet::numel() const {
  std::size_t n = 0;
  for (const auto& [_, v] : params_) n += v.numel();
  return n;
}

void ParamSet::set_trainable(bool on) {
  trainable_ = on;
  for (auto& [_, v] : params_) v.set_requires_grad(on);
}

void ParamSet::zero_grad() {
  for (auto& [_, v] : params_) v.zero_grad();
}

double ParamSet::grad_norm() const {
  double s = 0.0;
  for (const auto& [_, v] : params_) {
    const Tensor g = v.grad();
    for (double x : g.span()) s += x * x;
  }
  return std::sqrt(s);
}

std::uint64_t ParamSet::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [name, v] : params_) {
    mix(name.data(), name.size());
    mix(v.value().data(), v.numel() * sizeof(double));
  }
  return h;
}

double ParamSet::max_abs_diff(const ParamSet& other) const {
  if (params_.size() != other.params_.size()) throw InvalidInput("parameter sets differ in size");
  double m = 0.0;
  for (const auto& [name, v] : params_) m = std::max(m, i2p::max_abs_diff(v.value(), other.at(name).value()));
  return m;
}

Tensor normal_tensor(Shape shape, double std, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, std);
  for (double& v : t.span()) v = dist(rng);
  return t;
}

}  // namespace i2p
