#pragma once

#include "i2p/autograd.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>

namespace i2p {

/// Named parameter tensors of one sub-network.
///
/// Copying a ParamSet copies the tensors: the copy and the original never
/// share storage. The `trainable` flag decides whether graphs built from
/// these leaves accumulate gradients into them.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet& other);
  ParamSet& operator=(const ParamSet& other);
  ParamSet(ParamSet&&) noexcept = default;
  ParamSet& operator=(ParamSet&&) noexcept = default;

  void add(const std::string& name, Tensor init);
  const Var& at(const std::string& name) const;
  Var& at(const std::string& name);
  bool contains(const std::string& name) const { return params_.contains(name); }

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  std::size_t size() const { return params_.size(); }
  std::size_t numel() const;

  bool trainable() const { return trainable_; }
  void set_trainable(bool on);

  void zero_grad();
  /// L2 norm of all accumulated gradients.
  double grad_norm() const;
  /// FNV-1a over names and raw value bytes.
  std::uint64_t checksum() const;
  double max_abs_diff(const ParamSet& other) const;

 private:
  std::map<std::string, Var> params_;
  bool trainable_ = true;
};

/// N(0, std) tensor drawn from `rng`.
Tensor normal_tensor(Shape shape, double std, std::mt19937_64& rng);

}  // namespace i2p
