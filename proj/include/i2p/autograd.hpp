#pragma once

#include "i2p/tensor.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace i2p {

struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& ensure_grad();
  void accumulate(const Tensor& g);
};

/// Handle to a node in a dynamically built reverse-mode graph.
///
/// Copies share the node. Leaves created with `requires_grad = true`
/// accumulate gradients when `backward` runs on a downstream scalar.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t numel() const { return node_->value.numel(); }
  double item() const;

  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  /// Gradient accumulated so far; zeros if none has arrived.
  Tensor grad() const;
  void zero_grad() { node_->grad = Tensor(); }

  /// Leaf with the same value and no history.
  Var detach() const { return Var(node_->value, false); }

  bool defined() const { return static_cast<bool>(node_); }
  const std::shared_ptr<Node>& node() const { return node_; }

  /// Result of an op. Parents that do not require grad are dropped.
  static Var make(Tensor value, const std::vector<Var>& inputs, std::function<void(Node&)> backward_fn);

 private:
  std::shared_ptr<Node> node_;
};

/// Back-propagates from a scalar root, seeding d(root)/d(root) = 1.
void backward(const Var& root);

}  // namespace i2p
