#include "i2p/autograd.hpp"

#include "i2p/errors.hpp"

#include <unordered_set>

namespace i2p {

Tensor& Node::ensure_grad() {
  if (grad.shape() != value.shape() || grad.empty() != value.empty()) grad = Tensor(value.shape());
  return grad;
}

void Node::accumulate(const Tensor& g) {
  Tensor& dst = ensure_grad();
  if (g.numel() != dst.numel()) throw InvalidInput("gradient shape mismatch " + shape_str(g.shape()));
  for (std::size_t i = 0; i < dst.numel(); ++i) dst[i] += g[i];
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

double Var::item() const {
  if (numel() != 1) throw InvalidInput("item() on tensor of shape " + shape_str(shape()));
  return value()[0];
}

Tensor Var::grad() const {
  if (node_->grad.numel() == node_->value.numel() && !node_->grad.empty()) return node_->grad;
  return Tensor(node_->value.shape());
}

Var Var::make(Tensor value, const std::vector<Var>& inputs, std::function<void(Node&)> backward_fn) {
  Var out(std::move(value), false);
  bool any = false;
  for (const Var& in : inputs) any = any || in.requires_grad();
  if (!any) return out;
  out.node_->requires_grad = true;
  // Keep every input so backward_fn can index parents positionally.
  for (const Var& in : inputs) out.node_->parents.push_back(in.node_);
  out.node_->backward_fn = std::move(backward_fn);
  return out;
}

void backward(const Var& root) {
  if (root.numel() != 1) throw InvalidInput("backward() needs a scalar root, got " + shape_str(root.shape()));
  if (!root.requires_grad()) return;

  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.node().get(), 0}};
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.empty()) {
      n->backward_fn(*n);
      n->grad = Tensor();  // interior grads are consumed; leaves keep theirs
    }
  }
}

}  // namespace i2p
