#pragma once

#include "i2p/autograd.hpp"

#include <vector>

// Differentiable primitives. Shapes follow NCHW for images; "groups" are
// contiguous runs of `group` elements (a latent row, one channel plane).
namespace i2p::ops {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double k);
Var add_scalar(const Var& a, double k);

Var sum(const Var& a);
Var mean(const Var& a);

Var reshape(const Var& a, Shape shape);
/// Concatenate along axis 0; trailing dims must match.
Var concat0(const std::vector<Var>& parts);
/// Rows [begin, end) along axis 0.
Var slice0(const Var& a, int begin, int end);
/// Tile a tensor n times along a new leading axis.
Var repeat0(const Var& a, int n);
/// [N,d] x L -> [N,L,d]
Var stack_layers(const std::vector<Var>& layers);
/// [N,L,d] -> [N,d]
Var select_layer(const Var& w, int layer);

/// x:[N,in], weight:[out,in], bias:[out] -> [N,out]
Var linear(const Var& x, const Var& weight, const Var& bias);
/// x:[N,C,H,W], weight:[O,C,k,k], bias:[O]
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad);
Var upsample2x(const Var& x);

Var leaky_relu(const Var& x, double slope = 0.2);
Var tanh(const Var& x);
/// log(1 + exp(x)), computed stably.
Var softplus(const Var& x);

/// Per group: (x - mean) / max(std_pop, eps).
Var standardize_groups(const Var& x, int group, double eps);
/// One mean per group.
Var group_mean(const Var& x, int group);
/// One population std per group, floored at eps.
Var group_std(const Var& x, int group, double eps);
/// y = x * s[g], s has one entry per group of x.
Var scale_groups(const Var& x, const Var& s);
/// y = x + s[g]
Var shift_groups(const Var& x, const Var& s);

/// Rows of [N,d] divided by max(||row||, eps).
Var l2_normalize_rows(const Var& x, double eps = 1e-12);
/// Row-wise cosine similarity of [N,d] inputs -> [N]. Zero rows are an error.
Var cosine_rows(const Var& a, const Var& b);
/// Mean Huber loss with knee 1.
Var smooth_l1(const Var& a, const Var& b);

}  // namespace i2p::ops
