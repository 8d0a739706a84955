#include "i2p/ops.hpp"

#include "i2p/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

namespace i2p::ops {

namespace {

using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape())
    throw InvalidInput(std::string(op) + ": shape " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }
bool wants(Node& self, std::size_t i) { return self.parents[i]->requires_grad; }

int groups_of(const Var& x, int group, const char* op) {
  if (group <= 0 || x.numel() % static_cast<std::size_t>(group) != 0)
    throw InvalidInput(std::string(op) + ": group " + std::to_string(group) + " does not divide " +
                       shape_str(x.shape()));
  return static_cast<int>(x.numel() / static_cast<std::size_t>(group));
}

void im2col(const double* img, int channels, int height, int width, int k, int stride, int pad, int out_h,
            int out_w, double* cols) {
  const int plane = out_h * out_w;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols + static_cast<std::size_t>((c * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          double* dst = row + oy * out_w;
          if (iy < 0 || iy >= height) {
            std::fill(dst, dst + out_w, 0.0);
            continue;
          }
          const double* src = img + (static_cast<std::size_t>(c) * height + iy) * width;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[ox] = (ix >= 0 && ix < width) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, int channels, int height, int width, int k, int stride, int pad, int out_h,
            int out_w, double* img) {
  const int plane = out_h * out_w;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols + static_cast<std::size_t>((c * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= height) continue;
          double* dst = img + (static_cast<std::size_t>(c) * height + iy) * width;
          const double* src = row + oy * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < width) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

struct GroupStats {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<char> floored;
};

GroupStats compute_group_stats(const Tensor& x, int group, int groups, double eps) {
  GroupStats s{std::vector<double>(groups), std::vector<double>(groups), std::vector<char>(groups)};
  for (int g = 0; g < groups; ++g) {
    const double* p = x.data() + static_cast<std::size_t>(g) * group;
    double m = 0.0;
    for (int i = 0; i < group; ++i) m += p[i];
    m /= group;
    double var = 0.0;
    for (int i = 0; i < group; ++i) var += (p[i] - m) * (p[i] - m);
    var /= group;
    const double sd = std::sqrt(var);
    s.mean[g] = m;
    s.floored[g] = sd < eps;
    s.std[g] = s.floored[g] ? eps : sd;
  }
  return s;
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] + b.value()[i];
  return Var::make(std::move(out), {a, b}, [](Node& self) {
    if (wants(self, 0)) parent(self, 0).accumulate(self.grad);
    if (wants(self, 1)) parent(self, 1).accumulate(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] - b.value()[i];
  return Var::make(std::move(out), {a, b}, [](Node& self) {
    if (wants(self, 0)) parent(self, 0).accumulate(self.grad);
    if (wants(self, 1)) {
      Tensor& g = parent(self, 1).ensure_grad();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] * b.value()[i];
  return Var::make(std::move(out), {a, b}, [](Node& self) {
    const Tensor& av = parent(self, 0).value;
    const Tensor& bv = parent(self, 1).value;
    if (wants(self, 0)) {
      Tensor& g = parent(self, 0).ensure_grad();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (wants(self, 1)) {
      Tensor& g = parent(self, 1).ensure_grad();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Var scale(const Var& a, double k) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] * k;
  return Var::make(std::move(out), {a}, [k](Node& self) {
    Tensor& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * k;
  });
}

Var add_scalar(const Var& a, double k) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] + k;
  return Var::make(std::move(out), {a}, [](Node& self) { parent(self, 0).accumulate(self.grad); });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().span()) s += v;
  return Var::make(Tensor({1}, {s}), {a}, [](Node& self) {
    Tensor& g = parent(self, 0).ensure_grad();
    const double d = self.grad[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += d;
  });
}

Var mean(const Var& a) {
  if (a.numel() == 0) throw InvalidInput("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return Var::make(std::move(out), {a}, [](Node& self) { parent(self, 0).accumulate(self.grad); });
}

Var concat0(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidInput("concat0 of nothing");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  int rows = 0;
  for (const Var& p : parts) {
    if (Shape(p.shape().begin() + 1, p.shape().end()) != tail)
      throw InvalidInput("concat0: trailing shape mismatch " + shape_str(p.shape()));
    rows += p.shape()[0];
  }
  Shape shape{rows};
  shape.insert(shape.end(), tail.begin(), tail.end());
  Tensor out(shape);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.numel(), out.data() + offset);
    offset += p.numel();
  }
  return Var::make(std::move(out), parts, [](Node& self) {
    std::size_t off = 0;
    for (auto& p : self.parents) {
      const std::size_t n = p->value.numel();
      if (p->requires_grad) {
        Tensor& g = p->ensure_grad();
        for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[off + i];
      }
      off += n;
    }
  });
}

Var slice0(const Var& a, int begin, int end) {
  const int rows = a.shape().at(0);
  if (begin < 0 || end > rows || begin >= end)
    throw InvalidInput("slice0: [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                       shape_str(a.shape()));
  const std::size_t row = a.numel() / static_cast<std::size_t>(rows);
  Shape shape = a.shape();
  shape[0] = end - begin;
  Tensor out(shape);
  std::copy(a.value().data() + begin * row, a.value().data() + end * row, out.data());
  return Var::make(std::move(out), {a}, [begin, row](Node& self) {
    Tensor& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < self.grad.numel(); ++i) g[begin * row + i] += self.grad[i];
  });
}

Var repeat0(const Var& a, int n) {
  if (n < 1) throw InvalidInput("repeat0 count must be >= 1");
  Shape shape{n};
  shape.insert(shape.end(), a.shape().begin(), a.shape().end());
  Tensor out(shape);
  const std::size_t m = a.numel();
  for (int r = 0; r < n; ++r) std::copy(a.value().data(), a.value().data() + m, out.data() + r * m);
  return Var::make(std::move(out), {a}, [n, m](Node& self) {
    Tensor& g = parent(self, 0).ensure_grad();
    for (int r = 0; r < n; ++r)
      for (std::size_t i = 0; i < m; ++i) g[i] += self.grad[r * m + i];
  });
}

Var stack_layers(const std::vector<Var>& layers) {
  if (layers.empty()) throw InvalidInput("stack_layers of nothing");
  const Shape& s0 = layers[0].shape();
  if (s0.size() != 2) throw InvalidInput("stack_layers expects [N,d] layers, got " + shape_str(s0));
  for (const Var& l : layers)
    if (l.shape() != s0) throw InvalidInput("stack_layers: mismatched layer " + shape_str(l.shape()));
  const int n = s0[0], d = s0[1], count = static_cast<int>(layers.size());
  Tensor out({n, count, d});
  for (int l = 0; l < count; ++l)
    for (int r = 0; r < n; ++r)
      std::copy(layers[l].value().data() + r * d, layers[l].value().data() + (r + 1) * d,
                out.data() + (static_cast<std::size_t>(r) * count + l) * d);
  return Var::make(std::move(out), layers, [n, d, count](Node& self) {
    for (int l = 0; l < count; ++l) {
      if (!self.parents[l]->requires_grad) continue;
      Tensor& g = self.parents[l]->ensure_grad();
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < d; ++j) g[r * d + j] += self.grad[(static_cast<std::size_t>(r) * count + l) * d + j];
    }
  });
}

Var select_layer(const Var& w, int layer) {
  const Shape& s = w.shape();
  if (s.size() != 3 || layer < 0 || layer >= s[1])
    throw InvalidInput("select_layer " + std::to_string(layer) + " of " + shape_str(s));
  const int n = s[0], count = s[1], d = s[2];
  Tensor out({n, d});
  for (int r = 0; r < n; ++r)
    std::copy(w.value().data() + (static_cast<std::size_t>(r) * count + layer) * d,
              w.value().data() + (static_cast<std::size_t>(r) * count + layer + 1) * d, out.data() + r * d);
  return Var::make(std::move(out), {w}, [n, d, count, layer](Node& self) {
    Tensor& g = parent(self, 0).ensure_grad();
    for (int r = 0; r < n; ++r)
      for (int j = 0; j < d; ++j) g[(static_cast<std::size_t>(r) * count + layer) * d + j] += self.grad[r * d + j];
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  if (xs.size() != 2 || ws.size() != 2 || xs[1] != ws[1] || bias.numel() != static_cast<std::size_t>(ws[0]))
    throw InvalidInput("linear: x " + shape_str(xs) + ", weight " + shape_str(ws) + ", bias " +
                       shape_str(bias.shape()));
  const int n = xs[0], in = xs[1], out_dim = ws[0];
  Tensor out({n, out_dim});
  MapR y(out.data(), n, out_dim);
  const CMapR xm(x.value().data(), n, in);
  const CMapR wm(weight.value().data(), out_dim, in);
  // Row by row so an item's output does not depend on the batch it came in.
  for (int r = 0; r < n; ++r) {
    y.row(r).noalias() = (wm * xm.row(r).transpose()).transpose();
    for (int j = 0; j < out_dim; ++j) y(r, j) += bias.value()[j];
  }
  return Var::make(std::move(out), {x, weight, bias}, [n, in, out_dim](Node& self) {
    CMapR dy(self.grad.data(), n, out_dim);
    if (wants(self, 0)) {
      MapR dx(parent(self, 0).ensure_grad().data(), n, in);
      dx.noalias() += dy * CMapR(parent(self, 1).value.data(), out_dim, in);
    }
    if (wants(self, 1)) {
      MapR dw(parent(self, 1).ensure_grad().data(), out_dim, in);
      dw.noalias() += dy.transpose() * CMapR(parent(self, 0).value.data(), n, in);
    }
    if (wants(self, 2)) {
      Tensor& db = parent(self, 2).ensure_grad();
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < out_dim; ++j) db[j] += dy(r, j);
    }
  });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  if (xs.size() != 4 || ws.size() != 4 || xs[1] != ws[1] || ws[2] != ws[3] ||
      bias.numel() != static_cast<std::size_t>(ws[0]) || stride < 1)
    throw InvalidInput("conv2d: x " + shape_str(xs) + ", weight " + shape_str(ws));
  const int n = xs[0], c = xs[1], h = xs[2], w = xs[3];
  const int o = ws[0], k = ws[2];
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (w + 2 * pad - k) / stride + 1;
  if (oh < 1 || ow < 1) throw InvalidInput("conv2d: empty output for input " + shape_str(xs));
  const int ckk = c * k * k, plane = oh * ow;

  Tensor out({n, o, oh, ow});
  MatR cols(ckk, plane);
  CMapR wm(weight.value().data(), o, ckk);
  for (int b = 0; b < n; ++b) {
    im2col(x.value().data() + static_cast<std::size_t>(b) * c * h * w, c, h, w, k, stride, pad, oh, ow,
           cols.data());
    MapR y(out.data() + static_cast<std::size_t>(b) * o * plane, o, plane);
    y.noalias() = wm * cols;
    for (int oc = 0; oc < o; ++oc) y.row(oc).array() += bias.value()[oc];
  }
  return Var::make(std::move(out), {x, weight, bias}, [=](Node& self) {
    Node& xn = parent(self, 0);
    Node& wn = parent(self, 1);
    CMapR wmat(wn.value.data(), o, ckk);
    MatR cols_b(ckk, plane);
    for (int b = 0; b < n; ++b) {
      CMapR dy(self.grad.data() + static_cast<std::size_t>(b) * o * plane, o, plane);
      if (wants(self, 1)) {
        im2col(xn.value.data() + static_cast<std::size_t>(b) * c * h * w, c, h, w, k, stride, pad, oh, ow,
               cols_b.data());
        MapR dw(wn.ensure_grad().data(), o, ckk);
        dw.noalias() += dy * cols_b.transpose();
      }
      if (wants(self, 0)) {
        cols_b.noalias() = wmat.transpose() * dy;
        col2im(cols_b.data(), c, h, w, k, stride, pad, oh, ow,
               xn.ensure_grad().data() + static_cast<std::size_t>(b) * c * h * w);
      }
      if (wants(self, 2)) {
        Tensor& db = parent(self, 2).ensure_grad();
        for (int oc = 0; oc < o; ++oc) db[oc] += dy.row(oc).sum();
      }
    }
  });
}

Var upsample2x(const Var& x) {
  const Shape& xs = x.shape();
  if (xs.size() != 4) throw InvalidInput("upsample2x expects NCHW, got " + shape_str(xs));
  const int planes = xs[0] * xs[1], h = xs[2], w = xs[3];
  Tensor out({xs[0], xs[1], 2 * h, 2 * w});
  for (int p = 0; p < planes; ++p) {
    const double* src = x.value().data() + static_cast<std::size_t>(p) * h * w;
    double* dst = out.data() + static_cast<std::size_t>(p) * 4 * h * w;
    for (int i = 0; i < 2 * h; ++i)
      for (int j = 0; j < 2 * w; ++j) dst[i * 2 * w + j] = src[(i / 2) * w + j / 2];
  }
  return Var::make(std::move(out), {x}, [planes, h, w](Node& self) {
    Tensor& g = parent(self, 0).ensure_grad();
    for (int p = 0; p < planes; ++p) {
      const double* src = self.grad.data() + static_cast<std::size_t>(p) * 4 * h * w;
      double* dst = g.data() + static_cast<std::size_t>(p) * h * w;
      for (int i = 0; i < 2 * h; ++i)
        for (int j = 0; j < 2 * w; ++j) dst[(i / 2) * w + j / 2] += src[i * 2 * w + j];
    }
  });
}

Var leaky_relu(const Var& x, double slope) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) {
    const double v = x.value()[i];
    out[i] = v > 0.0 ? v : slope * v;
  }
  return Var::make(std::move(out), {x}, [slope](Node& self) {
    const Tensor& xv = parent(self, 0).value;
    Tensor& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += xv[i] > 0.0 ? self.grad[i] : slope * self.grad[i];
  });
}

Var tanh(const Var& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(x.value()[i]);
  Tensor saved = out;
  return Var::make(std::move(out), {x}, [y = std::move(saved)](Node& self) {
    Tensor& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * (1.0 - y[i] * y[i]);
  });
}

Var softplus(const Var& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) {
    const double v = x.value()[i];
    out[i] = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
  }
  return Var::make(std::move(out), {x}, [](Node& self) {
    const Tensor& xv = parent(self, 0).value;
    Tensor& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const double v = xv[i];
      const double sig = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      g[i] += self.grad[i] * sig;
    }
  });
}

Var standardize_groups(const Var& x, int group, double eps) {
  const int groups = groups_of(x, group, "standardize_groups");
  GroupStats st = compute_group_stats(x.value(), group, groups, eps);
  Tensor out(x.shape());
  for (int g = 0; g < groups; ++g)
    for (int i = 0; i < group; ++i) {
      const std::size_t idx = static_cast<std::size_t>(g) * group + i;
      out[idx] = (x.value()[idx] - st.mean[g]) / st.std[g];
    }
  Tensor y = out;
  return Var::make(std::move(out), {x}, [group, groups, st = std::move(st), y = std::move(y)](Node& self) {
    Tensor& dx = parent(self, 0).ensure_grad();
    for (int g = 0; g < groups; ++g) {
      const std::size_t base = static_cast<std::size_t>(g) * group;
      double mean_dy = 0.0, mean_dyy = 0.0;
      for (int i = 0; i < group; ++i) {
        mean_dy += self.grad[base + i];
        mean_dyy += self.grad[base + i] * y[base + i];
      }
      mean_dy /= group;
      mean_dyy /= group;
      if (st.floored[g]) mean_dyy = 0.0;  // std is a constant below the floor
      for (int i = 0; i < group; ++i)
        dx[base + i] += (self.grad[base + i] - mean_dy - y[base + i] * mean_dyy) / st.std[g];
    }
  });
}

Var group_mean(const Var& x, int group) {
  const int groups = groups_of(x, group, "group_mean");
  Tensor out({groups});
  for (int g = 0; g < groups; ++g) {
    double m = 0.0;
    for (int i = 0; i < group; ++i) m += x.value()[static_cast<std::size_t>(g) * group + i];
    out[g] = m / group;
  }
  return Var::make(std::move(out), {x}, [group, groups](Node& self) {
    Tensor& dx = parent(self, 0).ensure_grad();
    for (int g = 0; g < groups; ++g)
      for (int i = 0; i < group; ++i) dx[static_cast<std::size_t>(g) * group + i] += self.grad[g] / group;
  });
}

Var group_std(const Var& x, int group, double eps) {
  const int groups = groups_of(x, group, "group_std");
  GroupStats st = compute_group_stats(x.value(), group, groups, eps);
  Tensor out({groups});
  for (int g = 0; g < groups; ++g) out[g] = st.std[g];
  return Var::make(std::move(out), {x}, [group, groups, st = std::move(st)](Node& self) {
    const Tensor& xv = parent(self, 0).value;
    Tensor& dx = parent(self, 0).ensure_grad();
    for (int g = 0; g < groups; ++g) {
      if (st.floored[g]) continue;
      for (int i = 0; i < group; ++i) {
        const std::size_t idx = static_cast<std::size_t>(g) * group + i;
        dx[idx] += self.grad[g] * (xv[idx] - st.mean[g]) / (group * st.std[g]);
      }
    }
  });
}

Var scale_groups(const Var& x, const Var& s) {
  const int groups = static_cast<int>(s.numel());
  if (groups == 0 || x.numel() % s.numel() != 0)
    throw InvalidInput("scale_groups: " + shape_str(x.shape()) + " by " + shape_str(s.shape()));
  const int group = static_cast<int>(x.numel() / s.numel());
  Tensor out(x.shape());
  for (int g = 0; g < groups; ++g)
    for (int i = 0; i < group; ++i) {
      const std::size_t idx = static_cast<std::size_t>(g) * group + i;
      out[idx] = x.value()[idx] * s.value()[g];
    }
  return Var::make(std::move(out), {x, s}, [group, groups](Node& self) {
    const Tensor& xv = parent(self, 0).value;
    const Tensor& sv = parent(self, 1).value;
    const bool gx = wants(self, 0), gs = wants(self, 1);
    Tensor* dx = gx ? &parent(self, 0).ensure_grad() : nullptr;
    Tensor* ds = gs ? &parent(self, 1).ensure_grad() : nullptr;
    for (int g = 0; g < groups; ++g) {
      double acc = 0.0;
      for (int i = 0; i < group; ++i) {
        const std::size_t idx = static_cast<std::size_t>(g) * group + i;
        if (gx) (*dx)[idx] += self.grad[idx] * sv[g];
        acc += self.grad[idx] * xv[idx];
      }
      if (gs) (*ds)[g] += acc;
    }
  });
}

Var shift_groups(const Var& x, const Var& s) {
  const int groups = static_cast<int>(s.numel());
  if (groups == 0 || x.numel() % s.numel() != 0)
    throw InvalidInput("shift_groups: " + shape_str(x.shape()) + " by " + shape_str(s.shape()));
  const int group = static_cast<int>(x.numel() / s.numel());
  Tensor out(x.shape());
  for (int g = 0; g < groups; ++g)
    for (int i = 0; i < group; ++i) {
      const std::size_t idx = static_cast<std::size_t>(g) * group + i;
      out[idx] = x.value()[idx] + s.value()[g];
    }
  return Var::make(std::move(out), {x, s}, [group, groups](Node& self) {
    if (wants(self, 0)) parent(self, 0).accumulate(self.grad);
    if (wants(self, 1)) {
      Tensor& ds = parent(self, 1).ensure_grad();
      for (int g = 0; g < groups; ++g) {
        double acc = 0.0;
        for (int i = 0; i < group; ++i) acc += self.grad[static_cast<std::size_t>(g) * group + i];
        ds[g] += acc;
      }
    }
  });
}

Var l2_normalize_rows(const Var& x, double eps) {
  const Shape& xs = x.shape();
  if (xs.size() != 2) throw InvalidInput("l2_normalize_rows expects [N,d], got " + shape_str(xs));
  const int n = xs[0], d = xs[1];
  Tensor out(xs);
  std::vector<double> norms(n);
  for (int r = 0; r < n; ++r) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += x.value()[r * d + j] * x.value()[r * d + j];
    norms[r] = std::sqrt(s);
    const double denom = std::max(norms[r], eps);
    for (int j = 0; j < d; ++j) out[r * d + j] = x.value()[r * d + j] / denom;
  }
  Tensor y = out;
  return Var::make(std::move(out), {x}, [n, d, eps, norms = std::move(norms), y = std::move(y)](Node& self) {
    Tensor& dx = parent(self, 0).ensure_grad();
    for (int r = 0; r < n; ++r) {
      if (norms[r] < eps) {
        for (int j = 0; j < d; ++j) dx[r * d + j] += self.grad[r * d + j] / eps;
        continue;
      }
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += y[r * d + j] * self.grad[r * d + j];
      for (int j = 0; j < d; ++j) dx[r * d + j] += (self.grad[r * d + j] - y[r * d + j] * dot) / norms[r];
    }
  });
}

Var cosine_rows(const Var& a, const Var& b) {
  require_same_shape(a, b, "cosine_rows");
  if (a.shape().size() != 2) throw InvalidInput("cosine_rows expects [N,d], got " + shape_str(a.shape()));
  const int n = a.shape()[0], d = a.shape()[1];
  std::vector<double> na(n), nb(n), cs(n);
  Tensor out({n});
  for (int r = 0; r < n; ++r) {
    double aa = 0.0, bb = 0.0, ab = 0.0;
    for (int j = 0; j < d; ++j) {
      const double x = a.value()[r * d + j], y = b.value()[r * d + j];
      aa += x * x;
      bb += y * y;
      ab += x * y;
    }
    na[r] = std::sqrt(aa);
    nb[r] = std::sqrt(bb);
    if (na[r] == 0.0 || nb[r] == 0.0)
      throw InvalidInput("cosine similarity of a zero-norm vector (row " + std::to_string(r) + ")");
    cs[r] = ab / (na[r] * nb[r]);
    out[r] = cs[r];
  }
  return Var::make(std::move(out), {a, b}, [n, d, na, nb, cs](Node& self) {
    const Tensor& av = parent(self, 0).value;
    const Tensor& bv = parent(self, 1).value;
    const bool ga = wants(self, 0), gb = wants(self, 1);
    for (int r = 0; r < n; ++r) {
      const double g = self.grad[r];
      for (int j = 0; j < d; ++j) {
        const double x = av[r * d + j], y = bv[r * d + j];
        if (ga) parent(self, 0).ensure_grad()[r * d + j] += g * (y / (na[r] * nb[r]) - cs[r] * x / (na[r] * na[r]));
        if (gb) parent(self, 1).ensure_grad()[r * d + j] += g * (x / (na[r] * nb[r]) - cs[r] * y / (nb[r] * nb[r]));
      }
    }
  });
}

Var smooth_l1(const Var& a, const Var& b) {
  require_same_shape(a, b, "smooth_l1");
  const std::size_t n = a.numel();
  if (n == 0) throw InvalidInput("smooth_l1 of empty tensors");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a.value()[i] - b.value()[i];
    total += std::abs(x) < 1.0 ? 0.5 * x * x : std::abs(x) - 0.5;
  }
  return Var::make(Tensor({1}, {total / static_cast<double>(n)}), {a, b}, [n](Node& self) {
    const Tensor& av = parent(self, 0).value;
    const Tensor& bv = parent(self, 1).value;
    const double scale_g = self.grad[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = av[i] - bv[i];
      const double h = std::abs(x) < 1.0 ? x : (x > 0.0 ? 1.0 : -1.0);
      if (wants(self, 0)) parent(self, 0).ensure_grad()[i] += scale_g * h;
      if (wants(self, 1)) parent(self, 1).ensure_grad()[i] -= scale_g * h;
    }
  });
}

}  // namespace i2p::ops
