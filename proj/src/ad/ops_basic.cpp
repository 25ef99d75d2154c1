// src/ad/ops_basic.cpp

// Copyright 2026 The consep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <string>

#include "consep/ad/ops.hpp"
#include "consep/error.hpp"
#include "consep/kernels.hpp"

namespace consep::ad {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ValidationError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                          to_string(b.shape()));
}

void require_rank(const char* op, const Tensor& x, int rank) {
  if (x.value().rank() != rank)
    throw ValidationError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                          to_string(x.shape()));
}

template <typename F>
Array map(const Array& x, F f) {
  Array out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Array out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  Node* pa = a.node().get();
  Node* pb = b.node().get();
  return make_result(std::move(out), {a, b}, [pa, pb](const Array& g) {
    accumulate(*pa, g);
    accumulate(*pb, g);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  Array out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  Node* pa = a.node().get();
  Node* pb = b.node().get();
  return make_result(std::move(out), {a, b}, [pa, pb](const Array& g) {
    accumulate(*pa, g);
    accumulate(*pb, map(g, [](double v) { return -v; }));
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Array out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  Node* pa = a.node().get();
  Node* pb = b.node().get();
  return make_result(std::move(out), {a, b}, [pa, pb](const Array& g) {
    if (pa->requires_grad) {
      Array& ga = grad_buffer(*pa);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * pb->value[i];
    }
    if (pb->requires_grad) {
      Array& gb = grad_buffer(*pb);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * pa->value[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  Node* pa = a.node().get();
  return make_result(map(a.value(), [s](double v) { return v * s; }), {a},
                     [pa, s](const Array& g) { accumulate(*pa, map(g, [s](double v) { return v * s; })); });
}

Tensor relu(const Tensor& x) { return leaky_relu(x, 0.0); }

Tensor leaky_relu(const Tensor& x, double slope) {
  Node* px = x.node().get();
  return make_result(map(x.value(), [slope](double v) { return v > 0 ? v : slope * v; }), {x},
                     [px, slope](const Array& g) {
                       Array& gx = grad_buffer(*px);
                       for (std::size_t i = 0; i < g.size(); ++i)
                         gx[i] += px->value[i] > 0 ? g[i] : slope * g[i];
                     });
}

Tensor sigmoid(const Tensor& x) {
  Array out = map(x.value(), [](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  Node* px = x.node().get();
  auto y = std::make_shared<Array>(out);
  return make_result(std::move(out), {x}, [px, y](const Array& g) {
    Array& gx = grad_buffer(*px);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (*y)[i] * (1.0 - (*y)[i]);
  });
}

Tensor log_eps(const Tensor& x, double eps) {
  Array out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = x.value()[i] + eps;
    if (!(v > 0)) throw NumericalError("log_eps: non-positive argument " + std::to_string(v));
    out[i] = std::log(v);
  }
  Node* px = x.node().get();
  return make_result(std::move(out), {x}, [px, eps](const Array& g) {
    Array& gx = grad_buffer(*px);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / (px->value[i] + eps);
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  Node* px = x.node().get();
  return make_result(Array({}, s), {x}, [px](const Array& g) {
    Array& gx = grad_buffer(*px);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
  });
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) throw ValidationError("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor reshape(const Tensor& x, Shape shape) {
  Array out = x.value().reshaped(std::move(shape));
  Node* px = x.node().get();
  return make_result(std::move(out), {x},
                     [px](const Array& g) { accumulate(*px, g.reshaped(px->value.shape())); });
}

Tensor concat(const std::vector<Tensor>& xs, int axis) {
  if (xs.empty()) throw ValidationError("concat: no inputs");
  const Shape& s0 = xs[0].shape();
  if (axis < 0 || axis >= static_cast<int>(s0.size()))
    throw ValidationError("concat: axis " + std::to_string(axis) + " out of range for " + to_string(s0));
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= static_cast<std::size_t>(s0[i]);
  for (std::size_t i = axis + 1; i < s0.size(); ++i) inner *= static_cast<std::size_t>(s0[i]);
  Shape out_shape = s0;
  out_shape[axis] = 0;
  std::vector<std::size_t> widths;
  for (const auto& x : xs) {
    Shape s = x.shape();
    if (s.size() != s0.size()) throw ValidationError("concat: rank mismatch " + to_string(s) + " vs " + to_string(s0));
    for (std::size_t i = 0; i < s.size(); ++i)
      if (static_cast<int>(i) != axis && s[i] != s0[i])
        throw ValidationError("concat: shape mismatch " + to_string(s) + " vs " + to_string(s0));
    out_shape[axis] += s[axis];
    widths.push_back(static_cast<std::size_t>(s[axis]) * inner);
  }
  Array out(out_shape);
  const std::size_t row = static_cast<std::size_t>(out_shape[axis]) * inner;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto& src = xs[k].value();
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(src.data().begin() + o * widths[k], widths[k], out.data().begin() + o * row + offset);
    offset += widths[k];
  }
  std::vector<Node*> parents;
  for (const auto& x : xs) parents.push_back(x.node().get());
  return make_result(std::move(out), xs, [parents, widths, outer, row](const Array& g) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < parents.size(); ++k) {
      if (parents[k]->requires_grad) {
        Array& gp = grad_buffer(*parents[k]);
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t j = 0; j < widths[k]; ++j) gp[o * widths[k] + j] += g[o * row + off + j];
      }
      off += widths[k];
    }
  });
}

Tensor slice_rows(const Tensor& x, int begin, int count) {
  const Shape& s = x.shape();
  if (s.empty() || begin < 0 || count < 0 || begin + count > s[0])
    throw ValidationError("slice_rows: rows [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                          ") out of range for " + to_string(s));
  const std::size_t stride = x.size() / static_cast<std::size_t>(s[0]);
  Shape out_shape = s;
  out_shape[0] = count;
  Array out(out_shape);
  std::copy_n(x.value().data().begin() + begin * stride, count * stride, out.data().begin());
  Node* px = x.node().get();
  return make_result(std::move(out), {x}, [px, begin, stride](const Array& g) {
    Array& gx = grad_buffer(*px);
    for (std::size_t i = 0; i < g.size(); ++i) gx[begin * stride + i] += g[i];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    throw ValidationError("matmul: inner dimensions differ " + to_string(a.shape()) + " x " + to_string(b.shape()));
  Array out({m, n});
  kernels::gemm(false, false, m, n, k, a.value().data(), b.value().data(), out.data());
  Node* pa = a.node().get();
  Node* pb = b.node().get();
  return make_result(std::move(out), {a, b}, [pa, pb, m, n, k](const Array& g) {
    if (pa->requires_grad) {
      Array ga({m, k});
      kernels::gemm(false, true, m, k, n, g.data(), pb->value.data(), ga.data());
      accumulate(*pa, ga);
    }
    if (pb->requires_grad) {
      Array gb({k, n});
      kernels::gemm(true, false, k, n, m, pa->value.data(), g.data(), gb.data());
      accumulate(*pb, gb);
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank("linear", x, 2);
  require_rank("linear", w, 2);
  const int n = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
  if (w.dim(1) != in)
    throw ValidationError("linear: input " + to_string(x.shape()) + " incompatible with weight " + to_string(w.shape()));
  if (b.defined() && (b.value().rank() != 1 || b.dim(0) != out_dim))
    throw ValidationError("linear: bias " + to_string(b.shape()) + " incompatible with weight " + to_string(w.shape()));
  Array out({n, out_dim});
  kernels::gemm(false, true, n, out_dim, in, x.value().data(), w.value().data(), out.data());
  if (b.defined())
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < out_dim; ++j) out[static_cast<std::size_t>(i) * out_dim + j] += b.value()[j];
  Node* px = x.node().get();
  Node* pw = w.node().get();
  Node* pb = b.defined() ? b.node().get() : nullptr;
  std::vector<Tensor> parents{x, w};
  if (b.defined()) parents.push_back(b);
  return make_result(std::move(out), parents, [px, pw, pb, n, in, out_dim](const Array& g) {
    if (px->requires_grad) {
      Array gx({n, in});
      kernels::gemm(false, false, n, in, out_dim, g.data(), pw->value.data(), gx.data());
      accumulate(*px, gx);
    }
    if (pw->requires_grad) {
      Array gw({out_dim, in});
      kernels::gemm(true, false, out_dim, in, n, g.data(), px->value.data(), gw.data());
      accumulate(*pw, gw);
    }
    if (pb && pb->requires_grad) {
      Array& gb = grad_buffer(*pb);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < out_dim; ++j) gb[j] += g[static_cast<std::size_t>(i) * out_dim + j];
    }
  });
}

Tensor max_pool2d(const Tensor& x, int kernel, int stride) {
  require_rank("max_pool2d", x, 4);
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (kernel <= 0 || stride <= 0 || kernel > h || kernel > w)
    throw ValidationError("max_pool2d: kernel " + std::to_string(kernel) + " invalid for " + to_string(x.shape()));
  const int oh = (h - kernel) / stride + 1, ow = (w - kernel) / stride + 1;
  Array out({n, c, oh, ow});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  const auto& in = x.value();
  for (int p = 0; p < n * c; ++p)
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j) {
        std::size_t best = static_cast<std::size_t>(p) * h * w + static_cast<std::size_t>(i * stride) * w + j * stride;
        for (int ki = 0; ki < kernel; ++ki)
          for (int kj = 0; kj < kernel; ++kj) {
            const std::size_t idx = static_cast<std::size_t>(p) * h * w +
                                    static_cast<std::size_t>(i * stride + ki) * w + (j * stride + kj);
            if (in[idx] > in[best]) best = idx;
          }
        const std::size_t o = (static_cast<std::size_t>(p) * oh + i) * ow + j;
        out[o] = in[best];
        (*argmax)[o] = best;
      }
  Node* px = x.node().get();
  return make_result(std::move(out), {x}, [px, argmax](const Array& g) {
    Array& gx = grad_buffer(*px);
    for (std::size_t o = 0; o < g.size(); ++o) gx[(*argmax)[o]] += g[o];
  });
}

Tensor global_max_pool(const Tensor& x) {
  if (x.value().rank() < 3) throw ValidationError("global_max_pool: expected [N,C,...], got " + to_string(x.shape()));
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t spatial = x.size() / (static_cast<std::size_t>(n) * c);
  Array out({n, c});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    std::size_t best = p * spatial;
    for (std::size_t s = 1; s < spatial; ++s)
      if (x.value()[p * spatial + s] > x.value()[best]) best = p * spatial + s;
    out[p] = x.value()[best];
    (*argmax)[p] = best;
  }
  Node* px = x.node().get();
  return make_result(std::move(out), {x}, [px, argmax](const Array& g) {
    Array& gx = grad_buffer(*px);
    for (std::size_t p = 0; p < g.size(); ++p) gx[(*argmax)[p]] += g[p];
  });
}

Tensor global_avg_pool(const Tensor& x) {
  if (x.value().rank() < 3) throw ValidationError("global_avg_pool: expected [N,C,...], got " + to_string(x.shape()));
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t spatial = x.size() / (static_cast<std::size_t>(n) * c);
  Array out({n, c});
  for (std::size_t p = 0; p < out.size(); ++p) {
    double s = 0.0;
    for (std::size_t k = 0; k < spatial; ++k) s += x.value()[p * spatial + k];
    out[p] = s / static_cast<double>(spatial);
  }
  Node* px = x.node().get();
  return make_result(std::move(out), {x}, [px, spatial](const Array& g) {
    Array& gx = grad_buffer(*px);
    const double inv = 1.0 / static_cast<double>(spatial);
    for (std::size_t p = 0; p < g.size(); ++p)
      for (std::size_t k = 0; k < spatial; ++k) gx[p * spatial + k] += g[p] * inv;
  });
}

Tensor l2_normalize(const Tensor& x) {
  require_rank("l2_normalize", x, 2);
  const int n = x.dim(0), d = x.dim(1);
  Array out(x.shape());
  auto norms = std::make_shared<std::vector<double>>(n);
  for (int i = 0; i < n; ++i) {
    double ss = 0.0;
    for (int j = 0; j < d; ++j) ss += x.value()[static_cast<std::size_t>(i) * d + j] * x.value()[static_cast<std::size_t>(i) * d + j];
    const double r = std::sqrt(ss + 1e-12);
    (*norms)[i] = r;
    for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(i) * d + j] = x.value()[static_cast<std::size_t>(i) * d + j] / r;
  }
  Node* px = x.node().get();
  auto y = std::make_shared<Array>(out);
  return make_result(std::move(out), {x}, [px, y, norms, n, d](const Array& g) {
    // dy/dx = (I - y y^T) / r
    Array& gx = grad_buffer(*px);
    for (int i = 0; i < n; ++i) {
      const std::size_t row = static_cast<std::size_t>(i) * d;
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += g[row + j] * (*y)[row + j];
      for (int j = 0; j < d; ++j) gx[row + j] += (g[row + j] - dot * (*y)[row + j]) / (*norms)[i];
    }
  });
}

Tensor channel_weighted_sum(const Tensor& feat, const Tensor& weights) {
  require_rank("channel_weighted_sum", feat, 4);
  require_rank("channel_weighted_sum", weights, 2);
  const int n = feat.dim(0), c = feat.dim(1), h = feat.dim(2), w = feat.dim(3);
  if (weights.dim(0) != n || weights.dim(1) != c)
    throw ValidationError("channel_weighted_sum: weights " + to_string(weights.shape()) +
                          " incompatible with features " + to_string(feat.shape()));
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Array out({n, 1, h, w});
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch) {
      const double wt = weights.value()[static_cast<std::size_t>(i) * c + ch];
      const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * plane;
      for (std::size_t k = 0; k < plane; ++k) out[i * plane + k] += wt * feat.value()[base + k];
    }
  Node* pf = feat.node().get();
  Node* pw = weights.node().get();
  return make_result(std::move(out), {feat, weights}, [pf, pw, n, c, plane](const Array& g) {
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch) {
        const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * plane;
        if (pf->requires_grad) {
          Array& gf = grad_buffer(*pf);
          const double wt = pw->value[static_cast<std::size_t>(i) * c + ch];
          for (std::size_t k = 0; k < plane; ++k) gf[base + k] += wt * g[i * plane + k];
        }
        if (pw->requires_grad) {
          double acc = 0.0;
          for (std::size_t k = 0; k < plane; ++k) acc += pf->value[base + k] * g[i * plane + k];
          grad_buffer(*pw)[static_cast<std::size_t>(i) * c + ch] += acc;
        }
      }
  });
}

Tensor row_distance(const Tensor& a, const Tensor& b) {
  require_rank("row_distance", a, 2);
  require_same_shape("row_distance", a, b);
  const int n = a.dim(0), d = a.dim(1);
  Array out({n});
  for (int i = 0; i < n; ++i) {
    double ss = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = a.value()[static_cast<std::size_t>(i) * d + j] - b.value()[static_cast<std::size_t>(i) * d + j];
      ss += diff * diff;
    }
    out[i] = std::sqrt(ss);
  }
  Node* pa = a.node().get();
  Node* pb = b.node().get();
  auto dist = std::make_shared<Array>(out);
  return make_result(std::move(out), {a, b}, [pa, pb, dist, n, d](const Array& g) {
    for (int i = 0; i < n; ++i) {
      // Denominator floored at 1e-6 so coincident rows get a finite (zero) gradient.
      const double r = std::max((*dist)[i], 1e-6);
      for (int j = 0; j < d; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * d + j;
        const double gk = g[i] * (pa->value[k] - pb->value[k]) / r;
        if (pa->requires_grad) grad_buffer(*pa)[k] += gk;
        if (pb->requires_grad) grad_buffer(*pb)[k] -= gk;
      }
    }
  });
}

Tensor bce_loss(const Tensor& pred, const Array& target, double eps) {
  if (pred.shape() != target.shape())
    throw ValidationError("bce_loss: shape mismatch " + to_string(pred.shape()) + " vs " + to_string(target.shape()));
  const std::size_t count = pred.size();
  if (count == 0) throw ValidationError("bce_loss: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double p = std::clamp(pred.value()[i], eps, 1.0 - eps);
    const double t = target[i];
    total += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
  }
  Node* pp = pred.node().get();
  auto tgt = std::make_shared<Array>(target);
  return make_result(Array({}, total / static_cast<double>(count)), {pred}, [pp, tgt, eps, count](const Array& g) {
    Array& gp = grad_buffer(*pp);
    const double s = g[0] / static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double raw = pp->value[i];
      if (raw < eps || raw > 1.0 - eps) continue;
      const double t = (*tgt)[i];
      gp[i] += s * (-t / raw + (1.0 - t) / (1.0 - raw));
    }
  });
}

}  // namespace consep::ad
