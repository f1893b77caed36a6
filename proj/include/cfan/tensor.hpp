#pragma once

// A small reverse-mode differentiation engine with exactly the layer
// vocabulary the networks here need: 1-D convolution (stride 1), average and
// global-average pooling, dense layers, elementwise activations, softmax and
// cross-entropy. Graphs are built per sample; backward() walks the graph in
// reverse topological order, accumulates gradients into parameter leaves and
// frees intermediate buffers as soon as they are consumed, so batch training
// can run as micro-batch gradient accumulation in bounded memory.
//
// Everything computes in double precision. Convolution and dense products go
// through Eigen for single-core speed; all results are deterministic.

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "cfan/util.hpp"

namespace cfan::tensor {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Node;
using Var = std::shared_ptr<Node>;

// Value plus autodiff bookkeeping. Leaves are inputs or parameters; interior
// nodes carry a closure that scatters their output gradient to their inputs.
struct Node {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;  // same size as values once backward touches it
  bool requires_grad = false;
  bool leaf = false;
  std::vector<Var> inputs;
  std::function<void(Node&)> backward_fn;

  size_t numel() const {
    size_t n = 1;
    for (int d : shape) n *= size_t(d);
    return n;
  }
};

inline Var make_input(std::vector<int> shape, std::vector<double> values) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->values = std::move(values);
  n->leaf = true;
  require(n->values.size() == n->numel(), "input: value count does not match shape");
  return n;
}

inline Var make_parameter(std::vector<int> shape) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->values.assign(n->numel(), 0.0);
  n->grad.assign(n->numel(), 0.0);
  n->requires_grad = true;
  n->leaf = true;
  return n;
}

namespace detail {

inline Var op_node(std::vector<int> shape, std::vector<Var> inputs,
                   std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->values.assign(n->numel(), 0.0);
  for (const auto& in : inputs) n->requires_grad = n->requires_grad || in->requires_grad;
  n->inputs = std::move(inputs);
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return n;
}

inline bool wants_grad(const Node& n) { return n.requires_grad; }

}  // namespace detail

// ---- convolution and pooling --------------------------------------------------------

enum class Padding { same, causal };

namespace detail {

// im2col: column t holds the receptive field of output position t,
// rows indexed by (input channel, kernel tap), zeros outside the signal.
inline void fill_im2col(const Node& x, int K, int pad_left, RowMat& M) {
  const int C_in = x.shape[0], L = x.shape[1];
  M.setZero();
  for (int c = 0; c < C_in; ++c) {
    const double* xc = x.values.data() + size_t(c) * size_t(L);
    for (int j = 0; j < K; ++j) {
      double* row = M.data() + (size_t(c) * size_t(K) + size_t(j)) * size_t(L);
      const int off = j - pad_left;
      const int t0 = std::max(0, -off), t1 = std::min(L, L - off);
      for (int t = t0; t < t1; ++t) row[t] = xc[t + off];
    }
  }
}

}  // namespace detail

// Cross-correlation at stride 1 with zero padding; output length equals input
// length. `bias` may be null.
inline Var conv1d(const Var& x, const Var& kernels, const Var& bias, Padding padding) {
  require(x->shape.size() == 2, "conv1d: input must be [channels x length]");
  require(kernels->shape.size() == 3, "conv1d: kernels must be [out x in x k]");
  const int C_in = x->shape[0], L = x->shape[1];
  const int C_out = kernels->shape[0], K = kernels->shape[2];
  if (kernels->shape[1] != C_in)
    fail("conv1d: kernel expects %d input channels, got %d", kernels->shape[1], C_in);
  if (bias) require(bias->shape == std::vector<int>{C_out}, "conv1d: bias shape mismatch");
  const int pad_left = padding == Padding::same ? (K - 1) / 2 : K - 1;
  require(K >= 1 && K <= L + pad_left, "conv1d: kernel longer than padded input");

  std::vector<Var> ins{x, kernels};
  if (bias) ins.push_back(bias);

  auto backward = [C_in, C_out, K, L, pad_left](Node& n) {
    const Var& xv = n.inputs[0];
    const Var& kv = n.inputs[1];
    Eigen::Map<const RowMat> dY(n.grad.data(), C_out, L);

    if (detail::wants_grad(*kv) || detail::wants_grad(*xv)) {
      if (detail::wants_grad(*kv)) {
        RowMat M(size_t(C_in) * size_t(K), L);
        detail::fill_im2col(*xv, K, pad_left, M);
        Eigen::Map<RowMat> dK(kv->grad.data(), C_out, C_in * K);
        dK.noalias() += dY * M.transpose();
      }
      if (detail::wants_grad(*xv)) {
        Eigen::Map<const RowMat> Km(kv->values.data(), C_out, C_in * K);
        RowMat G = Km.transpose() * dY;  // [(c,j) x L]
        for (int c = 0; c < C_in; ++c) {
          double* gx = xv->grad.data() + size_t(c) * size_t(L);
          for (int j = 0; j < K; ++j) {
            const double* row = G.data() + (size_t(c) * size_t(K) + size_t(j)) * size_t(L);
            const int off = j - pad_left;
            const int t0 = std::max(0, -off), t1 = std::min(L, L - off);
            for (int t = t0; t < t1; ++t) gx[t + off] += row[t];
          }
        }
      }
    }
    if (n.inputs.size() == 3 && detail::wants_grad(*n.inputs[2])) {
      // fixed-order scalar sum: Eigen reductions over unaligned maps pick
      // alignment-dependent SIMD paths, which breaks bit determinism
      double* db = n.inputs[2]->grad.data();
      for (int o = 0; o < C_out; ++o) {
        double s = 0.0;
        for (int t = 0; t < L; ++t) s += n.grad[size_t(o) * size_t(L) + size_t(t)];
        db[o] += s;
      }
    }
  };

  auto out = detail::op_node({C_out, L}, std::move(ins), backward);
  RowMat M(size_t(C_in) * size_t(K), L);
  detail::fill_im2col(*x, K, pad_left, M);
  Eigen::Map<const RowMat> Km(kernels->values.data(), C_out, C_in * K);
  Eigen::Map<RowMat> Y(out->values.data(), C_out, L);
  Y.noalias() = Km * M;
  if (bias)
    for (int o = 0; o < C_out; ++o) Y.row(o).array() += bias->values[size_t(o)];
  return out;
}

// Nonoverlapping window means when pool == stride; the trailing remainder that
// cannot fill a window is dropped.
inline Var avg_pool1d(const Var& x, int pool = 4, int stride = 4) {
  require(x->shape.size() == 2, "avg_pool1d: input must be [channels x length]");
  require(pool >= 1 && stride >= 1, "avg_pool1d: pool and stride must be positive");
  const int C = x->shape[0], L = x->shape[1];
  require(L >= pool, "avg_pool1d: input shorter than the pooling window");
  const int Lo = (L - pool) / stride + 1;

  auto backward = [C, L, Lo, pool, stride](Node& n) {
    if (!detail::wants_grad(*n.inputs[0])) return;
    double* gx = n.inputs[0]->grad.data();
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < Lo; ++i) {
        const double g = n.grad[size_t(c) * size_t(Lo) + size_t(i)] / double(pool);
        for (int j = 0; j < pool; ++j)
          gx[size_t(c) * size_t(L) + size_t(i * stride + j)] += g;
      }
  };

  auto out = detail::op_node({C, Lo}, {x}, backward);
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < Lo; ++i) {
      double s = 0.0;
      for (int j = 0; j < pool; ++j)
        s += x->values[size_t(c) * size_t(L) + size_t(i * stride + j)];
      out->values[size_t(c) * size_t(Lo) + size_t(i)] = s / double(pool);
    }
  return out;
}

inline Var global_avg_pool1d(const Var& x) {
  require(x->shape.size() == 2, "global_avg_pool1d: input must be [channels x length]");
  const int C = x->shape[0], L = x->shape[1];
  require(L >= 1, "global_avg_pool1d: empty sequence");

  auto backward = [C, L](Node& n) {
    if (!detail::wants_grad(*n.inputs[0])) return;
    double* gx = n.inputs[0]->grad.data();
    for (int c = 0; c < C; ++c) {
      const double g = n.grad[size_t(c)] / double(L);
      for (int t = 0; t < L; ++t) gx[size_t(c) * size_t(L) + size_t(t)] += g;
    }
  };

  auto out = detail::op_node({C}, {x}, backward);
  for (int c = 0; c < C; ++c) {
    double s = 0.0;
    for (int t = 0; t < L; ++t) s += x->values[size_t(c) * size_t(L) + size_t(t)];
    out->values[size_t(c)] = s / double(L);
  }
  return out;
}

// ---- dense -----------------------------------------------------------------------

// Affine map Wx + b; `bias` may be null for a pure linear map.
inline Var dense(const Var& x, const Var& weights, const Var& bias) {
  require(x->shape.size() == 1, "dense: input must be a vector");
  require(weights->shape.size() == 2, "dense: weights must be [out x in]");
  const int D_in = x->shape[0], D_out = weights->shape[0];
  if (weights->shape[1] != D_in)
    fail("dense: weights expect %d inputs, got %d", weights->shape[1], D_in);
  if (bias) require(bias->shape == std::vector<int>{D_out}, "dense: bias shape mismatch");

  std::vector<Var> ins{x, weights};
  if (bias) ins.push_back(bias);

  // Scalar loops in a fixed order: dense sizes are small and Eigen's
  // vector kernels are alignment-sensitive, which breaks bit determinism.
  auto backward = [D_in, D_out](Node& n) {
    const Var& xv = n.inputs[0];
    const Var& wv = n.inputs[1];
    if (detail::wants_grad(*wv))
      for (int o = 0; o < D_out; ++o)
        for (int i = 0; i < D_in; ++i)
          wv->grad[size_t(o) * size_t(D_in) + size_t(i)] +=
              n.grad[size_t(o)] * xv->values[size_t(i)];
    if (detail::wants_grad(*xv))
      for (int i = 0; i < D_in; ++i) {
        double s = 0.0;
        for (int o = 0; o < D_out; ++o)
          s += wv->values[size_t(o) * size_t(D_in) + size_t(i)] * n.grad[size_t(o)];
        xv->grad[size_t(i)] += s;
      }
    if (n.inputs.size() == 3 && detail::wants_grad(*n.inputs[2]))
      for (int o = 0; o < D_out; ++o) n.inputs[2]->grad[size_t(o)] += n.grad[size_t(o)];
  };

  auto out = detail::op_node({D_out}, std::move(ins), backward);
  for (int o = 0; o < D_out; ++o) {
    double s = bias ? bias->values[size_t(o)] : 0.0;
    for (int i = 0; i < D_in; ++i)
      s += weights->values[size_t(o) * size_t(D_in) + size_t(i)] * x->values[size_t(i)];
    out->values[size_t(o)] = s;
  }
  return out;
}

// ---- activations ------------------------------------------------------------------

enum class Act { relu, gelu, sigmoid, swish, sine, cosine, softmax, none };

inline Act act_from_name(const std::string& s) {
  if (s == "none") return Act::none;
  if (s == "relu") return Act::relu;
  if (s == "gelu") return Act::gelu;
  if (s == "sigmoid") return Act::sigmoid;
  if (s == "swish") return Act::swish;
  if (s == "sin") return Act::sine;
  if (s == "cos") return Act::cosine;
  if (s == "softmax") return Act::softmax;
  fail("unknown activation '%s'", s.c_str());
}

namespace detail {

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// tanh form of GELU: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
inline double gelu_value(double x) {
  constexpr double kRoot = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(kRoot * (x + 0.044715 * x * x * x)));
}

inline double gelu_derivative(double x) {
  constexpr double kRoot = 0.7978845608028654;
  const double u = kRoot * (x + 0.044715 * x * x * x);
  const double t = std::tanh(u);
  const double du = kRoot * (1.0 + 3.0 * 0.044715 * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

inline Var elementwise(const Var& x, double (*f)(double), double (*dfdx)(double)) {
  auto backward = [dfdx](Node& n) {
    if (!detail::wants_grad(*n.inputs[0])) return;
    const auto& xv = n.inputs[0]->values;
    auto& gx = n.inputs[0]->grad;
    for (size_t i = 0; i < xv.size(); ++i) gx[i] += n.grad[i] * dfdx(xv[i]);
  };
  auto out = detail::op_node(x->shape, {x}, backward);
  for (size_t i = 0; i < x->values.size(); ++i) out->values[i] = f(x->values[i]);
  return out;
}

}  // namespace detail

inline Var relu(const Var& x) {
  return detail::elementwise(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

inline Var gelu(const Var& x) {
  return detail::elementwise(x, detail::gelu_value, detail::gelu_derivative);
}

inline Var sigmoid(const Var& x) {
  return detail::elementwise(x, detail::stable_sigmoid, [](double v) {
    const double s = detail::stable_sigmoid(v);
    return s * (1.0 - s);
  });
}

inline Var swish(const Var& x) {
  return detail::elementwise(
      x, [](double v) { return v * detail::stable_sigmoid(v); },
      [](double v) {
        const double s = detail::stable_sigmoid(v);
        return s + v * s * (1.0 - s);
      });
}

inline Var sine(const Var& x) {
  return detail::elementwise(
      x, [](double v) { return std::sin(v); }, [](double v) { return std::cos(v); });
}

inline Var cosine(const Var& x) {
  return detail::elementwise(
      x, [](double v) { return std::cos(v); }, [](double v) { return -std::sin(v); });
}

// Softmax over the class axis (vectors only).
inline Var softmax(const Var& x) {
  require(x->shape.size() == 1, "softmax: expected a class vector");
  const int N = x->shape[0];
  require(N >= 1, "softmax: empty vector");

  auto backward = [N](Node& n) {
    if (!detail::wants_grad(*n.inputs[0])) return;
    double dot = 0.0;
    for (int i = 0; i < N; ++i) dot += n.grad[size_t(i)] * n.values[size_t(i)];
    auto& gx = n.inputs[0]->grad;
    for (int i = 0; i < N; ++i)
      gx[size_t(i)] += n.values[size_t(i)] * (n.grad[size_t(i)] - dot);
  };

  auto out = detail::op_node(x->shape, {x}, backward);
  double mx = x->values[0];
  for (double v : x->values) mx = std::max(mx, v);
  double sum = 0.0;
  for (int i = 0; i < N; ++i) {
    out->values[size_t(i)] = std::exp(x->values[size_t(i)] - mx);
    sum += out->values[size_t(i)];
  }
  for (int i = 0; i < N; ++i) out->values[size_t(i)] /= sum;
  return out;
}

inline Var activation(Act kind, const Var& x) {
  switch (kind) {
    case Act::relu: return relu(x);
    case Act::gelu: return gelu(x);
    case Act::sigmoid: return sigmoid(x);
    case Act::swish: return swish(x);
    case Act::sine: return sine(x);
    case Act::cosine: return cosine(x);
    case Act::softmax: return softmax(x);
    case Act::none: return x;
  }
  fail("unknown activation kind %d", int(kind));
}

// ---- structural ops ---------------------------------------------------------------

inline Var add(const Var& a, const Var& b) {
  require(a->shape == b->shape, "add: shape mismatch");
  auto backward = [](Node& n) {
    for (int side = 0; side < 2; ++side) {
      Var& in = n.inputs[size_t(side)];
      if (!detail::wants_grad(*in)) continue;
      for (size_t i = 0; i < n.grad.size(); ++i) in->grad[i] += n.grad[i];
    }
  };
  auto out = detail::op_node(a->shape, {a, b}, backward);
  for (size_t i = 0; i < out->values.size(); ++i)
    out->values[i] = a->values[i] + b->values[i];
  return out;
}

// Concatenation along axis 0 (vector blocks or channel blocks).
inline Var concat(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat: no inputs");
  const auto& s0 = parts[0]->shape;
  int dim0 = 0;
  for (const auto& p : parts) {
    require(p->shape.size() == s0.size(), "concat: rank mismatch");
    for (size_t d = 1; d < s0.size(); ++d)
      require(p->shape[d] == s0[d], "concat: trailing dimension mismatch");
    dim0 += p->shape[0];
  }

  auto backward = [](Node& n) {
    size_t offset = 0;
    for (Var& in : n.inputs) {
      const size_t cnt = in->numel();
      if (detail::wants_grad(*in))
        for (size_t i = 0; i < cnt; ++i) in->grad[i] += n.grad[offset + i];
      offset += cnt;
    }
  };

  std::vector<int> shape = s0;
  shape[0] = dim0;
  auto out = detail::op_node(std::move(shape), parts, backward);
  size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p->values.begin(), p->values.end(), out->values.begin() + long(offset));
    offset += p->numel();
  }
  return out;
}

// out[c, t] = gate[c] * x[c, t]  (channel attention scaling)
inline Var scale_channels(const Var& x, const Var& gate) {
  require(x->shape.size() == 2, "scale_channels: input must be [channels x length]");
  require(gate->shape == std::vector<int>{x->shape[0]}, "scale_channels: gate per channel");
  const int C = x->shape[0], L = x->shape[1];

  auto backward = [C, L](Node& n) {
    const Var& xv = n.inputs[0];
    const Var& gv = n.inputs[1];
    for (int c = 0; c < C; ++c) {
      const double g = gv->values[size_t(c)];
      const size_t base = size_t(c) * size_t(L);
      if (detail::wants_grad(*xv))
        for (int t = 0; t < L; ++t) xv->grad[base + size_t(t)] += g * n.grad[base + size_t(t)];
      if (detail::wants_grad(*gv)) {
        double s = 0.0;
        for (int t = 0; t < L; ++t) s += xv->values[base + size_t(t)] * n.grad[base + size_t(t)];
        gv->grad[size_t(c)] += s;
      }
    }
  };

  auto out = detail::op_node(x->shape, {x, gate}, backward);
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < L; ++t)
      out->values[size_t(c) * size_t(L) + size_t(t)] =
          gate->values[size_t(c)] * x->values[size_t(c) * size_t(L) + size_t(t)];
  return out;
}

// ---- losses ----------------------------------------------------------------------

// -ln(p[label]) with the probability clamped at 1e-12. Inputs must already be
// a probability vector (softmax output).
inline Var cross_entropy(const Var& probabilities, int label) {
  require(probabilities->shape.size() == 1, "cross_entropy: expected a class vector");
  const int N = probabilities->shape[0];
  if (label < 0 || label >= N)
    fail("cross_entropy: label %d out of range for %d classes", label, N);
  double sum = 0.0;
  for (double v : probabilities->values) sum += v;
  require(std::abs(sum - 1.0) <= 1e-6, "cross_entropy: input does not sum to 1");

  constexpr double kClamp = 1e-12;
  auto backward = [label](Node& n) {
    if (!detail::wants_grad(*n.inputs[0])) return;
    const double p = n.inputs[0]->values[size_t(label)];
    if (p > kClamp) n.inputs[0]->grad[size_t(label)] += n.grad[0] * (-1.0 / p);
  };

  auto out = detail::op_node({1}, {probabilities}, backward);
  out->values[0] = -std::log(std::max(probabilities->values[size_t(label)], kClamp));
  return out;
}

// Mean squared error against a fixed target.
inline Var mse_loss(const Var& prediction, std::vector<double> target) {
  require(prediction->values.size() == target.size(), "mse_loss: size mismatch");
  require(!target.empty(), "mse_loss: empty target");
  const auto n_elem = double(target.size());

  auto t = std::make_shared<std::vector<double>>(std::move(target));
  auto backward = [t, n_elem](Node& n) {
    if (!detail::wants_grad(*n.inputs[0])) return;
    const auto& pv = n.inputs[0]->values;
    auto& gx = n.inputs[0]->grad;
    for (size_t i = 0; i < pv.size(); ++i)
      gx[i] += n.grad[0] * 2.0 * (pv[i] - (*t)[i]) / n_elem;
  };

  auto out = detail::op_node({1}, {prediction}, backward);
  double s = 0.0;
  for (size_t i = 0; i < t->size(); ++i) {
    const double d = prediction->values[i] - (*t)[i];
    s += d * d;
  }
  out->values[0] = s / n_elem;
  return out;
}

// ---- backward pass ----------------------------------------------------------------

// Reverse-mode accumulation from a scalar loss. Gradients add (+=) into
// parameter leaves; interior buffers are zero-initialized per call and freed
// as soon as their node has propagated, so the graph is single-use.
inline void backward(const Var& loss) {
  require(loss->values.size() == 1, "backward: loss must be scalar");

  std::vector<Node*> topo;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : topo) {
    if (!n->requires_grad) continue;
    if (n->leaf) {
      if (n->grad.empty()) n->grad.assign(n->numel(), 0.0);
    } else {
      n->grad.assign(n->numel(), 0.0);
    }
  }
  if (loss->requires_grad) loss->grad[0] += 1.0;

  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    Node* n = *it;
    if (n->requires_grad && n->backward_fn) n->backward_fn(*n);
    if (!n->leaf) {
      if (n != loss.get()) {
        n->values.clear();
        n->values.shrink_to_fit();
      }
      n->grad.clear();
      n->grad.shrink_to_fit();
      n->backward_fn = nullptr;
    }
  }
}

// ---- parameters, initialization, Adam ------------------------------------------------

struct Parameter {
  std::string name;
  Var var;
};

// Registry with seed-deterministic He-uniform initialization: weights drawn
// from +-sqrt(6 / fan_in) in registration order, biases zero.
struct ParameterStore {
  std::vector<Parameter> items;
  Rng rng;

  explicit ParameterStore(uint64_t seed) : rng(seed) {}

  Var add_weight(const std::string& name, std::vector<int> shape, int64_t fan_in) {
    require(fan_in > 0, "add_weight: fan_in must be positive");
    auto v = make_parameter(std::move(shape));
    const double bound = std::sqrt(6.0 / double(fan_in));
    for (double& w : v->values) w = (2.0 * rng.uniform() - 1.0) * bound;
    items.push_back({name, v});
    return v;
  }

  Var add_bias(const std::string& name, std::vector<int> shape) {
    auto v = make_parameter(std::move(shape));
    items.push_back({name, v});
    return v;
  }

  const Parameter& find(const std::string& name) const {
    for (const auto& p : items)
      if (p.name == name) return p;
    fail("no parameter named '%s'", name.c_str());
  }

  size_t value_count() const {
    size_t n = 0;
    for (const auto& p : items) n += p.var->numel();
    return n;
  }

  void zero_gradients() {
    for (auto& p : items) std::fill(p.var->grad.begin(), p.var->grad.end(), 0.0);
  }
};

// Bias-corrected Adam. Gradients are zeroed after the step.
struct AdamState {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  int64_t t = 0;
  std::vector<std::vector<double>> m, v;
};

inline void adam_step(AdamState& state, ParameterStore& params) {
  if (state.m.empty()) {
    state.m.resize(params.items.size());
    state.v.resize(params.items.size());
    for (size_t i = 0; i < params.items.size(); ++i) {
      state.m[i].assign(params.items[i].var->numel(), 0.0);
      state.v[i].assign(params.items[i].var->numel(), 0.0);
    }
  }
  require(state.m.size() == params.items.size(), "adam_step: parameter count changed");

  state.t += 1;
  const double c1 = 1.0 - std::pow(state.beta1, double(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, double(state.t));
  for (size_t i = 0; i < params.items.size(); ++i) {
    auto& node = *params.items[i].var;
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (size_t j = 0; j < node.values.size(); ++j) {
      const double g = node.grad[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      node.values[j] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
    std::fill(node.grad.begin(), node.grad.end(), 0.0);
  }
}

// ---- checkpoints ------------------------------------------------------------------
//
// Named-tensor archive, little-endian (see docs/formats.md):
//   magic "CFCKPT1\n" | u32 count | per tensor: u32 name length, name bytes,
//   u32 rank, u32 dims, f64 values.

inline constexpr char kCheckpointMagic[] = "CFCKPT1\n";

inline void save_checkpoint(const ParameterStore& params,
                            const std::filesystem::path& path) {
  std::string out;
  out.append(kCheckpointMagic, 8);
  put_u32(out, uint32_t(params.items.size()));
  for (const auto& p : params.items) {
    put_u32(out, uint32_t(p.name.size()));
    out += p.name;
    put_u32(out, uint32_t(p.var->shape.size()));
    for (int d : p.var->shape) put_u32(out, uint32_t(d));
    for (double v : p.var->values) put_f64(out, v);
  }
  write_file_atomic(path, out);
}

struct NamedTensor {
  std::vector<int> shape;
  std::vector<double> values;
};

inline std::map<std::string, NamedTensor> read_checkpoint(
    const std::filesystem::path& path) {
  const std::string data = read_file(path);
  ByteReader r(data);
  if (r.bytes(8) != std::string(kCheckpointMagic, 8))
    fail("%s is not a parameter checkpoint (bad magic)", path.string().c_str());
  std::map<std::string, NamedTensor> out;
  const uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = r.bytes(r.u32());
    NamedTensor t;
    const uint32_t rank = r.u32();
    size_t n = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      t.shape.push_back(int(r.u32()));
      n *= size_t(t.shape.back());
    }
    t.values.reserve(n);
    for (size_t j = 0; j < n; ++j) t.values.push_back(r.f64());
    require(out.emplace(name, std::move(t)).second, "checkpoint: duplicate tensor name");
  }
  require(r.remaining() == 0, "checkpoint: trailing bytes");
  return out;
}

inline void load_checkpoint(ParameterStore& params, const std::filesystem::path& path) {
  auto tensors = read_checkpoint(path);
  for (auto& p : params.items) {
    auto it = tensors.find(p.name);
    if (it == tensors.end()) fail("checkpoint is missing tensor '%s'", p.name.c_str());
    if (it->second.shape != p.var->shape)
      fail("checkpoint tensor '%s' has a different shape", p.name.c_str());
    p.var->values = std::move(it->second.values);
    tensors.erase(it);
  }
  if (!tensors.empty())
    fail("checkpoint holds %zu tensors the model does not declare", tensors.size());
}

// Copies of current parameter values, for best-epoch restoration.
inline std::vector<std::vector<double>> snapshot_values(const ParameterStore& params) {
  std::vector<std::vector<double>> snap;
  snap.reserve(params.items.size());
  for (const auto& p : params.items) snap.push_back(p.var->values);
  return snap;
}

inline void restore_values(ParameterStore& params,
                           const std::vector<std::vector<double>>& snap) {
  require(snap.size() == params.items.size(), "restore_values: parameter count mismatch");
  for (size_t i = 0; i < snap.size(); ++i) {
    require(snap[i].size() == params.items[i].var->values.size(),
            "restore_values: size mismatch");
    params.items[i].var->values = snap[i];
  }
}

}  // namespace cfan::tensor
