#pragma once

// Composite network blocks:
//   fan_fc_block    — cos(W_p x) || sin(W_p x) || sigma(B_pbar + W_pbar x), the
//                     periodic branches sharing one biasless projection.
//   fan_conv_block  — the convolutional analogue with a 1:1:1 filter split
//                     between cosine, sine and sigma branches.
//   skip_block      — x + inner(x), the inner branch either a channel-preserving
//                     convolution with an activation or a CONV-FAN block.
//   attention_block — squeeze-excite channel gate: sigmoid-gated two-layer
//                     bottleneck over globally pooled channels.
//   skip_attention_block — x + attention(inner(x)).

#include <string>

#include "cfan/tensor.hpp"
#include "cfan/util.hpp"

namespace cfan::fanlayers {

using tensor::Var;

// ---- FC-FAN ----------------------------------------------------------------------

struct FanFcBlockParams {
  Var W_p;      // [d_p x d_x], shared by the cosine and sine branches, no bias
  Var W_pbar;   // [d_pbar x d_x]
  Var B_pbar;   // [d_pbar]
  tensor::Act sigma = tensor::Act::gelu;
  int d_p = 0;
  int d_pbar = 0;

  int output_width() const { return 2 * d_p + d_pbar; }
};

// Splits a block width into the 4:1:1 sigma:sin:cos neuron budget
// (120 -> 80/20/20, 84 -> 56/14/14).
struct FanFcSplit {
  int d_pbar = 0;
  int d_p = 0;
};

inline FanFcSplit fan_fc_split(int width) {
  if (width <= 0 || width % 6 != 0)
    fail("fan_fc_split: width %d does not divide into the 4:1:1 budget", width);
  return {width / 6 * 4, width / 6};
}

inline FanFcBlockParams make_fan_fc(tensor::ParameterStore& store,
                                    const std::string& prefix, int d_x, int width,
                                    tensor::Act sigma = tensor::Act::gelu) {
  const auto split = fan_fc_split(width);
  FanFcBlockParams p;
  p.d_p = split.d_p;
  p.d_pbar = split.d_pbar;
  p.sigma = sigma;
  p.W_p = store.add_weight(prefix + "/W_p", {p.d_p, d_x}, d_x);
  p.W_pbar = store.add_weight(prefix + "/W_pbar", {p.d_pbar, d_x}, d_x);
  p.B_pbar = store.add_bias(prefix + "/B_pbar", {p.d_pbar});
  return p;
}

inline Var fan_fc_block(const Var& x, const FanFcBlockParams& p) {
  require(x->shape.size() == 1, "fan_fc_block: input must be a vector");
  if (p.W_p->shape[1] != x->shape[0])
    fail("fan_fc_block: expected %d inputs, got %d", p.W_p->shape[1], x->shape[0]);
  auto periodic = tensor::dense(x, p.W_p, nullptr);  // one shared projection
  auto sigma_in = tensor::dense(x, p.W_pbar, p.B_pbar);
  return tensor::concat({tensor::cosine(periodic), tensor::sine(periodic),
                         tensor::activation(p.sigma, sigma_in)});
}

// ---- CONV-FAN --------------------------------------------------------------------

struct FanConvBlockParams {
  Var K_cos, K_sin, K_sigma;  // each [F/3 x C_in x K]; periodic branches biasless
  Var bias_sigma;             // [F/3]
  tensor::Act sigma = tensor::Act::gelu;
  int filters = 0;  // total F
  int kernel = 0;
};

inline FanConvBlockParams make_fan_conv(tensor::ParameterStore& store,
                                        const std::string& prefix, int c_in,
                                        int filters, int kernel,
                                        tensor::Act sigma = tensor::Act::gelu) {
  if (filters <= 0 || filters % 3 != 0)
    fail("make_fan_conv: %d filters do not split 1:1:1 across three branches", filters);
  const int per_branch = filters / 3;
  FanConvBlockParams p;
  p.filters = filters;
  p.kernel = kernel;
  p.sigma = sigma;
  const std::vector<int> shape{per_branch, c_in, kernel};
  const int64_t fan_in = int64_t(c_in) * int64_t(kernel);
  p.K_cos = store.add_weight(prefix + "/K_cos", shape, fan_in);
  p.K_sin = store.add_weight(prefix + "/K_sin", shape, fan_in);
  p.K_sigma = store.add_weight(prefix + "/K_sigma", shape, fan_in);
  p.bias_sigma = store.add_bias(prefix + "/bias_sigma", {per_branch});
  return p;
}

inline Var fan_conv_block(const Var& x, const FanConvBlockParams& p) {
  using tensor::Padding;
  auto cos_part = tensor::cosine(tensor::conv1d(x, p.K_cos, nullptr, Padding::same));
  auto sin_part = tensor::sine(tensor::conv1d(x, p.K_sin, nullptr, Padding::same));
  auto sigma_part = tensor::activation(
      p.sigma, tensor::conv1d(x, p.K_sigma, p.bias_sigma, Padding::same));
  return tensor::concat({cos_part, sin_part, sigma_part});
}

// ---- residual and attention blocks ------------------------------------------------

// x + act(conv(x)); the convolution must preserve the channel count.
inline Var skip_block(const Var& x, const Var& kernels, const Var& bias,
                      tensor::Act act = tensor::Act::relu) {
  if (kernels->shape[0] != x->shape[0])
    fail("skip_block: residual branch emits %d channels but the identity has %d",
         kernels->shape[0], x->shape[0]);
  auto inner =
      tensor::activation(act, tensor::conv1d(x, kernels, bias, tensor::Padding::same));
  return tensor::add(x, inner);
}

// x + fan_conv(x); the block's total filters must match the input channels.
inline Var skip_block(const Var& x, const FanConvBlockParams& p) {
  if (p.filters != x->shape[0])
    fail("skip_block: residual branch emits %d channels but the identity has %d",
         p.filters, x->shape[0]);
  return tensor::add(x, fan_conv_block(x, p));
}

struct AttentionParams {
  Var W1, b1;  // squeeze: [NN x C], [NN]
  Var W2, b2;  // gate:    [C x NN], [C]
};

inline AttentionParams make_attention(tensor::ParameterStore& store,
                                      const std::string& prefix, int channels, int nn) {
  AttentionParams p;
  p.W1 = store.add_weight(prefix + "/squeeze_w", {nn, channels}, channels);
  p.b1 = store.add_bias(prefix + "/squeeze_b", {nn});
  p.W2 = store.add_weight(prefix + "/gate_w", {channels, nn}, nn);
  p.b2 = store.add_bias(prefix + "/gate_b", {channels});
  return p;
}

// out[c,t] = g[c] x[c,t] with g = sigmoid(W2 relu(W1 gap(x) + b1) + b2).
inline Var attention_block(const Var& x, const AttentionParams& p) {
  if (p.W1->shape[1] != x->shape[0])
    fail("attention_block: params expect %d channels, got %d", p.W1->shape[1],
         x->shape[0]);
  auto squeezed = tensor::global_avg_pool1d(x);
  auto hidden = tensor::relu(tensor::dense(squeezed, p.W1, p.b1));
  auto gate = tensor::sigmoid(tensor::dense(hidden, p.W2, p.b2));
  return tensor::scale_channels(x, gate);
}

// x + attention(act(conv(x))): the gate applies to the residual branch
// before the identity addition.
inline Var skip_attention_block(const Var& x, const Var& kernels, const Var& bias,
                                const AttentionParams& attention,
                                tensor::Act act = tensor::Act::relu) {
  if (kernels->shape[0] != x->shape[0])
    fail("skip_attention_block: residual branch emits %d channels but the identity has %d",
         kernels->shape[0], x->shape[0]);
  auto inner =
      tensor::activation(act, tensor::conv1d(x, kernels, bias, tensor::Padding::same));
  return tensor::add(x, attention_block(inner, attention));
}

inline Var skip_attention_block(const Var& x, const FanConvBlockParams& p,
                                const AttentionParams& attention) {
  if (p.filters != x->shape[0])
    fail("skip_attention_block: residual branch emits %d channels but the identity has %d",
         p.filters, x->shape[0]);
  return tensor::add(x, attention_block(fan_conv_block(x, p), attention));
}

}  // namespace cfan::fanlayers
