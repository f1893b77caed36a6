#pragma once

// The FAN-vs-MLP sine extrapolation experiment, shared by the fanlayers suite
// and the acceptance runner. Fits y = sin(x) on [0, 4pi] and scores mean
// squared error on [4pi, 6pi]; a FAN stack (159 parameters) should beat a
// parameter-matched GELU MLP (166 parameters) on the out-of-range interval.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cfan/fanlayers.hpp"
#include "cfan/tensor.hpp"

namespace sine_experiment {

struct Result {
  double fan_median = 0.0;  // median extrapolation MSE across seeds
  double mlp_median = 0.0;
};

inline double fit_and_score(bool use_fan, uint64_t seed) {
  using cfan::tensor::Var;
  namespace tensor = cfan::tensor;
  namespace fanlayers = cfan::fanlayers;

  const int n_train = 120, n_test = 150;
  std::vector<double> train_x(n_train), train_y(n_train);
  for (int i = 0; i < n_train; ++i) {
    train_x[size_t(i)] = 4.0 * M_PI * double(i) / double(n_train - 1);
    train_y[size_t(i)] = std::sin(train_x[size_t(i)]);
  }
  std::vector<double> test_x(n_test), test_y(n_test);
  for (int i = 0; i < n_test; ++i) {
    test_x[size_t(i)] = 4.0 * M_PI + 2.0 * M_PI * double(i) / double(n_test - 1);
    test_y[size_t(i)] = std::sin(test_x[size_t(i)]);
  }

  tensor::ParameterStore store(seed);
  std::function<Var(Var)> forward;
  if (use_fan) {
    // two FAN blocks and a linear head: (2+8+8) + (24+96+8) + 13 = 159 values
    auto f1 = fanlayers::make_fan_fc(store, "f1", 1, 12);
    auto f2 = fanlayers::make_fan_fc(store, "f2", 12, 12);
    auto W = store.add_weight("head/w", {1, 12}, 12);
    auto b = store.add_bias("head/b", {1});
    forward = [=](Var x) {
      return tensor::dense(fanlayers::fan_fc_block(fanlayers::fan_fc_block(x, f1), f2), W,
                           b);
    };
  } else {
    // GELU MLP with 11 hidden units per layer: 22 + 132 + 12 = 166 values
    auto W1 = store.add_weight("l1/w", {11, 1}, 1);
    auto b1 = store.add_bias("l1/b", {11});
    auto W2 = store.add_weight("l2/w", {11, 11}, 11);
    auto b2 = store.add_bias("l2/b", {11});
    auto W3 = store.add_weight("l3/w", {1, 11}, 11);
    auto b3 = store.add_bias("l3/b", {1});
    forward = [=](Var x) {
      auto h1 = tensor::gelu(tensor::dense(x, W1, b1));
      auto h2 = tensor::gelu(tensor::dense(h1, W2, b2));
      return tensor::dense(h2, W3, b3);
    };
  }

  tensor::AdamState adam;
  adam.learning_rate = 0.01;
  for (int epoch = 0; epoch < 800; ++epoch) {
    store.zero_gradients();
    for (int i = 0; i < n_train; ++i) {
      auto x = tensor::make_input({1}, {train_x[size_t(i)]});
      tensor::backward(tensor::mse_loss(forward(x), {train_y[size_t(i)]}));
    }
    for (auto& prm : store.items)
      for (double& g : prm.var->grad) g /= double(n_train);
    tensor::adam_step(adam, store);
  }

  double mse = 0.0;
  for (int i = 0; i < n_test; ++i) {
    auto x = tensor::make_input({1}, {test_x[size_t(i)]});
    const double d = forward(x)->values[0] - test_y[size_t(i)];
    mse += d * d;
  }
  return mse / double(n_test);
}

// Median extrapolation MSE for both networks across seeds 1..5.
inline Result run() {
  std::vector<double> fan_mse, mlp_mse;
  for (uint64_t seed : {1, 2, 3, 4, 5}) {
    fan_mse.push_back(fit_and_score(true, seed));
    mlp_mse.push_back(fit_and_score(false, seed));
  }
  std::sort(fan_mse.begin(), fan_mse.end());
  std::sort(mlp_mse.begin(), mlp_mse.end());
  return {fan_mse[2], mlp_mse[2]};
}

}  // namespace sine_experiment
