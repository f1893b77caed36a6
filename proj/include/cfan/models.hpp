#pragma once
// The four study architectures (CNN1D, FFT1D, FAN, CFAN) as declarative layer
// stacks, plus the Adam training loop with patience-based early stopping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cfan/dataset.hpp"
#include "cfan/dsp.hpp"
#include "cfan/fanlayers.hpp"
#include "cfan/tensor.hpp"

namespace cfan::models {

// ---- architecture identifiers ------------------------------------------------------

enum class Arch { cnn1d, fft1d, fan, cfan };

inline const char* arch_name(Arch a) {
  switch (a) {
    case Arch::cnn1d: return "cnn1d";
    case Arch::fft1d: return "fft1d";
    case Arch::fan: return "fan";
    case Arch::cfan: return "cfan";
  }
  throw Error("arch_name: invalid architecture");
}

inline Arch arch_from_name(const std::string& name) {
  if (name == "cnn1d") return Arch::cnn1d;
  if (name == "fft1d") return Arch::fft1d;
  if (name == "fan") return Arch::fan;
  if (name == "cfan") return Arch::cfan;
  throw Error("unknown architecture '" + name + "' (expected cnn1d, fft1d, fan or cfan)");
}

constexpr Arch kAllArchs[] = {Arch::cnn1d, Arch::fft1d, Arch::fan, Arch::cfan};

// ---- layer specifications ----------------------------------------------------------

enum class LayerKind {
  conv,                // Conv1D, same padding, optional fused activation
  fan_conv,            // CONV-FAN block (cos | sin | GELU branches)
  skip,                // x + act(conv(x)), channel preserving
  skip_fan,            // x + fan_conv(x), channel preserving
  skip_attention,      // x + attention(act(conv(x)))
  skip_attention_fan,  // x + attention(fan_conv(x))
  act,                 // standalone elementwise activation
  avg_pool,            // AvgPool1D
  gap,                 // global average pooling: [C x L] -> [C]
  fc,                  // dense + activation on a vector
  fan_fc,              // FC-FAN block (4:1:1 sigma:sin:cos split)
  head                 // dense + softmax, must be last
};

struct LayerSpec {
  LayerKind kind;
  int filters = 0;  // conv/fan_conv output channels
  int kernel = 0;   // conv kernel width
  int units = 0;    // fc/fan_fc/head width
  int pool = 0;     // avg_pool window
  int stride = 0;   // avg_pool stride
  int nn = 0;       // attention bottleneck width
  tensor::Act activation = tensor::Act::relu;

  static LayerSpec make_conv(int filters, int kernel, tensor::Act act) {
    LayerSpec s{LayerKind::conv};
    s.filters = filters;
    s.kernel = kernel;
    s.activation = act;
    return s;
  }
  static LayerSpec make_conv(int filters, int kernel) {  // linear (no activation)
    LayerSpec s{LayerKind::conv};
    s.filters = filters;
    s.kernel = kernel;
    s.activation = tensor::Act::none;
    return s;
  }
  static LayerSpec make_fan_conv(int filters, int kernel) {
    LayerSpec s{LayerKind::fan_conv};
    s.filters = filters;
    s.kernel = kernel;
    return s;
  }
  static LayerSpec make_skip(int kernel) {
    LayerSpec s{LayerKind::skip};
    s.kernel = kernel;
    return s;
  }
  static LayerSpec make_skip_fan(int kernel) {
    LayerSpec s{LayerKind::skip_fan};
    s.kernel = kernel;
    return s;
  }
  static LayerSpec make_skip_attention(int kernel, int nn) {
    LayerSpec s{LayerKind::skip_attention};
    s.kernel = kernel;
    s.nn = nn;
    return s;
  }
  static LayerSpec make_skip_attention_fan(int kernel, int nn) {
    LayerSpec s{LayerKind::skip_attention_fan};
    s.kernel = kernel;
    s.nn = nn;
    return s;
  }
  static LayerSpec make_act(tensor::Act act) {
    LayerSpec s{LayerKind::act};
    s.activation = act;
    return s;
  }
  static LayerSpec make_avg_pool(int pool, int stride) {
    LayerSpec s{LayerKind::avg_pool};
    s.pool = pool;
    s.stride = stride;
    return s;
  }
  static LayerSpec make_gap() { return LayerSpec{LayerKind::gap}; }
  static LayerSpec make_fc(int units, tensor::Act act) {
    LayerSpec s{LayerKind::fc};
    s.units = units;
    s.activation = act;
    return s;
  }
  static LayerSpec make_fan_fc(int units) {
    LayerSpec s{LayerKind::fan_fc};
    s.units = units;
    return s;
  }
  static LayerSpec make_head(int units) {
    LayerSpec s{LayerKind::head};
    s.units = units;
    return s;
  }
};

struct ModelSpec {
  Arch arch = Arch::cnn1d;
  dataset::Task task = dataset::Task::mitbih;
  int n_classes = 0;
  int segment_length = 0;  // raw time-domain samples per segment
  int input_channels = 0;  // what the first layer sees (2 for the FFT front end)
  int input_length = 0;
  std::vector<LayerSpec> layers;
};

// The length of the one-sided complex spectrum of an n-sample signal.
inline int spectrum_bins(int n) { return n / 2 + 1; }

// Canonical stack for each (architecture, task) pair.
inline ModelSpec default_model_spec(Arch arch, dataset::Task task) {
  ModelSpec spec;
  spec.arch = arch;
  spec.task = task;
  spec.segment_length = dataset::task_segment_length(task);
  switch (task) {
    case dataset::Task::mitbih: spec.n_classes = 5; break;
    case dataset::Task::ecgid: spec.n_classes = 90; break;
    case dataset::Task::apnea: spec.n_classes = 2; break;
    default: throw Error("default_model_spec: invalid task");
  }
  if (arch == Arch::fft1d) {
    spec.input_channels = 2;
    spec.input_length = spectrum_bins(spec.segment_length);
  } else {
    spec.input_channels = 1;
    spec.input_length = spec.segment_length;
  }

  const bool fan_fc = (arch == Arch::fan || arch == Arch::cfan);
  const bool fan_conv = (arch == Arch::cfan);
  auto conv = [&](int filters, int kernel, tensor::Act act) {
    return fan_conv ? LayerSpec::make_fan_conv(filters, kernel)
                    : LayerSpec::make_conv(filters, kernel, act);
  };
  auto fc = [&](int units) {
    return fan_fc ? LayerSpec::make_fan_fc(units)
                  : LayerSpec::make_fc(units, tensor::Act::relu);
  };

  if (task == dataset::Task::apnea) {
    for (int block = 0; block < 2; ++block) {
      spec.layers.push_back(conv(12, 64, tensor::Act::none));
      spec.layers.push_back(fan_conv ? LayerSpec::make_skip_attention_fan(64, 12)
                                     : LayerSpec::make_skip_attention(64, 12));
      spec.layers.push_back(LayerSpec::make_act(tensor::Act::relu));
      spec.layers.push_back(LayerSpec::make_avg_pool(4, 4));
    }
  } else {
    spec.layers.push_back(conv(96, 64, tensor::Act::relu));
    spec.layers.push_back(fan_conv ? LayerSpec::make_skip_fan(64) : LayerSpec::make_skip(64));
    spec.layers.push_back(conv(96, 64, tensor::Act::relu));
  }
  spec.layers.push_back(LayerSpec::make_gap());
  spec.layers.push_back(fc(120));
  spec.layers.push_back(fc(84));
  spec.layers.push_back(LayerSpec::make_head(spec.n_classes));
  return spec;
}

// ---- model construction ------------------------------------------------------------

struct BuiltLayer {
  LayerSpec spec;
  tensor::Var kernel;  // conv kernel or dense weight matrix
  tensor::Var bias;
  fanlayers::FanConvBlockParams fan_conv;
  fanlayers::FanFcBlockParams fan_fc;
  fanlayers::AttentionParams attention;
};

struct Model {
  ModelSpec spec;
  tensor::ParameterStore store;
  std::vector<BuiltLayer> layers;

  explicit Model(uint64_t seed) : store(seed) {}

  // Network-facing input tensor from a raw time-domain segment.
  tensor::Var prepare(std::span<const double> segment) const {
    require(int(segment.size()) == spec.segment_length,
            "model input: segment length " + std::to_string(segment.size()) +
                " does not match the configured " + std::to_string(spec.segment_length));
    std::vector<double> values;
    if (spec.arch == Arch::fft1d) {
      // Unitary scaling (1/sqrt(n)) keeps spectral magnitudes independent of the
      // segment length; the raw transform grows with n and saturates the head.
      auto s = dsp::fft_real_imag(segment);
      const double scale = 1.0 / std::sqrt(double(segment.size()));
      values.reserve(2 * s.bins());
      for (double r : s.real) values.push_back(r * scale);
      for (double m : s.imag) values.push_back(m * scale);
    } else {
      values.assign(segment.begin(), segment.end());
    }
    return tensor::make_input({spec.input_channels, spec.input_length}, std::move(values));
  }

  tensor::Var forward(tensor::Var x) const {
    require(x->shape == std::vector<int>{spec.input_channels, spec.input_length},
            "model forward: input shape mismatch");
    for (const auto& layer : layers) {
      switch (layer.spec.kind) {
        case LayerKind::conv:
          x = tensor::conv1d(x, layer.kernel, layer.bias, tensor::Padding::same);
          if (layer.spec.activation != tensor::Act::none)
            x = tensor::activation(layer.spec.activation, x);
          break;
        case LayerKind::fan_conv: x = fanlayers::fan_conv_block(x, layer.fan_conv); break;
        case LayerKind::skip:
          x = fanlayers::skip_block(x, layer.kernel, layer.bias, layer.spec.activation);
          break;
        case LayerKind::skip_fan: x = fanlayers::skip_block(x, layer.fan_conv); break;
        case LayerKind::skip_attention:
          x = fanlayers::skip_attention_block(x, layer.kernel, layer.bias, layer.attention,
                                              layer.spec.activation);
          break;
        case LayerKind::skip_attention_fan:
          x = fanlayers::skip_attention_block(x, layer.fan_conv, layer.attention);
          break;
        case LayerKind::act: x = tensor::activation(layer.spec.activation, x); break;
        case LayerKind::avg_pool:
          x = tensor::avg_pool1d(x, layer.spec.pool, layer.spec.stride);
          break;
        case LayerKind::gap: x = tensor::global_avg_pool1d(x); break;
        case LayerKind::fc:
          x = tensor::dense(x, layer.kernel, layer.bias);
          if (layer.spec.activation != tensor::Act::none)
            x = tensor::activation(layer.spec.activation, x);
          break;
        case LayerKind::fan_fc: x = fanlayers::fan_fc_block(x, layer.fan_fc); break;
        case LayerKind::head:
          x = tensor::softmax(tensor::dense(x, layer.kernel, layer.bias));
          break;
      }
    }
    return x;
  }

  tensor::Var forward(std::span<const double> segment) const { return forward(prepare(segment)); }
};

inline Model build_model(const ModelSpec& spec, uint64_t seed) {
  require(spec.n_classes >= 2, "build_model: need at least two classes");
  require(spec.input_channels >= 1 && spec.input_length >= 1 && spec.segment_length >= 1,
          "build_model: input layout not configured");
  require(!spec.layers.empty(), "build_model: empty layer list");

  Model model(seed);
  model.spec = spec;

  // Walk the stack tracking the activation shape: [channels x length] until
  // global pooling, a flat vector afterwards.
  int channels = spec.input_channels;
  int length = spec.input_length;
  bool is_vector = false;

  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& ls = spec.layers[i];
    const std::string at = "layer " + std::to_string(i);
    require(i + 1 == spec.layers.size() || ls.kind != LayerKind::head,
            "build_model: " + at + ": head must be the final layer");
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "L%02zu", i);
    const std::string p(prefix);

    BuiltLayer built;
    built.spec = ls;
    switch (ls.kind) {
      case LayerKind::conv:
        require(!is_vector, "build_model: " + at + ": conv needs a [channels x length] input");
        require(ls.filters >= 1 && ls.kernel >= 1, "build_model: " + at + ": bad conv shape");
        built.kernel = model.store.add_weight(p + "/conv/kernel",
                                              {ls.filters, channels, ls.kernel},
                                              int64_t(channels) * ls.kernel);
        built.bias = model.store.add_bias(p + "/conv/bias", {ls.filters});
        channels = ls.filters;
        break;
      case LayerKind::fan_conv:
        require(!is_vector, "build_model: " + at + ": conv needs a [channels x length] input");
        built.fan_conv =
            fanlayers::make_fan_conv(model.store, p + "/fan_conv", channels, ls.filters,
                                     ls.kernel);
        channels = ls.filters;
        break;
      case LayerKind::skip:
        require(!is_vector, "build_model: " + at + ": skip needs a [channels x length] input");
        built.kernel = model.store.add_weight(p + "/skip/kernel",
                                              {channels, channels, ls.kernel},
                                              int64_t(channels) * ls.kernel);
        built.bias = model.store.add_bias(p + "/skip/bias", {channels});
        break;
      case LayerKind::skip_fan:
        require(!is_vector, "build_model: " + at + ": skip needs a [channels x length] input");
        built.fan_conv = fanlayers::make_fan_conv(model.store, p + "/skip_fan", channels,
                                                  channels, ls.kernel);
        break;
      case LayerKind::skip_attention:
        require(!is_vector, "build_model: " + at + ": skip needs a [channels x length] input");
        built.kernel = model.store.add_weight(p + "/skip/kernel",
                                              {channels, channels, ls.kernel},
                                              int64_t(channels) * ls.kernel);
        built.bias = model.store.add_bias(p + "/skip/bias", {channels});
        built.attention =
            fanlayers::make_attention(model.store, p + "/attention", channels, ls.nn);
        break;
      case LayerKind::skip_attention_fan:
        require(!is_vector, "build_model: " + at + ": skip needs a [channels x length] input");
        built.fan_conv = fanlayers::make_fan_conv(model.store, p + "/skip_fan", channels,
                                                  channels, ls.kernel);
        built.attention =
            fanlayers::make_attention(model.store, p + "/attention", channels, ls.nn);
        break;
      case LayerKind::act: break;
      case LayerKind::avg_pool:
        require(!is_vector, "build_model: " + at + ": pooling needs a [channels x length] input");
        require(ls.pool >= 1 && ls.stride >= 1 && length >= ls.pool,
                "build_model: " + at + ": sequence shorter than the pooling window");
        length = (length - ls.pool) / ls.stride + 1;
        break;
      case LayerKind::gap:
        require(!is_vector, "build_model: " + at + ": repeated global pooling");
        is_vector = true;
        length = 0;
        break;
      case LayerKind::fc:
        require(is_vector, "build_model: " + at + ": dense layers come after global pooling");
        require(ls.units >= 1, "build_model: " + at + ": bad dense width");
        built.kernel = model.store.add_weight(p + "/fc/w", {ls.units, channels}, channels);
        built.bias = model.store.add_bias(p + "/fc/b", {ls.units});
        channels = ls.units;
        break;
      case LayerKind::fan_fc:
        require(is_vector, "build_model: " + at + ": dense layers come after global pooling");
        built.fan_fc =
            fanlayers::make_fan_fc(model.store, p + "/fan_fc", channels, ls.units);
        channels = ls.units;
        break;
      case LayerKind::head:
        require(is_vector, "build_model: " + at + ": the head comes after global pooling");
        require(ls.units == spec.n_classes,
                "build_model: " + at + ": head width must equal n_classes");
        built.kernel = model.store.add_weight(p + "/head/w", {ls.units, channels}, channels);
        built.bias = model.store.add_bias(p + "/head/b", {ls.units});
        channels = ls.units;
        break;
    }
    model.layers.push_back(std::move(built));
  }
  require(spec.layers.back().kind == LayerKind::head,
          "build_model: the final layer must be the softmax head");
  return model;
}

// ---- data views --------------------------------------------------------------------

// A borrowed, possibly reordered subset of a SegmentSet.
struct DataView {
  const dataset::SegmentSet* set = nullptr;
  std::vector<size_t> indices;

  size_t size() const { return indices.size(); }
  std::span<const double> segment(size_t i) const { return set->segment(indices[i]); }
  int label(size_t i) const { return set->labels[indices[i]]; }
};

inline DataView full_view(const dataset::SegmentSet& set) {
  DataView v;
  v.set = &set;
  v.indices.resize(set.size());
  for (size_t i = 0; i < set.size(); ++i) v.indices[i] = i;
  return v;
}

inline DataView subset_view(const dataset::SegmentSet& set, std::vector<size_t> indices) {
  for (size_t i : indices)
    require(i < set.size(), "subset_view: index out of range");
  DataView v;
  v.set = &set;
  v.indices = std::move(indices);
  return v;
}

// ---- training ----------------------------------------------------------------------

struct TrainConfig {
  int batch_size = 0;
  double learning_rate = 0.001;
  int max_epochs = 300;
  int patience = 30;  // epochs without a new minimum validation loss
  uint64_t seed = 0;
};

inline TrainConfig default_train_config(dataset::Task task) {
  TrainConfig c;
  switch (task) {
    case dataset::Task::mitbih: c.batch_size = 995; break;
    case dataset::Task::ecgid: c.batch_size = 921; break;
    case dataset::Task::apnea: c.batch_size = 797; break;
    default: throw Error("default_train_config: invalid task");
  }
  return c;
}

inline void validate(const TrainConfig& c) {
  require(c.batch_size >= 1, "train config: batch size must be positive");
  require(c.learning_rate > 0.0, "train config: learning rate must be positive");
  require(c.max_epochs >= 1, "train config: max epochs must be positive");
  require(c.patience >= 1, "train config: patience must be positive");
  require(c.patience <= c.max_epochs, "train config: patience cannot exceed max epochs");
}

struct TrainHistory {
  std::vector<double> train_loss;  // per epoch, batch-size-weighted mean
  std::vector<double> val_loss;
  std::vector<double> val_acc;
  int best_epoch = -1;  // 0-based index into the vectors above
  bool stopped_early = false;

  int epochs_run() const { return int(train_loss.size()); }
};

// Patience rule: stop once `patience` consecutive epochs fail to set a new
// strict minimum of the monitored loss.
struct EarlyStopper {
  int patience;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int since_best = 0;

  explicit EarlyStopper(int patience_epochs) : patience(patience_epochs) {}

  // Returns true when training should stop after observing this epoch.
  bool observe(int epoch, double loss) {
    if (loss < best_loss) {
      best_loss = loss;
      best_epoch = epoch;
      since_best = 0;
      return false;
    }
    return ++since_best >= patience;
  }
};

namespace detail {

// Mean cross-entropy and argmax accuracy (lowest index wins ties) over a view.
inline std::pair<double, double> evaluate(const Model& model, const DataView& data) {
  double loss_sum = 0.0;
  size_t correct = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    auto probs = model.forward(data.segment(i));
    loss_sum += tensor::cross_entropy(probs, data.label(i))->values[0];
    int argmax = 0;
    for (int c = 1; c < model.spec.n_classes; ++c)
      if (probs->values[size_t(c)] > probs->values[size_t(argmax)]) argmax = c;
    correct += (argmax == data.label(i)) ? 1u : 0u;
  }
  const double n = double(data.size());
  return {loss_sum / n, double(correct) / n};
}

}  // namespace detail

// Minimizes batch-mean cross-entropy with Adam. Validation loss is monitored
// every epoch; the model is restored to the best-validation weights. With an
// empty validation view monitoring is disabled and the final weights stand.
inline TrainHistory train(Model& model, const DataView& train_data, const DataView& val_data,
                          const TrainConfig& config) {
  validate(config);
  require(train_data.size() > 0, "train: empty training set");
  for (size_t i = 0; i < train_data.size(); ++i)
    require(train_data.label(i) >= 0 && train_data.label(i) < model.spec.n_classes,
            "train: label out of range");

  TrainHistory history;
  EarlyStopper stopper(config.patience);
  tensor::AdamState adam;
  adam.learning_rate = config.learning_rate;
  std::vector<std::vector<double>> best_weights;

  const size_t n = train_data.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng shuffle_rng(config.seed + uint64_t(epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (size_t start = 0; start < n; start += size_t(config.batch_size)) {
      const size_t stop = std::min(n, start + size_t(config.batch_size));
      const double inv = 1.0 / double(stop - start);
      model.store.zero_gradients();
      for (size_t i = start; i < stop; ++i) {
        auto probs = model.forward(train_data.segment(order[i]));
        auto loss = tensor::cross_entropy(probs, train_data.label(order[i]));
        epoch_loss += loss->values[0];
        tensor::backward(loss);
      }
      for (auto& prm : model.store.items)
        for (double& g : prm.var->grad) g *= inv;
      tensor::adam_step(adam, model.store);
    }
    history.train_loss.push_back(epoch_loss / double(n));

    if (val_data.size() == 0) {
      history.val_loss.push_back(std::numeric_limits<double>::quiet_NaN());
      history.val_acc.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    auto [vloss, vacc] = detail::evaluate(model, val_data);
    history.val_loss.push_back(vloss);
    history.val_acc.push_back(vacc);

    const bool stop = stopper.observe(epoch, vloss);
    if (stopper.best_epoch == epoch) best_weights = tensor::snapshot_values(model.store);
    if (stop) {
      history.stopped_early = true;
      break;
    }
  }

  if (val_data.size() == 0) {
    history.best_epoch = history.epochs_run() - 1;
  } else {
    history.best_epoch = stopper.best_epoch;
    tensor::restore_values(model.store, best_weights);
  }
  return history;
}

// ---- inference ---------------------------------------------------------------------

// Probability matrix [n_segments x n_classes], rows in view order.
inline std::vector<std::vector<double>> predict(const Model& model, const DataView& data) {
  std::vector<std::vector<double>> rows;
  rows.reserve(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    auto probs = model.forward(data.segment(i));
    rows.push_back(probs->values);
  }
  return rows;
}

// ---- history export ----------------------------------------------------------------

inline std::string history_to_csv(const TrainHistory& history) {
  std::string out = "epoch,train_loss,val_loss,val_acc\n";
  char buf[128];
  for (int e = 0; e < history.epochs_run(); ++e) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", e + 1,
                  history.train_loss[size_t(e)], history.val_loss[size_t(e)],
                  history.val_acc[size_t(e)]);
    out += buf;
  }
  return out;
}

}  // namespace cfan::models
