#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "densehar/data.hpp"
#include "densehar/kernels.hpp"
#include "densehar/model_io.hpp"
#include "densehar/optim.hpp"
#include "densehar/rng.hpp"
#include "densehar/train.hpp"

namespace densehar {

// Architecture description. Defaults follow the experiment setup: f=32,
// sub-sequence length 224, six resolution levels (five poolings), which is
// the depth whose convolution-layer count 2L + 3(L-1) + 1 comes out at 28.
struct UNetConfig {
  std::size_t in_channels = 3;     // sensor axes N_s
  std::size_t num_classes = 6;     // N_c
  std::size_t base_features = 32;  // f
  std::size_t levels = 6;
  std::size_t subseq_length = 224;  // N
  std::uint64_t seed = 0;

  void validate() const {
    if (in_channels == 0 || num_classes < 2 || base_features == 0) {
      throw ConfigError("unet config: channels, classes and features must be positive");
    }
    if (levels < 2) throw ConfigError("unet config: need at least 2 levels");
    const std::size_t divisor = std::size_t{1} << (levels - 1);
    if (subseq_length == 0 || subseq_length % divisor != 0) {
      throw ConfigError("unet config: sub-sequence length " + std::to_string(subseq_length) +
                        " not divisible by 2^" + std::to_string(levels - 1));
    }
  }

  std::size_t feature_width(std::size_t level) const { return base_features << level; }
  std::size_t conv_layer_count() const { return 2 * levels + 3 * (levels - 1) + 1; }
};

struct ConvLayer {
  Parameter weights;  // [Cout, Cin, K]
  Parameter bias;     // [Cout]
  ConvSpec spec;
};

struct UpconvLayer {
  Parameter weights;  // [Cin, Cout, K], K == stride
  Parameter bias;
  std::size_t stride = 2;
};

namespace detail {

inline ConvLayer make_conv(std::size_t cin, std::size_t cout, std::size_t kernel,
                           std::size_t padding, Rng& rng) {
  ConvLayer layer;
  layer.spec = ConvSpec{kernel, 1, padding};
  Tensor w({cout, cin, kernel});
  const double stddev = std::sqrt(2.0 / static_cast<double>(cin * kernel));
  for (double& v : w.data) v = rng.normal(0.0, stddev);
  layer.weights = Parameter(std::move(w));
  layer.bias = Parameter(Tensor({cout}));
  return layer;
}

inline UpconvLayer make_upconv(std::size_t cin, std::size_t cout, std::size_t kernel, Rng& rng) {
  UpconvLayer layer;
  layer.stride = kernel;
  Tensor w({cin, cout, kernel});
  const double stddev = std::sqrt(2.0 / static_cast<double>(cin * kernel));
  for (double& v : w.data) v = rng.normal(0.0, stddev);
  layer.weights = Parameter(std::move(w));
  layer.bias = Parameter(Tensor({cout}));
  return layer;
}

}  // namespace detail

// Activation trace recorded by a training forward pass.
struct UNetCache {
  struct ConvTrace {
    Tensor input;
    Tensor preact;
  };
  std::vector<ConvTrace> down_a, down_b;
  std::vector<std::vector<std::int32_t>> pool_argmax;
  std::vector<std::size_t> pool_in_len;
  std::vector<Tensor> up_input;
  std::vector<ConvTrace> up_a, up_b;
  Tensor head_input;
};

struct UNetModel {
  UNetConfig config;
  ChannelStats stats;  // identity until fit

  struct ContractLevel {
    ConvLayer conv_a, conv_b;
  };
  struct ExpandLevel {
    UpconvLayer up;
    ConvLayer conv_a, conv_b;
  };
  std::vector<ContractLevel> contracting;  // top to bottom
  std::vector<ExpandLevel> expansive;      // execution order, bottom to top
  ConvLayer head;

  std::size_t conv_layer_count() const {
    return contracting.size() * 2 + expansive.size() * 3 + 1;
  }

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    for (auto& lvl : contracting) {
      out.push_back(&lvl.conv_a.weights);
      out.push_back(&lvl.conv_a.bias);
      out.push_back(&lvl.conv_b.weights);
      out.push_back(&lvl.conv_b.bias);
    }
    for (auto& lvl : expansive) {
      out.push_back(&lvl.up.weights);
      out.push_back(&lvl.up.bias);
      out.push_back(&lvl.conv_a.weights);
      out.push_back(&lvl.conv_a.bias);
      out.push_back(&lvl.conv_b.weights);
      out.push_back(&lvl.conv_b.bias);
    }
    out.push_back(&head.weights);
    out.push_back(&head.bias);
    return out;
  }

  std::vector<const Parameter*> parameters() const {
    auto ptrs = const_cast<UNetModel*>(this)->parameters();
    return {ptrs.begin(), ptrs.end()};
  }

  Tensor standardize_batch(const Tensor& batch) const {
    if (stats.mean.empty()) return batch;
    Tensor out = batch;
    const std::size_t b = batch.shape[0], c = batch.shape[1], n = batch.shape[2];
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double m = stats.mean[ch];
        const double inv = 1.0 / stats.stddev[ch];
        double* row = out.row(i, ch);
        for (std::size_t t = 0; t < n; ++t) row[t] = (row[t] - m) * inv;
      }
    }
    return out;
  }

  // Dense forward: [B,Ns,N] -> [B,Nc,N]. With a cache the pass records what
  // backward needs. zero_skips blanks the contracting half of each concat
  // (encoder-decoder ablation) and is inference-only.
  Tensor forward(const Tensor& batch, UNetCache* cache = nullptr,
                 bool zero_skips = false) const {
    require_rank(batch, 3, "unet input");
    if (batch.shape[1] != config.in_channels) {
      throw DimensionError("unet forward: input has " + std::to_string(batch.shape[1]) +
                           " channels, model expects " + std::to_string(config.in_channels));
    }
    if (batch.shape[2] != config.subseq_length) {
      throw GeometryError("unet forward: input length " + std::to_string(batch.shape[2]) +
                          ", model expects " + std::to_string(config.subseq_length));
    }
    if (zero_skips && cache) throw ConfigError("skip ablation is inference-only");
    const std::size_t levels = config.levels;
    if (cache) {
      cache->down_a.resize(levels);
      cache->down_b.resize(levels);
      cache->pool_argmax.resize(levels - 1);
      cache->pool_in_len.resize(levels - 1);
      cache->up_input.resize(levels - 1);
      cache->up_a.resize(levels - 1);
      cache->up_b.resize(levels - 1);
    }

    Tensor x = standardize_batch(batch);
    std::vector<Tensor> skips(levels - 1);
    for (std::size_t l = 0; l < levels; ++l) {
      const ContractLevel& lvl = contracting[l];
      Tensor za = conv1d_forward(x, lvl.conv_a.weights.value, lvl.conv_a.bias.value,
                                 lvl.conv_a.spec);
      if (cache) cache->down_a[l].input = std::move(x);
      Tensor a = relu(za);
      if (cache) cache->down_a[l].preact = std::move(za);
      Tensor zb = conv1d_forward(a, lvl.conv_b.weights.value, lvl.conv_b.bias.value,
                                 lvl.conv_b.spec);
      if (cache) cache->down_b[l].input = std::move(a);
      Tensor h = relu(zb);
      if (cache) cache->down_b[l].preact = std::move(zb);
      if (l + 1 < levels) {
        MaxPoolResult pooled = maxpool1d(h);
        if (cache) {
          cache->pool_argmax[l] = std::move(pooled.argmax);
          cache->pool_in_len[l] = h.shape[2];
        }
        skips[l] = std::move(h);
        x = std::move(pooled.output);
      } else {
        x = std::move(h);
      }
    }

    for (std::size_t e = 0; e + 1 < levels; ++e) {
      const ExpandLevel& lvl = expansive[e];
      Tensor u = upconv1d_forward(x, lvl.up.weights.value, lvl.up.bias.value, lvl.up.stride);
      if (cache) cache->up_input[e] = std::move(x);
      const Tensor& skip = skips[levels - 2 - e];
      Tensor merged =
          zero_skips ? concat_channels(u, Tensor(skip.shape)) : concat_channels(u, skip);
      Tensor za = conv1d_forward(merged, lvl.conv_a.weights.value, lvl.conv_a.bias.value,
                                 lvl.conv_a.spec);
      if (cache) cache->up_a[e].input = std::move(merged);
      Tensor a = relu(za);
      if (cache) cache->up_a[e].preact = std::move(za);
      Tensor zb = conv1d_forward(a, lvl.conv_b.weights.value, lvl.conv_b.bias.value,
                                 lvl.conv_b.spec);
      if (cache) cache->up_b[e].input = std::move(a);
      x = relu(zb);
      if (cache) cache->up_b[e].preact = std::move(zb);
    }

    Tensor logits = conv1d_forward(x, head.weights.value, head.bias.value, head.spec);
    if (cache) cache->head_input = std::move(x);
    return logits;
  }

  // Accumulates parameter gradients from a recorded forward pass.
  void backward(const UNetCache& cache, const Tensor& grad_logits) {
    const std::size_t levels = config.levels;
    Conv1dGrads hg = conv1d_backward(grad_logits, cache.head_input, head.weights.value,
                                     head.spec);
    head.weights.accumulate(hg.weights);
    head.bias.accumulate(hg.bias);
    Tensor grad = std::move(hg.input);

    std::vector<Tensor> skip_grads(levels - 1);
    for (std::size_t i = 0; i + 1 < levels; ++i) {
      const std::size_t e = levels - 2 - i;  // reverse execution order
      ExpandLevel& lvl = expansive[e];
      Tensor gzb = relu_backward(grad, cache.up_b[e].preact);
      Conv1dGrads gb =
          conv1d_backward(gzb, cache.up_b[e].input, lvl.conv_b.weights.value, lvl.conv_b.spec);
      lvl.conv_b.weights.accumulate(gb.weights);
      lvl.conv_b.bias.accumulate(gb.bias);
      Tensor gza = relu_backward(gb.input, cache.up_a[e].preact);
      Conv1dGrads ga =
          conv1d_backward(gza, cache.up_a[e].input, lvl.conv_a.weights.value, lvl.conv_a.spec);
      lvl.conv_a.weights.accumulate(ga.weights);
      lvl.conv_a.bias.accumulate(ga.bias);
      auto [g_up, g_skip] = split_channels(ga.input, config.feature_width(levels - 2 - e));
      skip_grads[levels - 2 - e] = std::move(g_skip);
      Upconv1dGrads gu =
          upconv1d_backward(g_up, cache.up_input[e], lvl.up.weights.value, lvl.up.stride);
      lvl.up.weights.accumulate(gu.weights);
      lvl.up.bias.accumulate(gu.bias);
      grad = std::move(gu.input);
    }

    for (std::size_t i = 0; i < levels; ++i) {
      const std::size_t l = levels - 1 - i;
      ContractLevel& lvl = contracting[l];
      Tensor gzb = relu_backward(grad, cache.down_b[l].preact);
      Conv1dGrads gb =
          conv1d_backward(gzb, cache.down_b[l].input, lvl.conv_b.weights.value, lvl.conv_b.spec);
      lvl.conv_b.weights.accumulate(gb.weights);
      lvl.conv_b.bias.accumulate(gb.bias);
      Tensor gza = relu_backward(gb.input, cache.down_a[l].preact);
      Conv1dGrads ga =
          conv1d_backward(gza, cache.down_a[l].input, lvl.conv_a.weights.value, lvl.conv_a.spec);
      lvl.conv_a.weights.accumulate(ga.weights);
      lvl.conv_a.bias.accumulate(ga.bias);
      if (l > 0) {
        Tensor unpooled =
            maxpool1d_backward(ga.input, cache.pool_argmax[l - 1], cache.pool_in_len[l - 1]);
        Tensor& skip_grad = skip_grads[l - 1];
        for (std::size_t j = 0; j < unpooled.size(); ++j) {
          unpooled.data[j] += skip_grad.data[j];
        }
        grad = std::move(unpooled);
      }
    }
  }
};

// He-initialized model; parameter values are a pure function of the config.
inline UNetModel build_unet(const UNetConfig& config) {
  config.validate();
  UNetModel model;
  model.config = config;
  Rng rng(config.seed);
  std::size_t cin = config.in_channels;
  for (std::size_t l = 0; l < config.levels; ++l) {
    const std::size_t width = config.feature_width(l);
    UNetModel::ContractLevel lvl;
    lvl.conv_a = detail::make_conv(cin, width, 3, 1, rng);
    lvl.conv_b = detail::make_conv(width, width, 3, 1, rng);
    model.contracting.push_back(std::move(lvl));
    cin = width;
  }
  for (std::size_t e = 0; e + 1 < config.levels; ++e) {
    const std::size_t from = config.feature_width(config.levels - 1 - e);
    const std::size_t to = config.feature_width(config.levels - 2 - e);
    UNetModel::ExpandLevel lvl;
    lvl.up = detail::make_upconv(from, to, 2, rng);
    lvl.conv_a = detail::make_conv(2 * to, to, 3, 1, rng);
    lvl.conv_b = detail::make_conv(to, to, 3, 1, rng);
    model.expansive.push_back(std::move(lvl));
  }
  model.head = detail::make_conv(config.base_features, config.num_classes, 1, 0, rng);
  return model;
}

namespace detail {

inline void check_subsequences(const std::vector<SubSequence>& items, std::size_t channels,
                               std::size_t length, std::size_t num_classes) {
  if (items.empty()) throw InputError("training set is empty");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const SubSequence& s = items[i];
    if (s.values.size() != channels) {
      throw DimensionError("sub-sequence " + std::to_string(i) + " has " +
                           std::to_string(s.values.size()) + " channels, expected " +
                           std::to_string(channels));
    }
    for (const auto& ch : s.values) {
      if (ch.size() != length) {
        throw GeometryError("sub-sequence " + std::to_string(i) + " has length " +
                            std::to_string(ch.size()) + ", expected " + std::to_string(length));
      }
    }
    if (s.dense_labels.size() != length) {
      throw GeometryError("sub-sequence " + std::to_string(i) + " label vector length " +
                          std::to_string(s.dense_labels.size()));
    }
    for (std::int32_t l : s.dense_labels) {
      if (l < 0 || static_cast<std::size_t>(l) >= num_classes) {
        throw LabelError("sub-sequence " + std::to_string(i) + " carries label " +
                         std::to_string(l) + " outside [0," + std::to_string(num_classes) + ")");
      }
    }
  }
}

}  // namespace detail

// Mini-batch Adam over shuffled sub-sequences; one optimizer step per batch,
// epochs * ceil(n / batch_size) steps total.
inline TrainingLog fit(UNetModel& model, const std::vector<SubSequence>& train,
                       const TrainConfig& cfg) {
  cfg.validate();
  detail::check_subsequences(train, model.config.in_channels, model.config.subseq_length,
                             model.config.num_classes);
  model.stats = standardize_fit(train);

  TrainingLog log;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto params = model.parameters();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double t0 = detail::now_ms();
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t point_count = 0;
    for (std::size_t first = 0; first < train.size(); first += cfg.batch_size) {
      const std::size_t last = std::min(train.size(), first + cfg.batch_size);
      Tensor batch;
      std::vector<std::int32_t> targets;
      detail::fill_batch(train, order, first, last, batch, targets);
      UNetCache cache;
      const Tensor logits = model.forward(batch, &cache);
      SoftmaxCrossEntropyResult loss = softmax_cross_entropy(logits, targets);
      model.backward(cache, loss.grad_logits);
      for (Parameter* p : params) adam_step(*p, cfg.learning_rate);
      ++log.optimizer_steps;
      loss_sum += loss.loss * static_cast<double>(targets.size());
      point_count += targets.size();
    }
    log.epochs.push_back({epoch, loss_sum / static_cast<double>(point_count),
                          detail::now_ms() - t0});
  }
  return log;
}

// Dense prediction over an arbitrary-length stream: consecutive length-N
// tiles with zero overlap; the final partial tile is edge-replicated to N,
// predicted, then trimmed. Argmax ties go to the smallest class index.
inline std::vector<std::int32_t> predict_dense(const UNetModel& model,
                                               const std::vector<std::vector<double>>& channels) {
  if (channels.size() != model.config.in_channels) {
    throw DimensionError("predict: series has " + std::to_string(channels.size()) +
                         " channels, model expects " + std::to_string(model.config.in_channels));
  }
  const std::size_t total = channels.empty() ? 0 : channels[0].size();
  if (total == 0) throw InputError("predict: empty series");
  const std::size_t n = model.config.subseq_length;
  const std::size_t tiles = (total + n - 1) / n;
  std::vector<std::int32_t> labels;
  labels.reserve(total);

  constexpr std::size_t kChunk = 32;
  for (std::size_t tile0 = 0; tile0 < tiles; tile0 += kChunk) {
    const std::size_t count = std::min(kChunk, tiles - tile0);
    Tensor batch({count, channels.size(), n});
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t origin = (tile0 + i) * n;
      for (std::size_t c = 0; c < channels.size(); ++c) {
        double* row = batch.row(i, c);
        for (std::size_t t = 0; t < n; ++t) {
          row[t] = channels[c][std::min(origin + t, total - 1)];
        }
      }
    }
    const Tensor logits = model.forward(batch);
    const std::vector<std::int32_t> batch_labels = argmax_classes(logits);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t origin = (tile0 + i) * n;
      const std::size_t keep = std::min(n, total - origin);
      labels.insert(labels.end(), batch_labels.begin() + i * n,
                    batch_labels.begin() + i * n + keep);
    }
  }
  return labels;
}

inline std::vector<std::int32_t> predict_dense(const UNetModel& model,
                                               const LabeledSeries& series) {
  return predict_dense(model, series.channels);
}

// ---------------------------------------------------------------------------
// Persistence

inline void save_unet(const UNetModel& model, const std::string& path) {
  ModelContainer box;
  box.kind = ModelKind::UNet;
  box.config = {{"in_channels", model.config.in_channels},
                {"num_classes", model.config.num_classes},
                {"base_features", model.config.base_features},
                {"levels", model.config.levels},
                {"subseq_length", model.config.subseq_length},
                {"seed", model.config.seed},
                {"channel_mean", model.stats.mean},
                {"channel_std", model.stats.stddev}};
  for (const Parameter* p : model.parameters()) {
    box.tensors.push_back(p->value);
  }
  save_model_container(path, box);
}

inline UNetModel unet_from_container(const ModelContainer& box) {
  if (box.kind != ModelKind::UNet) {
    throw FormatError("model file holds a '" + std::string(model_kind_name(box.kind)) +
                      "' model, expected unet");
  }
  UNetConfig config;
  try {
    config.in_channels = box.config.at("in_channels").get<std::size_t>();
    config.num_classes = box.config.at("num_classes").get<std::size_t>();
    config.base_features = box.config.at("base_features").get<std::size_t>();
    config.levels = box.config.at("levels").get<std::size_t>();
    config.subseq_length = box.config.at("subseq_length").get<std::size_t>();
    config.seed = box.config.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("unet config block: ") + e.what());
  }
  UNetModel model = build_unet(config);
  model.stats.mean = box.config.value("channel_mean", std::vector<double>{});
  model.stats.stddev = box.config.value("channel_std", std::vector<double>{});
  const auto params = model.parameters();
  if (params.size() != box.tensors.size()) {
    throw FormatError("unet model file carries " + std::to_string(box.tensors.size()) +
                      " tensors, architecture needs " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->value.same_shape(box.tensors[i])) {
      throw FormatError("unet model tensor " + std::to_string(i) + " has shape " +
                        box.tensors[i].shape_string() + ", expected " +
                        params[i]->value.shape_string());
    }
    params[i]->value = box.tensors[i];
  }
  return model;
}

inline UNetModel load_unet(const std::string& path) {
  return unet_from_container(load_model_container(path));
}

}  // namespace densehar
