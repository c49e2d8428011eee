#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "densehar/data.hpp"
#include "densehar/kernels.hpp"
#include "densehar/model_io.hpp"
#include "densehar/optim.hpp"
#include "densehar/train.hpp"
#include "densehar/unet.hpp"

namespace densehar {

// ---------------------------------------------------------------------------
// Sliding-window CNN: one softmax per window. Two conv+pool blocks, a
// flattening fully-connected stage (a conv spanning the whole remaining
// length) and a 1x1 head.

struct CnnConfig {
  std::size_t window = 64;
  std::size_t in_channels = 3;
  std::size_t num_classes = 6;
  std::size_t width1 = 32;
  std::size_t width2 = 64;
  std::size_t hidden = 128;
  std::uint64_t seed = 0;

  void validate() const {
    if (window == 0 || window % 4 != 0) {
      throw GeometryError("cnn config: window " + std::to_string(window) +
                          " must be divisible by 4 (two poolings)");
    }
    if (in_channels == 0 || num_classes < 2) {
      throw ConfigError("cnn config: channels and classes must be positive");
    }
  }
};

struct CnnCache {
  UNetCache::ConvTrace conv1, conv2, fc;
  Tensor head_input;
  std::vector<std::int32_t> arg1, arg2;
  std::size_t len1 = 0, len2 = 0;
};

struct WindowedCnnModel {
  CnnConfig config;
  ChannelStats stats;
  ConvLayer conv1, conv2, fc, head;

  std::vector<Parameter*> parameters() {
    return {&conv1.weights, &conv1.bias, &conv2.weights, &conv2.bias,
            &fc.weights,    &fc.bias,    &head.weights,  &head.bias};
  }
  std::vector<const Parameter*> parameters() const {
    auto ptrs = const_cast<WindowedCnnModel*>(this)->parameters();
    return {ptrs.begin(), ptrs.end()};
  }

  Tensor standardize_batch(const Tensor& batch) const {
    if (stats.mean.empty()) return batch;
    Tensor out = batch;
    for (std::size_t i = 0; i < batch.shape[0]; ++i) {
      for (std::size_t c = 0; c < batch.shape[1]; ++c) {
        const double m = stats.mean[c];
        const double inv = 1.0 / stats.stddev[c];
        double* row = out.row(i, c);
        for (std::size_t t = 0; t < batch.shape[2]; ++t) row[t] = (row[t] - m) * inv;
      }
    }
    return out;
  }

  // [B,C,W] -> [B,Nc,1]
  Tensor forward(const Tensor& batch, CnnCache* cache = nullptr) const {
    require_rank(batch, 3, "cnn input");
    if (batch.shape[1] != config.in_channels) {
      throw DimensionError("cnn forward: input has " + std::to_string(batch.shape[1]) +
                           " channels, model expects " + std::to_string(config.in_channels));
    }
    if (batch.shape[2] != config.window) {
      throw GeometryError("cnn forward: window length " + std::to_string(batch.shape[2]) +
                          ", model expects " + std::to_string(config.window));
    }
    Tensor x = standardize_batch(batch);
    Tensor z1 = conv1d_forward(x, conv1.weights.value, conv1.bias.value, conv1.spec);
    if (cache) cache->conv1.input = std::move(x);
    Tensor a1 = relu(z1);
    if (cache) cache->conv1.preact = std::move(z1);
    MaxPoolResult p1 = maxpool1d(a1);
    if (cache) {
      cache->arg1 = std::move(p1.argmax);
      cache->len1 = a1.shape[2];
    }
    Tensor z2 = conv1d_forward(p1.output, conv2.weights.value, conv2.bias.value, conv2.spec);
    if (cache) cache->conv2.input = std::move(p1.output);
    Tensor a2 = relu(z2);
    if (cache) cache->conv2.preact = std::move(z2);
    MaxPoolResult p2 = maxpool1d(a2);
    if (cache) {
      cache->arg2 = std::move(p2.argmax);
      cache->len2 = a2.shape[2];
    }
    Tensor zf = conv1d_forward(p2.output, fc.weights.value, fc.bias.value, fc.spec);
    if (cache) cache->fc.input = std::move(p2.output);
    Tensor af = relu(zf);
    if (cache) cache->fc.preact = std::move(zf);
    Tensor logits = conv1d_forward(af, head.weights.value, head.bias.value, head.spec);
    if (cache) cache->head_input = std::move(af);
    return logits;
  }

  void backward(const CnnCache& cache, const Tensor& grad_logits) {
    Conv1dGrads gh = conv1d_backward(grad_logits, cache.head_input, head.weights.value,
                                     head.spec);
    head.weights.accumulate(gh.weights);
    head.bias.accumulate(gh.bias);
    Tensor gzf = relu_backward(gh.input, cache.fc.preact);
    Conv1dGrads gf = conv1d_backward(gzf, cache.fc.input, fc.weights.value, fc.spec);
    fc.weights.accumulate(gf.weights);
    fc.bias.accumulate(gf.bias);
    Tensor ga2 = maxpool1d_backward(gf.input, cache.arg2, cache.len2);
    Tensor gz2 = relu_backward(ga2, cache.conv2.preact);
    Conv1dGrads g2 = conv1d_backward(gz2, cache.conv2.input, conv2.weights.value, conv2.spec);
    conv2.weights.accumulate(g2.weights);
    conv2.bias.accumulate(g2.bias);
    Tensor ga1 = maxpool1d_backward(g2.input, cache.arg1, cache.len1);
    Tensor gz1 = relu_backward(ga1, cache.conv1.preact);
    Conv1dGrads g1 = conv1d_backward(gz1, cache.conv1.input, conv1.weights.value, conv1.spec);
    conv1.weights.accumulate(g1.weights);
    conv1.bias.accumulate(g1.bias);
  }
};

inline WindowedCnnModel build_cnn(const CnnConfig& config) {
  config.validate();
  WindowedCnnModel model;
  model.config = config;
  Rng rng(config.seed);
  model.conv1 = detail::make_conv(config.in_channels, config.width1, 3, 1, rng);
  model.conv2 = detail::make_conv(config.width1, config.width2, 3, 1, rng);
  model.fc = detail::make_conv(config.width2, config.hidden, config.window / 4, 0, rng);
  model.head = detail::make_conv(config.hidden, config.num_classes, 1, 0, rng);
  return model;
}

inline TrainingLog cnn_train(WindowedCnnModel& model, const std::vector<RawWindow>& raw,
                             WindowLabeler labeler, const TrainConfig& cfg) {
  cfg.validate();
  if (raw.empty()) throw InputError("cnn training set is empty");
  std::vector<WindowSegment> windows = label_windows(raw, labeler);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].values.size() != model.config.in_channels ||
        windows[i].values[0].size() != model.config.window) {
      throw GeometryError("window " + std::to_string(i) + " does not match model geometry");
    }
    if (windows[i].label < 0 ||
        static_cast<std::size_t>(windows[i].label) >= model.config.num_classes) {
      throw LabelError("window " + std::to_string(i) + " carries label " +
                       std::to_string(windows[i].label));
    }
  }
  model.stats = standardize_fit(windows);

  TrainingLog log;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto params = model.parameters();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double t0 = detail::now_ms();
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t first = 0; first < windows.size(); first += cfg.batch_size) {
      const std::size_t last = std::min(windows.size(), first + cfg.batch_size);
      Tensor batch;
      std::vector<std::int32_t> targets;
      detail::fill_window_batch(windows, order, first, last, batch, targets);
      CnnCache cache;
      const Tensor logits = model.forward(batch, &cache);
      SoftmaxCrossEntropyResult loss = softmax_cross_entropy(logits, targets);
      model.backward(cache, loss.grad_logits);
      for (Parameter* p : params) adam_step(*p, cfg.learning_rate);
      ++log.optimizer_steps;
      loss_sum += loss.loss * static_cast<double>(targets.size());
      count += targets.size();
    }
    log.epochs.push_back({epoch, loss_sum / static_cast<double>(count),
                          detail::now_ms() - t0});
  }
  return log;
}

// One class index per window, in the order given.
inline std::vector<std::int32_t> cnn_predict(const WindowedCnnModel& model,
                                             const std::vector<RawWindow>& windows) {
  std::vector<std::int32_t> labels;
  labels.reserve(windows.size());
  constexpr std::size_t kChunk = 256;
  for (std::size_t first = 0; first < windows.size(); first += kChunk) {
    const std::size_t last = std::min(windows.size(), first + kChunk);
    Tensor batch({last - first, model.config.in_channels, model.config.window});
    for (std::size_t i = first; i < last; ++i) {
      if (windows[i].values.size() != model.config.in_channels ||
          windows[i].values[0].size() != model.config.window) {
        throw GeometryError("window " + std::to_string(i) + " does not match model geometry");
      }
      for (std::size_t c = 0; c < model.config.in_channels; ++c) {
        std::copy(windows[i].values[c].begin(), windows[i].values[c].end(),
                  batch.row(i - first, c));
      }
    }
    const Tensor logits = model.forward(batch);
    const auto batch_labels = argmax_classes(logits);
    labels.insert(labels.end(), batch_labels.begin(), batch_labels.end());
  }
  return labels;
}

// ---------------------------------------------------------------------------
// FCN dense labeler: six conv+pool stages, a 1x1 conv to class space, then a
// single transposed conv (kernel = stride = 64) that restores full length in
// one linear expansion.

struct FcnConfig {
  std::size_t in_channels = 3;
  std::size_t num_classes = 6;
  std::size_t subseq_length = 192;  // must divide by 2^6
  std::size_t base_features = 32;
  std::size_t width_cap = 256;
  std::uint64_t seed = 0;

  static constexpr std::size_t kStages = 6;
  static constexpr std::size_t kUpFactor = 64;  // 2^kStages

  void validate() const {
    if (in_channels == 0 || num_classes < 2 || base_features == 0) {
      throw ConfigError("fcn config: channels, classes and features must be positive");
    }
    if (subseq_length == 0 || subseq_length % kUpFactor != 0) {
      throw ConfigError("fcn config: sub-sequence length " + std::to_string(subseq_length) +
                        " not divisible by " + std::to_string(kUpFactor));
    }
  }

  std::size_t stage_width(std::size_t stage) const {
    return std::min(base_features << stage, width_cap);
  }
};

struct FcnCache {
  std::vector<UNetCache::ConvTrace> stages;
  std::vector<std::vector<std::int32_t>> argmax;
  std::vector<std::size_t> pre_pool_len;
  Tensor squeeze_input;
  Tensor up_input;
};

struct FcnModel {
  FcnConfig config;
  ChannelStats stats;
  std::vector<ConvLayer> stages;  // conv of each conv+pool block
  ConvLayer squeeze;              // 1x1 to class space
  UpconvLayer up;                 // kernel 64, stride 64

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    for (auto& s : stages) {
      out.push_back(&s.weights);
      out.push_back(&s.bias);
    }
    out.push_back(&squeeze.weights);
    out.push_back(&squeeze.bias);
    out.push_back(&up.weights);
    out.push_back(&up.bias);
    return out;
  }
  std::vector<const Parameter*> parameters() const {
    auto ptrs = const_cast<FcnModel*>(this)->parameters();
    return {ptrs.begin(), ptrs.end()};
  }

  Tensor standardize_batch(const Tensor& batch) const {
    if (stats.mean.empty()) return batch;
    Tensor out = batch;
    for (std::size_t i = 0; i < batch.shape[0]; ++i) {
      for (std::size_t c = 0; c < batch.shape[1]; ++c) {
        const double m = stats.mean[c];
        const double inv = 1.0 / stats.stddev[c];
        double* row = out.row(i, c);
        for (std::size_t t = 0; t < batch.shape[2]; ++t) row[t] = (row[t] - m) * inv;
      }
    }
    return out;
  }

  Tensor forward(const Tensor& batch, FcnCache* cache = nullptr) const {
    require_rank(batch, 3, "fcn input");
    if (batch.shape[1] != config.in_channels) {
      throw DimensionError("fcn forward: input has " + std::to_string(batch.shape[1]) +
                           " channels, model expects " + std::to_string(config.in_channels));
    }
    if (batch.shape[2] != config.subseq_length) {
      throw GeometryError("fcn forward: input length " + std::to_string(batch.shape[2]) +
                          ", model expects " + std::to_string(config.subseq_length));
    }
    if (cache) {
      cache->stages.resize(stages.size());
      cache->argmax.resize(stages.size());
      cache->pre_pool_len.resize(stages.size());
    }
    Tensor x = standardize_batch(batch);
    for (std::size_t s = 0; s < stages.size(); ++s) {
      Tensor z = conv1d_forward(x, stages[s].weights.value, stages[s].bias.value,
                                stages[s].spec);
      if (cache) cache->stages[s].input = std::move(x);
      Tensor a = relu(z);
      if (cache) cache->stages[s].preact = std::move(z);
      MaxPoolResult pooled = maxpool1d(a);
      if (cache) {
        cache->argmax[s] = std::move(pooled.argmax);
        cache->pre_pool_len[s] = a.shape[2];
      }
      x = std::move(pooled.output);
    }
    Tensor zs = conv1d_forward(x, squeeze.weights.value, squeeze.bias.value, squeeze.spec);
    if (cache) cache->squeeze_input = std::move(x);
    Tensor logits = upconv1d_forward(zs, up.weights.value, up.bias.value, up.stride);
    if (cache) cache->up_input = std::move(zs);
    return logits;
  }

  void backward(const FcnCache& cache, const Tensor& grad_logits) {
    Upconv1dGrads gu = upconv1d_backward(grad_logits, cache.up_input, up.weights.value,
                                         up.stride);
    up.weights.accumulate(gu.weights);
    up.bias.accumulate(gu.bias);
    Conv1dGrads gs = conv1d_backward(gu.input, cache.squeeze_input, squeeze.weights.value,
                                     squeeze.spec);
    squeeze.weights.accumulate(gs.weights);
    squeeze.bias.accumulate(gs.bias);
    Tensor grad = std::move(gs.input);
    for (std::size_t i = stages.size(); i-- > 0;) {
      Tensor ga = maxpool1d_backward(grad, cache.argmax[i], cache.pre_pool_len[i]);
      Tensor gz = relu_backward(ga, cache.stages[i].preact);
      Conv1dGrads g =
          conv1d_backward(gz, cache.stages[i].input, stages[i].weights.value, stages[i].spec);
      stages[i].weights.accumulate(g.weights);
      stages[i].bias.accumulate(g.bias);
      grad = std::move(g.input);
    }
  }
};

inline FcnModel build_fcn(const FcnConfig& config) {
  config.validate();
  FcnModel model;
  model.config = config;
  Rng rng(config.seed);
  std::size_t cin = config.in_channels;
  for (std::size_t s = 0; s < FcnConfig::kStages; ++s) {
    const std::size_t width = config.stage_width(s);
    model.stages.push_back(detail::make_conv(cin, width, 3, 1, rng));
    cin = width;
  }
  model.squeeze = detail::make_conv(cin, config.num_classes, 1, 0, rng);
  model.up = detail::make_upconv(config.num_classes, config.num_classes,
                                 FcnConfig::kUpFactor, rng);
  return model;
}

inline TrainingLog fcn_fit(FcnModel& model, const std::vector<SubSequence>& train,
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
    std::size_t points = 0;
    for (std::size_t first = 0; first < train.size(); first += cfg.batch_size) {
      const std::size_t last = std::min(train.size(), first + cfg.batch_size);
      Tensor batch;
      std::vector<std::int32_t> targets;
      detail::fill_batch(train, order, first, last, batch, targets);
      FcnCache cache;
      const Tensor logits = model.forward(batch, &cache);
      SoftmaxCrossEntropyResult loss = softmax_cross_entropy(logits, targets);
      model.backward(cache, loss.grad_logits);
      for (Parameter* p : params) adam_step(*p, cfg.learning_rate);
      ++log.optimizer_steps;
      loss_sum += loss.loss * static_cast<double>(targets.size());
      points += targets.size();
    }
    log.epochs.push_back({epoch, loss_sum / static_cast<double>(points),
                          detail::now_ms() - t0});
  }
  return log;
}

// Same pad-and-trim tiling as the dense U-Net path.
inline std::vector<std::int32_t> fcn_predict_dense(
    const FcnModel& model, const std::vector<std::vector<double>>& channels) {
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
    const auto batch_labels = argmax_classes(logits);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t origin = (tile0 + i) * n;
      const std::size_t keep = std::min(n, total - origin);
      labels.insert(labels.end(), batch_labels.begin() + i * n,
                    batch_labels.begin() + i * n + keep);
    }
  }
  return labels;
}

inline std::vector<std::int32_t> fcn_predict_dense(const FcnModel& model,
                                                   const LabeledSeries& series) {
  return fcn_predict_dense(model, series.channels);
}

// ---------------------------------------------------------------------------
// kNN over hand-crafted time-domain features

struct KnnIndex {
  std::size_t k = 5;
  std::size_t window = 64;
  std::size_t channels = 0;
  std::size_t num_classes = 0;
  FeatureStats stats;
  std::vector<std::vector<double>> features;  // standardized rows
  std::vector<std::int32_t> labels;
};

inline KnnIndex knn_fit(const std::vector<RawWindow>& raw, WindowLabeler labeler, std::size_t k,
                        std::size_t num_classes) {
  if (raw.empty()) throw InputError("knn training set is empty");
  if (k == 0 || k > raw.size()) {
    throw ConfigError("knn: k=" + std::to_string(k) + " with " + std::to_string(raw.size()) +
                      " training windows");
  }
  KnnIndex index;
  index.k = k;
  index.window = raw[0].values[0].size();
  index.channels = raw[0].values.size();
  index.num_classes = num_classes;
  std::vector<WindowSegment> windows = label_windows(raw, labeler);
  for (const auto& w : windows) index.features.push_back(extract_features(w.values));
  index.stats = feature_standardize_fit(index.features);
  for (auto& row : index.features) feature_standardize_apply(index.stats, row);
  for (const auto& w : windows) index.labels.push_back(w.label);
  return index;
}

// Majority vote among the k nearest by Euclidean distance. Distance ties keep
// training order; vote ties go to the smallest class index.
inline std::int32_t knn_predict(const KnnIndex& index,
                                const std::vector<std::vector<double>>& values) {
  std::vector<double> query = extract_features(values);
  feature_standardize_apply(index.stats, query);
  std::vector<std::pair<double, std::size_t>> dist(index.features.size());
  for (std::size_t i = 0; i < index.features.size(); ++i) {
    double d = 0.0;
    const auto& row = index.features[i];
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double diff = row[j] - query[j];
      d += diff * diff;
    }
    dist[i] = {d, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + index.k, dist.end());
  std::vector<std::size_t> votes(index.num_classes, 0);
  for (std::size_t i = 0; i < index.k; ++i) ++votes[index.labels[dist[i].second]];
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return static_cast<std::int32_t>(best);
}

inline std::vector<std::int32_t> knn_predict(const KnnIndex& index,
                                             const std::vector<RawWindow>& windows) {
  std::vector<std::int32_t> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(knn_predict(index, w.values));
  return out;
}

// ---------------------------------------------------------------------------
// Persistence (same container as the U-Net, distinguished by the kind tag)

inline void save_cnn(const WindowedCnnModel& model, const std::string& path) {
  ModelContainer box;
  box.kind = ModelKind::WindowedCnn;
  box.config = {{"window", model.config.window},
                {"in_channels", model.config.in_channels},
                {"num_classes", model.config.num_classes},
                {"width1", model.config.width1},
                {"width2", model.config.width2},
                {"hidden", model.config.hidden},
                {"seed", model.config.seed},
                {"channel_mean", model.stats.mean},
                {"channel_std", model.stats.stddev}};
  for (const Parameter* p : model.parameters()) box.tensors.push_back(p->value);
  save_model_container(path, box);
}

inline WindowedCnnModel cnn_from_container(const ModelContainer& box) {
  if (box.kind != ModelKind::WindowedCnn) {
    throw FormatError("model file holds a '" + std::string(model_kind_name(box.kind)) +
                      "' model, expected cnn");
  }
  CnnConfig config;
  try {
    config.window = box.config.at("window").get<std::size_t>();
    config.in_channels = box.config.at("in_channels").get<std::size_t>();
    config.num_classes = box.config.at("num_classes").get<std::size_t>();
    config.width1 = box.config.at("width1").get<std::size_t>();
    config.width2 = box.config.at("width2").get<std::size_t>();
    config.hidden = box.config.at("hidden").get<std::size_t>();
    config.seed = box.config.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cnn config block: ") + e.what());
  }
  WindowedCnnModel model = build_cnn(config);
  model.stats.mean = box.config.value("channel_mean", std::vector<double>{});
  model.stats.stddev = box.config.value("channel_std", std::vector<double>{});
  const auto params = model.parameters();
  if (params.size() != box.tensors.size()) {
    throw FormatError("cnn model file carries " + std::to_string(box.tensors.size()) +
                      " tensors, architecture needs " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->value.same_shape(box.tensors[i])) {
      throw FormatError("cnn model tensor " + std::to_string(i) + " shape mismatch");
    }
    params[i]->value = box.tensors[i];
  }
  return model;
}

inline void save_fcn(const FcnModel& model, const std::string& path) {
  ModelContainer box;
  box.kind = ModelKind::Fcn;
  box.config = {{"in_channels", model.config.in_channels},
                {"num_classes", model.config.num_classes},
                {"subseq_length", model.config.subseq_length},
                {"base_features", model.config.base_features},
                {"width_cap", model.config.width_cap},
                {"seed", model.config.seed},
                {"channel_mean", model.stats.mean},
                {"channel_std", model.stats.stddev}};
  for (const Parameter* p : model.parameters()) box.tensors.push_back(p->value);
  save_model_container(path, box);
}

inline FcnModel fcn_from_container(const ModelContainer& box) {
  if (box.kind != ModelKind::Fcn) {
    throw FormatError("model file holds a '" + std::string(model_kind_name(box.kind)) +
                      "' model, expected fcn");
  }
  FcnConfig config;
  try {
    config.in_channels = box.config.at("in_channels").get<std::size_t>();
    config.num_classes = box.config.at("num_classes").get<std::size_t>();
    config.subseq_length = box.config.at("subseq_length").get<std::size_t>();
    config.base_features = box.config.at("base_features").get<std::size_t>();
    config.width_cap = box.config.at("width_cap").get<std::size_t>();
    config.seed = box.config.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("fcn config block: ") + e.what());
  }
  FcnModel model = build_fcn(config);
  model.stats.mean = box.config.value("channel_mean", std::vector<double>{});
  model.stats.stddev = box.config.value("channel_std", std::vector<double>{});
  const auto params = model.parameters();
  if (params.size() != box.tensors.size()) {
    throw FormatError("fcn model file carries " + std::to_string(box.tensors.size()) +
                      " tensors, architecture needs " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->value.same_shape(box.tensors[i])) {
      throw FormatError("fcn model tensor " + std::to_string(i) + " shape mismatch");
    }
    params[i]->value = box.tensors[i];
  }
  return model;
}

inline void save_knn(const KnnIndex& index, const std::string& path) {
  ModelContainer box;
  box.kind = ModelKind::Knn;
  box.config = {{"k", index.k},
                {"window", index.window},
                {"channels", index.channels},
                {"num_classes", index.num_classes},
                {"feature_mean", index.stats.mean},
                {"feature_std", index.stats.stddev}};
  const std::size_t n = index.features.size();
  const std::size_t dim = index.features.empty() ? 0 : index.features[0].size();
  Tensor rows({std::max<std::size_t>(n, 1), std::max<std::size_t>(dim, 1)});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(index.features[i].begin(), index.features[i].end(), rows.ptr() + i * dim);
  }
  Tensor labels({std::max<std::size_t>(n, 1)});
  for (std::size_t i = 0; i < n; ++i) labels.data[i] = index.labels[i];
  box.tensors.push_back(std::move(rows));
  box.tensors.push_back(std::move(labels));
  save_model_container(path, box);
}

inline KnnIndex knn_from_container(const ModelContainer& box) {
  if (box.kind != ModelKind::Knn) {
    throw FormatError("model file holds a '" + std::string(model_kind_name(box.kind)) +
                      "' model, expected knn");
  }
  KnnIndex index;
  try {
    index.k = box.config.at("k").get<std::size_t>();
    index.window = box.config.at("window").get<std::size_t>();
    index.channels = box.config.at("channels").get<std::size_t>();
    index.num_classes = box.config.at("num_classes").get<std::size_t>();
    index.stats.mean = box.config.at("feature_mean").get<std::vector<double>>();
    index.stats.stddev = box.config.at("feature_std").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("knn config block: ") + e.what());
  }
  if (box.tensors.size() != 2 || box.tensors[0].rank() != 2 || box.tensors[1].rank() != 1) {
    throw FormatError("knn model file must carry a feature matrix and a label vector");
  }
  const Tensor& rows = box.tensors[0];
  const Tensor& labels = box.tensors[1];
  if (rows.shape[0] != labels.shape[0]) {
    throw FormatError("knn feature matrix and label vector disagree");
  }
  for (std::size_t i = 0; i < rows.shape[0]; ++i) {
    index.features.emplace_back(rows.ptr() + i * rows.shape[1],
                                rows.ptr() + (i + 1) * rows.shape[1]);
    index.labels.push_back(static_cast<std::int32_t>(labels.data[i]));
  }
  if (index.k > index.features.size()) {
    throw FormatError("knn model file: k exceeds stored vector count");
  }
  return index;
}

}  // namespace densehar
