#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "densehar/data.hpp"
#include "densehar/errors.hpp"
#include "densehar/tensor.hpp"

namespace densehar {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  double test_fraction = 0.3;
  std::uint64_t seed = 0;

  void validate() const {
    if (learning_rate < 0.0) throw ConfigError("learning rate must be >= 0");
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (test_fraction <= 0.0 || test_fraction >= 1.0) {
      throw ConfigError("test fraction must be in (0,1)");
    }
  }
};

struct TrainingLog {
  struct Epoch {
    std::size_t index = 0;
    double mean_loss = 0.0;
    double wall_ms = 0.0;
  };
  std::vector<Epoch> epochs;
  std::size_t optimizer_steps = 0;
};

namespace detail {

inline double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Stacks sub-sequences picked by `order[first, last)` into a [B,C,N] tensor
// plus flat targets.
inline void fill_batch(const std::vector<SubSequence>& items,
                       const std::vector<std::size_t>& order, std::size_t first,
                       std::size_t last, Tensor& batch, std::vector<std::int32_t>& targets) {
  const std::size_t b = last - first;
  const std::size_t channels = items[order[first]].values.size();
  const std::size_t n = items[order[first]].values[0].size();
  batch = Tensor({b, channels, n});
  targets.resize(b * n);
  for (std::size_t i = 0; i < b; ++i) {
    const SubSequence& s = items[order[first + i]];
    for (std::size_t c = 0; c < channels; ++c) {
      std::copy(s.values[c].begin(), s.values[c].end(), batch.row(i, c));
    }
    std::copy(s.dense_labels.begin(), s.dense_labels.end(), targets.begin() + i * n);
  }
}

inline void fill_window_batch(const std::vector<WindowSegment>& items,
                              const std::vector<std::size_t>& order, std::size_t first,
                              std::size_t last, Tensor& batch,
                              std::vector<std::int32_t>& targets) {
  const std::size_t b = last - first;
  const std::size_t channels = items[order[first]].values.size();
  const std::size_t w = items[order[first]].values[0].size();
  batch = Tensor({b, channels, w});
  targets.resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    const WindowSegment& s = items[order[first + i]];
    for (std::size_t c = 0; c < channels; ++c) {
      std::copy(s.values[c].begin(), s.values[c].end(), batch.row(i, c));
    }
    targets[i] = s.label;
  }
}

}  // namespace detail

}  // namespace densehar
