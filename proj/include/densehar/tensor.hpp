#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "densehar/errors.hpp"

namespace densehar {

// Dense row-major array of doubles. Carries signals, kernels and gradients;
// rank is dynamic but almost everything here is [batch, channels, length].
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> dims)
      : shape(std::move(dims)), data(checked_volume(shape), 0.0) {}

  Tensor(std::vector<std::size_t> dims, std::vector<double> values)
      : shape(std::move(dims)), data(std::move(values)) {
    if (checked_volume(shape) != data.size()) {
      throw DimensionError("tensor data length " + std::to_string(data.size()) +
                           " does not match shape volume " +
                           std::to_string(checked_volume(shape)));
    }
  }

  static Tensor zeros(std::vector<std::size_t> dims) { return Tensor(std::move(dims)); }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  // Row pointer for 3-d tensors laid out [d0, d1, d2].
  double* row(std::size_t i, std::size_t j) {
    return data.data() + (i * shape[1] + j) * shape[2];
  }
  const double* row(std::size_t i, std::size_t j) const {
    return data.data() + (i * shape[1] + j) * shape[2];
  }

  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  bool all_finite() const {
    for (double v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  std::string shape_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) os << ',';
      os << shape[i];
    }
    os << ']';
    return os.str();
  }

 private:
  static std::size_t checked_volume(const std::vector<std::size_t>& dims) {
    std::size_t v = 1;
    for (std::size_t d : dims) {
      if (d == 0) throw DimensionError("tensor extents must be positive");
      v *= d;
    }
    return dims.empty() ? 0 : v;
  }
};

inline void require_rank(const Tensor& t, std::size_t rank, const char* name) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(name) + " must have rank " + std::to_string(rank) +
                         ", got shape " + t.shape_string());
  }
}

}  // namespace densehar
