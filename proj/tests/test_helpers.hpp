#pragma once

#include <vector>

#include "densehar/rng.hpp"
#include "densehar/tensor.hpp"

namespace testutil {

inline densehar::Tensor random_tensor(std::vector<std::size_t> shape, densehar::Rng& rng,
                                      double lo = -1.0, double hi = 1.0) {
  densehar::Tensor t(std::move(shape));
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

inline double max_abs_diff(const densehar::Tensor& a, const densehar::Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  }
  return m;
}

}  // namespace testutil
