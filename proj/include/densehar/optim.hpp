#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "densehar/tensor.hpp"

namespace densehar {

// A trainable tensor with its gradient and Adam state. Moment buffers are
// zero-initialized; step_count is the per-parameter Adam timestep t.
struct Parameter {
  Tensor value;
  Tensor gradient;
  Tensor adam_m;
  Tensor adam_v;
  std::uint64_t step_count = 0;

  Parameter() = default;
  explicit Parameter(Tensor v)
      : value(std::move(v)),
        gradient(value.shape),
        adam_m(value.shape),
        adam_v(value.shape) {}

  void accumulate(const Tensor& g) {
    if (!g.same_shape(gradient)) {
      throw DimensionError("gradient shape " + g.shape_string() +
                           " does not match parameter " + value.shape_string());
    }
    for (std::size_t i = 0; i < gradient.size(); ++i) gradient.data[i] += g.data[i];
  }

  void zero_grad() { std::fill(gradient.data.begin(), gradient.data.end(), 0.0); }
};

// Bias-corrected Adam update. Consumes the accumulated gradient and clears it.
inline void adam_step(Parameter& param, double lr, double beta1 = 0.9, double beta2 = 0.999,
                      double eps = 1e-8) {
  param.step_count += 1;
  const double t = static_cast<double>(param.step_count);
  const double m_corr = 1.0 - std::pow(beta1, t);
  const double v_corr = 1.0 - std::pow(beta2, t);
  double* value = param.value.ptr();
  double* grad = param.gradient.ptr();
  double* m = param.adam_m.ptr();
  double* v = param.adam_v.ptr();
  const std::size_t n = param.value.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    const double m_hat = m[i] / m_corr;
    const double v_hat = v[i] / v_corr;
    value[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    grad[i] = 0.0;
  }
}

}  // namespace densehar
