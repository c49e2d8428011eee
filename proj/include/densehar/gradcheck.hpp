#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "densehar/tensor.hpp"

namespace densehar {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  double tolerance = 0.0;
  bool passed() const { return max_rel_err < tolerance; }
};

// Checks analytic gradients against central finite differences on 64-bit
// values. scalar_fn maps inputs to a scalar loss; grad_fn returns the
// analytic gradient of that loss for each input tensor. The finite-difference
// side only ever calls scalar_fn, so it stays independent of whatever
// backward path grad_fn uses.
inline GradCheckReport grad_check(
    const std::function<double(const std::vector<Tensor>&)>& scalar_fn,
    const std::function<std::vector<Tensor>(const std::vector<Tensor>&)>& grad_fn,
    std::vector<Tensor> inputs, double tolerance, double step = 1e-5) {
  GradCheckReport report;
  report.tolerance = tolerance;
  const std::vector<Tensor> analytic = grad_fn(inputs);
  if (analytic.size() != inputs.size()) {
    throw DimensionError("grad_check: grad_fn returned " + std::to_string(analytic.size()) +
                         " gradients for " + std::to_string(inputs.size()) + " inputs");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!analytic[i].same_shape(inputs[i])) {
      throw DimensionError("grad_check: gradient " + std::to_string(i) + " has shape " +
                           analytic[i].shape_string() + ", input is " +
                           inputs[i].shape_string());
    }
    for (std::size_t j = 0; j < inputs[i].size(); ++j) {
      const double saved = inputs[i].data[j];
      inputs[i].data[j] = saved + step;
      const double f_plus = scalar_fn(inputs);
      inputs[i].data[j] = saved - step;
      const double f_minus = scalar_fn(inputs);
      inputs[i].data[j] = saved;
      const double fd = (f_plus - f_minus) / (2.0 * step);
      const double an = analytic[i].data[j];
      const double scale = std::max(std::abs(fd), std::abs(an));
      if (scale > 1e-8) {
        report.max_rel_err = std::max(report.max_rel_err, std::abs(fd - an) / scale);
      }
      ++report.checked;
    }
  }
  return report;
}

}  // namespace densehar
