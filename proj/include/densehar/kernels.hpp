#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "densehar/errors.hpp"
#include "densehar/parallel.hpp"
#include "densehar/tensor.hpp"

namespace densehar {

// Geometry of a 1-d convolution: out = (in + 2*padding - kernel)/stride + 1,
// required to divide exactly.
struct ConvSpec {
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_length(std::size_t in_length) const {
    if (kernel == 0 || stride == 0) {
      throw GeometryError("kernel and stride must be positive");
    }
    const std::size_t padded = in_length + 2 * padding;
    if (padded < kernel) {
      throw GeometryError("conv1d: padded length " + std::to_string(padded) +
                          " shorter than kernel " + std::to_string(kernel));
    }
    if ((padded - kernel) % stride != 0) {
      throw GeometryError("conv1d: (length " + std::to_string(in_length) + " + 2*" +
                          std::to_string(padding) + " - " + std::to_string(kernel) +
                          ") not divisible by stride " + std::to_string(stride));
    }
    return (padded - kernel) / stride + 1;
  }
};

namespace detail {

// Dot product over eight independent accumulator lanes; the fixed summation
// order keeps results bit-reproducible while the lanes map onto vector FMAs.
inline double dot8(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  double s4 = 0.0, s5 = 0.0, s6 = 0.0, s7 = 0.0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
}

inline void axpy(double* dst, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a * x[i];
}

inline Tensor zero_pad_length(const Tensor& input, std::size_t padding) {
  const std::size_t b = input.shape[0], c = input.shape[1], len = input.shape[2];
  Tensor padded({b, c, len + 2 * padding});
  for (std::size_t i = 0; i < b * c; ++i) {
    const double* src = input.ptr() + i * len;
    double* dst = padded.ptr() + i * (len + 2 * padding) + padding;
    std::copy(src, src + len, dst);
  }
  return padded;
}

// Patch layout: rows of kernel-sized input neighborhoods, one row per output
// position, so per-position work runs over the long contiguous Cin*K axis.
// patches[b] is [lout, cin*k] gathered from the zero-padded input.
inline Tensor gather_patches(const Tensor& padded, std::size_t cin, std::size_t k,
                             std::size_t stride, std::size_t lout) {
  const std::size_t batch = padded.shape[0];
  const std::size_t lpad = padded.shape[2];
  Tensor patches({batch, lout, cin * k});
  parallel_for(batch, [&](std::size_t b) {
    for (std::size_t t = 0; t < lout; ++t) {
      double* row = patches.ptr() + (b * lout + t) * cin * k;
      const double* base = padded.ptr() + b * cin * lpad + t * stride;
      for (std::size_t ic = 0; ic < cin; ++ic) {
        const double* src = base + ic * lpad;
        for (std::size_t kk = 0; kk < k; ++kk) row[ic * k + kk] = src[kk];
      }
    }
  });
  return patches;
}

inline void check_conv_args(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require_rank(input, 3, "conv1d input");
  require_rank(weights, 3, "conv1d weights");
  require_rank(bias, 1, "conv1d bias");
  if (input.shape[1] != weights.shape[1]) {
    throw DimensionError("conv1d: input has " + std::to_string(input.shape[1]) +
                         " channels but weights expect " + std::to_string(weights.shape[1]));
  }
  if (bias.shape[0] != weights.shape[0]) {
    throw DimensionError("conv1d: bias length " + std::to_string(bias.shape[0]) +
                         " does not match output channels " + std::to_string(weights.shape[0]));
  }
}

}  // namespace detail

// Cross-correlation (no kernel flip) with zero padding.
// input [B,Cin,L], weights [Cout,Cin,K], bias [Cout] -> [B,Cout,Lout].
inline Tensor conv1d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                             const ConvSpec& spec) {
  detail::check_conv_args(input, weights, bias);
  if (weights.shape[2] != spec.kernel) {
    throw DimensionError("conv1d: weight kernel length " + std::to_string(weights.shape[2]) +
                         " does not match spec kernel " + std::to_string(spec.kernel));
  }
  const std::size_t batch = input.shape[0];
  const std::size_t cin = input.shape[1];
  const std::size_t cout = weights.shape[0];
  const std::size_t k = spec.kernel;
  const std::size_t lout = spec.out_length(input.shape[2]);

  const Tensor padded = spec.padding ? detail::zero_pad_length(input, spec.padding) : Tensor();
  const Tensor& src = spec.padding ? padded : input;
  const Tensor patches = detail::gather_patches(src, cin, k, spec.stride, lout);
  const std::size_t width = cin * k;

  Tensor out({batch, cout, lout});
  parallel_for(batch * cout, [&](std::size_t idx) {
    const std::size_t b = idx / cout;
    const std::size_t oc = idx % cout;
    double* orow = out.ptr() + (b * cout + oc) * lout;
    const double* wrow = weights.ptr() + oc * width;
    const double* prow = patches.ptr() + b * lout * width;
    for (std::size_t t = 0; t < lout; ++t) {
      orow[t] = bias.data[oc] + detail::dot8(wrow, prow + t * width, width);
    }
  });
  return out;
}

struct Conv1dGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

inline Conv1dGrads conv1d_backward(const Tensor& grad_out, const Tensor& saved_input,
                                   const Tensor& weights, const ConvSpec& spec) {
  require_rank(grad_out, 3, "conv1d grad_out");
  detail::check_conv_args(saved_input, weights,
                          Tensor({weights.shape[0]}));
  const std::size_t batch = saved_input.shape[0];
  const std::size_t cin = saved_input.shape[1];
  const std::size_t len = saved_input.shape[2];
  const std::size_t cout = weights.shape[0];
  const std::size_t k = spec.kernel;
  const std::size_t lout = spec.out_length(len);
  if (grad_out.shape != std::vector<std::size_t>{batch, cout, lout}) {
    throw DimensionError("conv1d_backward: grad_out shape " + grad_out.shape_string() +
                         " does not match forward output");
  }

  const Tensor padded =
      spec.padding ? detail::zero_pad_length(saved_input, spec.padding) : Tensor();
  const Tensor& src = spec.padding ? padded : saved_input;
  const std::size_t lpad = src.shape[2];
  const Tensor patches = detail::gather_patches(src, cin, k, spec.stride, lout);
  const std::size_t width = cin * k;

  Conv1dGrads grads;
  grads.bias = Tensor({cout});
  for (std::size_t oc = 0; oc < cout; ++oc) {
    double acc = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* g = grad_out.row(b, oc);
      for (std::size_t t = 0; t < lout; ++t) acc += g[t];
    }
    grads.bias.data[oc] = acc;
  }

  // d_w[oc,:] accumulates grad-weighted patch rows. Output channels are
  // processed in blocks so each patch row is reused from cache across the
  // block instead of re-streamed per channel.
  grads.weights = Tensor({cout, cin, k});
  constexpr std::size_t kOcBlock = 16;
  const std::size_t oc_blocks = (cout + kOcBlock - 1) / kOcBlock;
  parallel_for(oc_blocks, [&](std::size_t blk) {
    const std::size_t oc0 = blk * kOcBlock;
    const std::size_t oc1 = std::min(cout, oc0 + kOcBlock);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* gb = grad_out.ptr() + b * cout * lout;
      const double* prow = patches.ptr() + b * lout * width;
      for (std::size_t t = 0; t < lout; ++t) {
        const double* patch = prow + t * width;
        for (std::size_t oc = oc0; oc < oc1; ++oc) {
          detail::axpy(grads.weights.ptr() + oc * width, gb[oc * lout + t], patch, width);
        }
      }
    }
  });

  // d_input goes through patch space: accumulate per-position rows for a
  // block of positions (one weight pass per block), then scatter them back
  // onto the padded axis.
  grads.input = Tensor({batch, cin, len});
  const std::size_t t_block = std::max<std::size_t>(1, 16384 / width);
  parallel_for(batch, [&](std::size_t b) {
    std::vector<double> drows(t_block * width);
    std::vector<double> dpad(cin * lpad, 0.0);
    for (std::size_t t0 = 0; t0 < lout; t0 += t_block) {
      const std::size_t tb = std::min(t_block, lout - t0);
      std::fill(drows.begin(), drows.begin() + tb * width, 0.0);
      for (std::size_t oc = 0; oc < cout; ++oc) {
        const double* wrow = weights.ptr() + oc * width;
        const double* g = grad_out.ptr() + (b * cout + oc) * lout + t0;
        for (std::size_t tt = 0; tt < tb; ++tt) {
          detail::axpy(drows.data() + tt * width, g[tt], wrow, width);
        }
      }
      for (std::size_t tt = 0; tt < tb; ++tt) {
        double* base = dpad.data() + (t0 + tt) * spec.stride;
        const double* drow = drows.data() + tt * width;
        for (std::size_t ic = 0; ic < cin; ++ic) {
          double* dst = base + ic * lpad;
          for (std::size_t kk = 0; kk < k; ++kk) dst[kk] += drow[ic * k + kk];
        }
      }
    }
    for (std::size_t ic = 0; ic < cin; ++ic) {
      const double* srcrow = dpad.data() + ic * lpad + spec.padding;
      std::copy(srcrow, srcrow + len, grads.input.ptr() + (b * cin + ic) * len);
    }
  });
  return grads;
}

// Max pool of width 2, stride 2. Ties route to the earlier index; the argmax
// map records absolute input positions for exact backward routing.
struct MaxPoolResult {
  Tensor output;
  std::vector<std::int32_t> argmax;  // one input index per output element
};

inline MaxPoolResult maxpool1d(const Tensor& input) {
  require_rank(input, 3, "maxpool1d input");
  const std::size_t len = input.shape[2];
  if (len % 2 != 0) {
    throw GeometryError("maxpool1d: length " + std::to_string(len) + " is odd");
  }
  const std::size_t batch = input.shape[0], c = input.shape[1], lout = len / 2;
  MaxPoolResult res{Tensor({batch, c, lout}), std::vector<std::int32_t>(batch * c * lout)};
  for (std::size_t i = 0; i < batch * c; ++i) {
    const double* in = input.ptr() + i * len;
    double* out = res.output.ptr() + i * lout;
    std::int32_t* arg = res.argmax.data() + i * lout;
    for (std::size_t t = 0; t < lout; ++t) {
      const double a = in[2 * t], b = in[2 * t + 1];
      if (b > a) {
        out[t] = b;
        arg[t] = static_cast<std::int32_t>(2 * t + 1);
      } else {
        out[t] = a;
        arg[t] = static_cast<std::int32_t>(2 * t);
      }
    }
  }
  return res;
}

inline Tensor maxpool1d_backward(const Tensor& grad_out, const std::vector<std::int32_t>& argmax,
                                 std::size_t in_length) {
  require_rank(grad_out, 3, "maxpool1d grad_out");
  const std::size_t batch = grad_out.shape[0], c = grad_out.shape[1], lout = grad_out.shape[2];
  if (argmax.size() != batch * c * lout || in_length != 2 * lout) {
    throw DimensionError("maxpool1d_backward: argmax map does not match grad_out");
  }
  Tensor grad_in({batch, c, in_length});
  for (std::size_t i = 0; i < batch * c; ++i) {
    const double* g = grad_out.ptr() + i * lout;
    const std::int32_t* arg = argmax.data() + i * lout;
    double* d = grad_in.ptr() + i * in_length;
    for (std::size_t t = 0; t < lout; ++t) d[arg[t]] += g[t];
  }
  return grad_in;
}

// Transposed convolution, no padding: out[b,co,t*stride+k] += w[ci,co,k]*in[b,ci,t].
// Output length (L-1)*stride + K; with K == stride == 2 this doubles the length.
// input [B,Cin,L], weights [Cin,Cout,K], bias [Cout].
inline Tensor upconv1d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                               std::size_t stride = 2) {
  require_rank(input, 3, "upconv1d input");
  require_rank(weights, 3, "upconv1d weights");
  require_rank(bias, 1, "upconv1d bias");
  if (input.shape[1] != weights.shape[0]) {
    throw DimensionError("upconv1d: input has " + std::to_string(input.shape[1]) +
                         " channels but weights expect " + std::to_string(weights.shape[0]));
  }
  if (bias.shape[0] != weights.shape[1]) {
    throw DimensionError("upconv1d: bias length does not match output channels");
  }
  if (stride == 0) throw GeometryError("upconv1d: stride must be positive");
  const std::size_t batch = input.shape[0];
  const std::size_t cin = input.shape[1];
  const std::size_t len = input.shape[2];
  const std::size_t cout = weights.shape[1];
  const std::size_t k = weights.shape[2];
  const std::size_t lout = (len - 1) * stride + k;

  // Per input position, the contribution to the output is a dense row over
  // (co, kk); working in that flat space keeps the inner loops long.
  const std::size_t width = cout * k;
  Tensor out({batch, cout, lout});
  parallel_for(batch, [&](std::size_t b) {
    double* obase = out.ptr() + b * cout * lout;
    for (std::size_t co = 0; co < cout; ++co) {
      std::fill(obase + co * lout, obase + (co + 1) * lout, bias.data[co]);
    }
    std::vector<double> orow(width);
    for (std::size_t t = 0; t < len; ++t) {
      std::fill(orow.begin(), orow.end(), 0.0);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double v = input.ptr()[(b * cin + ci) * len + t];
        detail::axpy(orow.data(), v, weights.ptr() + ci * width, width);
      }
      for (std::size_t co = 0; co < cout; ++co) {
        double* dst = obase + co * lout + t * stride;
        const double* src = orow.data() + co * k;
        for (std::size_t kk = 0; kk < k; ++kk) dst[kk] += src[kk];
      }
    }
  });
  return out;
}

struct Upconv1dGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

inline Upconv1dGrads upconv1d_backward(const Tensor& grad_out, const Tensor& saved_input,
                                       const Tensor& weights, std::size_t stride = 2) {
  require_rank(grad_out, 3, "upconv1d grad_out");
  require_rank(saved_input, 3, "upconv1d input");
  require_rank(weights, 3, "upconv1d weights");
  const std::size_t batch = saved_input.shape[0];
  const std::size_t cin = saved_input.shape[1];
  const std::size_t len = saved_input.shape[2];
  const std::size_t cout = weights.shape[1];
  const std::size_t k = weights.shape[2];
  const std::size_t lout = (len - 1) * stride + k;
  if (grad_out.shape != std::vector<std::size_t>{batch, cout, lout}) {
    throw DimensionError("upconv1d_backward: grad_out shape " + grad_out.shape_string() +
                         " does not match forward output");
  }

  Upconv1dGrads grads;
  grads.bias = Tensor({cout});
  for (std::size_t co = 0; co < cout; ++co) {
    double acc = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* g = grad_out.row(b, co);
      for (std::size_t t = 0; t < lout; ++t) acc += g[t];
    }
    grads.bias.data[co] = acc;
  }

  // Gather the upstream gradient into the same flat (co, kk) row space the
  // forward scatter writes through.
  const std::size_t width = cout * k;
  Tensor gflat({batch, len, width});
  parallel_for(batch, [&](std::size_t b) {
    for (std::size_t t = 0; t < len; ++t) {
      double* row = gflat.ptr() + (b * len + t) * width;
      for (std::size_t co = 0; co < cout; ++co) {
        const double* src = grad_out.ptr() + (b * cout + co) * lout + t * stride;
        for (std::size_t kk = 0; kk < k; ++kk) row[co * k + kk] = src[kk];
      }
    }
  });

  grads.weights = Tensor({cin, cout, k});
  parallel_for(cin, [&](std::size_t ci) {
    double* wg = grads.weights.ptr() + ci * width;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* in = saved_input.ptr() + (b * cin + ci) * len;
      const double* grow = gflat.ptr() + b * len * width;
      for (std::size_t t = 0; t < len; ++t) {
        detail::axpy(wg, in[t], grow + t * width, width);
      }
    }
  });

  grads.input = Tensor({batch, cin, len});
  parallel_for(batch, [&](std::size_t b) {
    for (std::size_t ci = 0; ci < cin; ++ci) {
      double* drow = grads.input.ptr() + (b * cin + ci) * len;
      const double* wrow = weights.ptr() + ci * width;
      const double* grow = gflat.ptr() + b * len * width;
      for (std::size_t t = 0; t < len; ++t) {
        drow[t] = detail::dot8(wrow, grow + t * width, width);
      }
    }
  });
  return grads;
}

inline Tensor relu(const Tensor& input) {
  Tensor out(input.shape);
  for (std::size_t i = 0; i < input.size(); ++i) out.data[i] = std::max(0.0, input.data[i]);
  return out;
}

// Subgradient 0 at exactly 0.
inline Tensor relu_backward(const Tensor& grad_out, const Tensor& saved_input) {
  if (!grad_out.same_shape(saved_input)) {
    throw DimensionError("relu_backward: grad shape " + grad_out.shape_string() +
                         " does not match input " + saved_input.shape_string());
  }
  Tensor grad_in(saved_input.shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    grad_in.data[i] = saved_input.data[i] > 0.0 ? grad_out.data[i] : 0.0;
  }
  return grad_in;
}

struct SoftmaxCrossEntropyResult {
  double loss = 0.0;
  Tensor grad_logits;
};

// Softmax over the class axis per time step; loss is the mean of
// -log p(target) over all B*N sample points, grad = (softmax - onehot)/(B*N).
// logits [B,Nc,N], targets row-major [B*N].
inline SoftmaxCrossEntropyResult softmax_cross_entropy(const Tensor& logits,
                                                       const std::vector<std::int32_t>& targets) {
  require_rank(logits, 3, "softmax logits");
  const std::size_t batch = logits.shape[0];
  const std::size_t classes = logits.shape[1];
  const std::size_t n = logits.shape[2];
  if (targets.size() != batch * n) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(batch * n) + " sample points");
  }
  SoftmaxCrossEntropyResult res;
  res.grad_logits = Tensor(logits.shape);
  const double inv_total = 1.0 / static_cast<double>(batch * n);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* lb = logits.ptr() + b * classes * n;
    double* gb = res.grad_logits.ptr() + b * classes * n;
    for (std::size_t t = 0; t < n; ++t) {
      const std::int32_t target = targets[b * n + t];
      if (target < 0 || static_cast<std::size_t>(target) >= classes) {
        throw LabelError("softmax_cross_entropy: target " + std::to_string(target) +
                         " out of range at batch " + std::to_string(b) + " position " +
                         std::to_string(t));
      }
      double mx = lb[t];
      for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, lb[c * n + t]);
      double sum = 0.0;
      for (std::size_t c = 0; c < classes; ++c) sum += std::exp(lb[c * n + t] - mx);
      const double lse = mx + std::log(sum);
      loss += lse - lb[static_cast<std::size_t>(target) * n + t];
      for (std::size_t c = 0; c < classes; ++c) {
        const double p = std::exp(lb[c * n + t] - lse);
        gb[c * n + t] =
            (p - (c == static_cast<std::size_t>(target) ? 1.0 : 0.0)) * inv_total;
      }
    }
  }
  res.loss = loss * inv_total;
  return res;
}

// Softmax probabilities per time step (prediction path).
inline Tensor softmax(const Tensor& logits) {
  require_rank(logits, 3, "softmax logits");
  const std::size_t batch = logits.shape[0];
  const std::size_t classes = logits.shape[1];
  const std::size_t n = logits.shape[2];
  Tensor probs(logits.shape);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* lb = logits.ptr() + b * classes * n;
    double* pb = probs.ptr() + b * classes * n;
    for (std::size_t t = 0; t < n; ++t) {
      double mx = lb[t];
      for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, lb[c * n + t]);
      double sum = 0.0;
      for (std::size_t c = 0; c < classes; ++c) sum += std::exp(lb[c * n + t] - mx);
      for (std::size_t c = 0; c < classes; ++c) pb[c * n + t] = std::exp(lb[c * n + t] - mx) / sum;
    }
  }
  return probs;
}

// Per-position argmax over the class axis, ties to the smallest class index.
inline std::vector<std::int32_t> argmax_classes(const Tensor& logits) {
  require_rank(logits, 3, "argmax logits");
  const std::size_t batch = logits.shape[0];
  const std::size_t classes = logits.shape[1];
  const std::size_t n = logits.shape[2];
  std::vector<std::int32_t> labels(batch * n);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* lb = logits.ptr() + b * classes * n;
    for (std::size_t t = 0; t < n; ++t) {
      std::size_t best = 0;
      double best_v = lb[t];
      for (std::size_t c = 1; c < classes; ++c) {
        if (lb[c * n + t] > best_v) {
          best_v = lb[c * n + t];
          best = c;
        }
      }
      labels[b * n + t] = static_cast<std::int32_t>(best);
    }
  }
  return labels;
}

// Channel concatenation of two [B,C,L] tensors.
inline Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "concat lhs");
  require_rank(b, 3, "concat rhs");
  if (a.shape[0] != b.shape[0] || a.shape[2] != b.shape[2]) {
    throw DimensionError("concat_channels: " + a.shape_string() + " vs " + b.shape_string());
  }
  const std::size_t batch = a.shape[0], ca = a.shape[1], cb = b.shape[1], len = a.shape[2];
  Tensor out({batch, ca + cb, len});
  for (std::size_t i = 0; i < batch; ++i) {
    std::copy(a.ptr() + i * ca * len, a.ptr() + (i + 1) * ca * len,
              out.ptr() + i * (ca + cb) * len);
    std::copy(b.ptr() + i * cb * len, b.ptr() + (i + 1) * cb * len,
              out.ptr() + i * (ca + cb) * len + ca * len);
  }
  return out;
}

inline std::pair<Tensor, Tensor> split_channels(const Tensor& t, std::size_t first_channels) {
  require_rank(t, 3, "split input");
  if (first_channels == 0 || first_channels >= t.shape[1]) {
    throw DimensionError("split_channels: bad split " + std::to_string(first_channels) +
                         " of " + std::to_string(t.shape[1]));
  }
  const std::size_t batch = t.shape[0], c = t.shape[1], len = t.shape[2];
  const std::size_t cb = c - first_channels;
  Tensor a({batch, first_channels, len});
  Tensor b({batch, cb, len});
  for (std::size_t i = 0; i < batch; ++i) {
    std::copy(t.ptr() + i * c * len, t.ptr() + i * c * len + first_channels * len,
              a.ptr() + i * first_channels * len);
    std::copy(t.ptr() + i * c * len + first_channels * len, t.ptr() + (i + 1) * c * len,
              b.ptr() + i * cb * len);
  }
  return {std::move(a), std::move(b)};
}

}  // namespace densehar
