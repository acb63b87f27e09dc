#include "abcd/layers.hpp"

#include <algorithm>
#include <cmath>

#include "abcd/errors.hpp"

namespace abcd {

void ConvParams::validate() const {
  if (width == 0 || width % 2 == 0) {
    throw ArgumentError("conv1d: kernel width must be odd, got " + std::to_string(width));
  }
  const std::size_t n = width * in_channels * out_channels;
  if (kernels.size() != n) throw DimensionError("conv1d", "kernel", n, kernels.size());
  if (biases.size() != out_channels) {
    throw DimensionError("conv1d", "bias", out_channels, biases.size());
  }
  if (!kernel_grads.empty() && kernel_grads.size() != n) {
    throw DimensionError("conv1d", "kernel_grad", n, kernel_grads.size());
  }
  if (!bias_grads.empty() && bias_grads.size() != out_channels) {
    throw DimensionError("conv1d", "bias_grad", out_channels, bias_grads.size());
  }
}

FeatureMap conv1d_forward(const FeatureMap& input, const ConvParams& params, bool activate) {
  params.validate();
  if (input.channels() != params.in_channels) {
    throw DimensionError("conv1d_forward", "channels", params.in_channels, input.channels());
  }
  if (input.time() == 0) throw DimensionError("conv1d_forward", "time", 1, 0);

  const std::size_t T = input.time();
  const std::size_t in_c = params.in_channels;
  const std::size_t out_c = params.out_channels;
  const auto pad = static_cast<std::ptrdiff_t>(params.width / 2);
  FeatureMap out(input.batch(), T, out_c);

  for (std::size_t b = 0; b < input.batch(); ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      double* dst = &out(b, t, 0);
      for (std::size_t o = 0; o < out_c; ++o) dst[o] = params.biases[o];
      for (std::size_t k = 0; k < params.width; ++k) {
        const std::ptrdiff_t src_t = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(k) - pad;
        if (src_t < 0 || src_t >= static_cast<std::ptrdiff_t>(T)) continue;
        const double* src = &input(b, static_cast<std::size_t>(src_t), 0);
        for (std::size_t i = 0; i < in_c; ++i) {
          const double x = src[i];
          const double* w = &params.kernels[(k * in_c + i) * out_c];
          for (std::size_t o = 0; o < out_c; ++o) dst[o] += x * w[o];
        }
      }
      if (activate) {
        for (std::size_t o = 0; o < out_c; ++o) dst[o] = std::max(0.0, dst[o]);
      }
    }
  }
  return out;
}

FeatureMap conv1d_backward(const FeatureMap& input, const ConvParams& params,
                           const FeatureMap& upstream_grad) {
  params.validate();
  if (input.channels() != params.in_channels) {
    throw DimensionError("conv1d_backward", "channels", params.in_channels, input.channels());
  }
  require_same_shape("conv1d_backward", FeatureMap(input.batch(), input.time(), params.out_channels),
                     upstream_grad);

  const std::size_t T = input.time();
  const std::size_t in_c = params.in_channels;
  const std::size_t out_c = params.out_channels;
  const auto pad = static_cast<std::ptrdiff_t>(params.width / 2);
  const bool want_params = !params.kernel_grads.empty();
  FeatureMap grad_in(input.batch(), T, in_c);

  for (std::size_t b = 0; b < input.batch(); ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      const double* up = &upstream_grad(b, t, 0);
      if (want_params) {
        for (std::size_t o = 0; o < out_c; ++o) params.bias_grads[o] += up[o];
      }
      for (std::size_t k = 0; k < params.width; ++k) {
        const std::ptrdiff_t src_t = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(k) - pad;
        if (src_t < 0 || src_t >= static_cast<std::ptrdiff_t>(T)) continue;
        const double* src = &input(b, static_cast<std::size_t>(src_t), 0);
        double* gsrc = &grad_in(b, static_cast<std::size_t>(src_t), 0);
        for (std::size_t i = 0; i < in_c; ++i) {
          const std::size_t base = (k * in_c + i) * out_c;
          const double* w = &params.kernels[base];
          double acc = 0.0;
          for (std::size_t o = 0; o < out_c; ++o) acc += w[o] * up[o];
          gsrc[i] += acc;
          if (want_params) {
            double* gw = &params.kernel_grads[base];
            const double x = src[i];
            for (std::size_t o = 0; o < out_c; ++o) gw[o] += x * up[o];
          }
        }
      }
    }
  }
  return grad_in;
}

FeatureMap relu(const FeatureMap& input) {
  FeatureMap out = input;
  for (auto& v : out.data()) v = std::max(0.0, v);
  return out;
}

FeatureMap relu_backward(const FeatureMap& output, const FeatureMap& upstream_grad) {
  require_same_shape("relu_backward", output, upstream_grad);
  FeatureMap grad = upstream_grad;
  auto g = grad.data();
  auto y = output.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(y[i] > 0.0)) g[i] = 0.0;
  }
  return grad;
}

PoolResult maxpool_forward(const FeatureMap& input, std::size_t width, std::size_t stride) {
  if (width == 0) throw ArgumentError("maxpool_forward: width must be >= 1");
  if (stride == 0) throw ArgumentError("maxpool_forward: stride must be >= 1");
  if (input.time() < width) throw DimensionError("maxpool_forward", "time", width, input.time());

  const std::size_t T_out = (input.time() - width) / stride + 1;
  const std::size_t C = input.channels();
  PoolResult result{FeatureMap(input.batch(), T_out, C),
                    PoolIndices{input.batch(), input.time(), T_out, C, {}}};
  result.indices.source.resize(input.batch() * T_out * C);

  for (std::size_t b = 0; b < input.batch(); ++b) {
    for (std::size_t m = 0; m < T_out; ++m) {
      const std::size_t begin = m * stride;
      for (std::size_t c = 0; c < C; ++c) {
        std::size_t best = begin;
        double best_value = input(b, begin, c);
        for (std::size_t t = begin + 1; t < begin + width; ++t) {
          if (input(b, t, c) > best_value) {
            best_value = input(b, t, c);
            best = t;
          }
        }
        result.output(b, m, c) = best_value;
        result.indices.source[(b * T_out + m) * C + c] = best;
      }
    }
  }
  return result;
}

FeatureMap maxpool_backward(const PoolIndices& indices, const FeatureMap& upstream_grad) {
  require_same_shape("maxpool_backward",
                     FeatureMap(indices.batch, indices.output_time, indices.channels), upstream_grad);
  if (indices.source.size() != upstream_grad.size()) {
    throw InternalError("maxpool_backward: index table does not match pooled shape");
  }
  FeatureMap grad(indices.batch, indices.input_time, indices.channels);
  for (std::size_t b = 0; b < indices.batch; ++b) {
    for (std::size_t m = 0; m < indices.output_time; ++m) {
      for (std::size_t c = 0; c < indices.channels; ++c) {
        const std::size_t src = indices.source[(b * indices.output_time + m) * indices.channels + c];
        if (src >= indices.input_time) {
          throw InternalError("maxpool_backward: argmax index " + std::to_string(src) +
                              " out of range");
        }
        grad(b, src, c) += upstream_grad(b, m, c);
      }
    }
  }
  return grad;
}

FeatureMap upsample_forward(const FeatureMap& input, std::size_t factor) {
  if (factor == 0) throw ArgumentError("upsample_forward: factor must be >= 1");
  FeatureMap out(input.batch(), input.time() * factor, input.channels());
  for (std::size_t b = 0; b < input.batch(); ++b) {
    for (std::size_t t = 0; t < out.time(); ++t) {
      for (std::size_t c = 0; c < input.channels(); ++c) out(b, t, c) = input(b, t / factor, c);
    }
  }
  return out;
}

FeatureMap upsample_backward(const FeatureMap& upstream_grad, std::size_t factor) {
  if (factor == 0) throw ArgumentError("upsample_backward: factor must be >= 1");
  if (upstream_grad.time() % factor != 0) {
    throw DimensionError("upsample_backward", "time",
                         (upstream_grad.time() / factor) * factor, upstream_grad.time());
  }
  FeatureMap grad(upstream_grad.batch(), upstream_grad.time() / factor, upstream_grad.channels());
  for (std::size_t b = 0; b < grad.batch(); ++b) {
    for (std::size_t t = 0; t < upstream_grad.time(); ++t) {
      for (std::size_t c = 0; c < grad.channels(); ++c) grad(b, t / factor, c) += upstream_grad(b, t, c);
    }
  }
  return grad;
}

void DenseParams::validate() const {
  if (weights.size() != in * out) throw DimensionError("dense", "weights", in * out, weights.size());
  if (!bias.empty() && bias.size() != out) throw DimensionError("dense", "bias", out, bias.size());
  if (!weight_grads.empty() && weight_grads.size() != weights.size()) {
    throw DimensionError("dense", "weight_grad", weights.size(), weight_grads.size());
  }
  if (!bias_grads.empty() && bias_grads.size() != bias.size()) {
    throw DimensionError("dense", "bias_grad", bias.size(), bias_grads.size());
  }
}

std::vector<double> dense_forward(std::span<const double> input, const DenseParams& params) {
  params.validate();
  if (input.size() != params.in) throw DimensionError("dense_forward", "input", params.in, input.size());
  std::vector<double> out(params.out);
  for (std::size_t r = 0; r < params.out; ++r) {
    double acc = params.bias.empty() ? 0.0 : params.bias[r];
    const double* w = &params.weights[r * params.in];
    for (std::size_t i = 0; i < params.in; ++i) acc += w[i] * input[i];
    out[r] = acc;
  }
  return out;
}

std::vector<double> dense_backward(std::span<const double> input, const DenseParams& params,
                                   std::span<const double> upstream_grad) {
  params.validate();
  if (input.size() != params.in) throw DimensionError("dense_backward", "input", params.in, input.size());
  if (upstream_grad.size() != params.out) {
    throw DimensionError("dense_backward", "upstream", params.out, upstream_grad.size());
  }
  std::vector<double> grad_in(params.in, 0.0);
  for (std::size_t r = 0; r < params.out; ++r) {
    const double g = upstream_grad[r];
    const double* w = &params.weights[r * params.in];
    for (std::size_t i = 0; i < params.in; ++i) grad_in[i] += w[i] * g;
    if (!params.weight_grads.empty()) {
      double* gw = &params.weight_grads[r * params.in];
      for (std::size_t i = 0; i < params.in; ++i) gw[i] += input[i] * g;
    }
    if (!params.bias_grads.empty()) params.bias_grads[r] += g;
  }
  return grad_in;
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw ArgumentError("softmax: empty input");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - top);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

std::vector<double> softmax_backward(std::span<const double> probabilities,
                                     std::span<const double> upstream_grad) {
  if (probabilities.size() != upstream_grad.size()) {
    throw DimensionError("softmax_backward", "length", probabilities.size(), upstream_grad.size());
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) dot += probabilities[i] * upstream_grad[i];
  std::vector<double> grad(probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    grad[i] = probabilities[i] * (upstream_grad[i] - dot);
  }
  return grad;
}

}  // namespace abcd
