#pragma once

// Differentiable layer primitives over FeatureMap. Forward functions are pure;
// backward functions return the input gradient and add parameter gradients
// into the slots referenced by the parameter view.

#include <cstddef>
#include <span>
#include <vector>

#include "abcd/feature_map.hpp"

namespace abcd {

/// View of a same-padded 1-D convolution's weights and gradient slots.
/// kernels is laid out (tap, in_channel, out_channel).
struct ConvParams {
  std::size_t width = 0;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::span<const double> kernels;
  std::span<const double> biases;
  std::span<double> kernel_grads;
  std::span<double> bias_grads;

  /// Throws ArgumentError/DimensionError when the view is inconsistent.
  void validate() const;
};

FeatureMap conv1d_forward(const FeatureMap& input, const ConvParams& params, bool activate);

/// Gradient of the linear part of conv1d_forward. Use relu_backward first
/// when the forward pass was activated.
FeatureMap conv1d_backward(const FeatureMap& input, const ConvParams& params,
                           const FeatureMap& upstream_grad);

FeatureMap relu(const FeatureMap& input);
/// `output` is the post-ReLU forward value.
FeatureMap relu_backward(const FeatureMap& output, const FeatureMap& upstream_grad);

/// Winning input time index for every pooled element.
struct PoolIndices {
  std::size_t batch = 0;
  std::size_t input_time = 0;
  std::size_t output_time = 0;
  std::size_t channels = 0;
  std::vector<std::size_t> source;
};

struct PoolResult {
  FeatureMap output;
  PoolIndices indices;
};

/// Output length floor((T - width) / stride) + 1; ties go to the lowest index.
PoolResult maxpool_forward(const FeatureMap& input, std::size_t width, std::size_t stride);
FeatureMap maxpool_backward(const PoolIndices& indices, const FeatureMap& upstream_grad);

/// Nearest-neighbour repetition along time.
FeatureMap upsample_forward(const FeatureMap& input, std::size_t factor);
FeatureMap upsample_backward(const FeatureMap& upstream_grad, std::size_t factor);

/// Affine map W x + b with W stored (out, in) row-major. An empty bias means none.
struct DenseParams {
  std::size_t in = 0;
  std::size_t out = 0;
  std::span<const double> weights;
  std::span<const double> bias;
  std::span<double> weight_grads;
  std::span<double> bias_grads;

  void validate() const;
};

std::vector<double> dense_forward(std::span<const double> input, const DenseParams& params);
std::vector<double> dense_backward(std::span<const double> input, const DenseParams& params,
                                   std::span<const double> upstream_grad);

std::vector<double> softmax(std::span<const double> scores);
/// Vector-Jacobian product of softmax given its output.
std::vector<double> softmax_backward(std::span<const double> probabilities,
                                     std::span<const double> upstream_grad);

}  // namespace abcd
