#pragma once

// Attention-based convolutional autoencoder:
//   encoder: [conv + ReLU + maxpool] x 2
//   attention: additive scorer over bottleneck time positions
//   decoder: upsample + conv + ReLU, upsample + conv (linear output)

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "abcd/feature_map.hpp"
#include "abcd/layers.hpp"
#include "abcd/params.hpp"

namespace abcd {

struct NetworkSpec {
  std::size_t input_timesteps = 24;
  std::size_t input_channels = 2;
  std::array<std::size_t, 2> encoder_filters{16, 8};
  std::size_t kernel_width = 3;
  std::size_t pool_width = 2;
  std::size_t pool_stride = 2;
  std::size_t attention_hidden = 8;
  bool attention_enabled = true;

  /// Throws ConfigError unless the decoder mirror reproduces the input length.
  void validate() const;
  std::size_t pooled_length(std::size_t length) const;
  std::size_t bottleneck_timesteps() const;
  std::size_t bottleneck_channels() const { return encoder_filters[1]; }

  bool operator==(const NetworkSpec&) const = default;
};

void to_json(nlohmann::json& j, const NetworkSpec& spec);
void from_json(const nlohmann::json& j, NetworkSpec& spec);

/// Blocks named encoder.conv{1,2}.{kernel,bias}, attention.{weight,bias,vector}
/// (only when attention is enabled) and decoder.conv{1,2}.{kernel,bias}.
/// Weights are Glorot-uniform from `seed`; biases start at zero. Convolution
/// weights do not depend on whether attention is enabled.
ParamStore init_params(const NetworkSpec& spec, std::uint64_t seed);
/// Same layout as init_params, all zeros.
ParamStore zero_params(const NetworkSpec& spec);

/// Throws ConfigError if `params` does not have exactly the layout of `spec`.
void check_layout(const NetworkSpec& spec, const ParamStore& params);

ConvParams conv_view(ParamStore& params, const std::string& prefix);
ConvParams conv_view(const ParamStore& params, const std::string& prefix);

struct AttentionTrace {
  std::vector<double> scores;
  std::vector<double> weights;
};

struct AttentionResult {
  FeatureMap reweighted;
  std::vector<AttentionTrace> traces;  // one per window
};

FeatureMap encode(const FeatureMap& windows, const NetworkSpec& spec, const ParamStore& params);
/// z'_t = alpha_t * T_b * z_t with alpha = softmax(v . tanh(W z_t + b)).
AttentionResult attend(const FeatureMap& bottleneck, const NetworkSpec& spec,
                       const ParamStore& params);
FeatureMap decode(const FeatureMap& reweighted, const NetworkSpec& spec, const ParamStore& params);
/// encode, attend when enabled, decode.
FeatureMap reconstruct(const FeatureMap& windows, const NetworkSpec& spec, const ParamStore& params);

double mae_loss(const FeatureMap& reconstruction, const FeatureMap& target);
/// Each window's own mean absolute error.
std::vector<double> window_mae(const FeatureMap& reconstruction, const FeatureMap& target);

struct LossResult {
  double loss = 0.0;
  std::vector<double> window_errors;
};

/// Batch MAE and per-window errors; adds d(loss)/d(param) into the gradient slots.
LossResult forward_backward(const FeatureMap& batch, ParamStore& params, const NetworkSpec& spec);

}  // namespace abcd
