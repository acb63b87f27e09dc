#include "abcd/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "abcd/errors.hpp"

namespace abcd {

namespace {

constexpr const char* kEnc1 = "encoder.conv1";
constexpr const char* kEnc2 = "encoder.conv2";
constexpr const char* kDec1 = "decoder.conv1";
constexpr const char* kDec2 = "decoder.conv2";
constexpr const char* kAttnWeight = "attention.weight";
constexpr const char* kAttnBias = "attention.bias";
constexpr const char* kAttnVector = "attention.vector";

struct BlockShape {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t fan_in;
  std::size_t fan_out;
  bool is_bias;
};

std::vector<BlockShape> layout(const NetworkSpec& spec) {
  const std::size_t k = spec.kernel_width;
  const std::size_t c = spec.input_channels;
  const std::size_t f1 = spec.encoder_filters[0];
  const std::size_t f2 = spec.encoder_filters[1];
  const std::size_t h = spec.attention_hidden;
  std::vector<BlockShape> out;
  auto conv = [&](const std::string& prefix, std::size_t in, std::size_t outc) {
    out.push_back({prefix + ".kernel", {k, in, outc}, k * in, k * outc, false});
    out.push_back({prefix + ".bias", {outc}, 0, 0, true});
  };
  conv(kEnc1, c, f1);
  conv(kEnc2, f1, f2);
  if (spec.attention_enabled) {
    out.push_back({kAttnWeight, {h, f2}, f2, h, false});
    out.push_back({kAttnBias, {h}, 0, 0, true});
    out.push_back({kAttnVector, {1, h}, h, 1, false});
  }
  conv(kDec1, f2, f1);
  conv(kDec2, f1, c);
  return out;
}

void require_finite(const FeatureMap& m, const char* layer) {
  if (!m.all_finite()) throw NumericError(std::string("non-finite value produced by ") + layer);
}

DenseParams scorer_view(const ParamStore& params, const NetworkSpec& spec) {
  const auto& w = params.at(kAttnWeight);
  const auto& b = params.at(kAttnBias);
  return DenseParams{spec.bottleneck_channels(), spec.attention_hidden, w.values, b.values, {}, {}};
}

DenseParams scorer_view(ParamStore& params, const NetworkSpec& spec) {
  auto& w = params.at(kAttnWeight);
  auto& b = params.at(kAttnBias);
  return DenseParams{spec.bottleneck_channels(), spec.attention_hidden, w.values, b.values,
                     w.grads, b.grads};
}

// Per-window hidden activations tanh(W z_t + b), laid out (t, hidden).
struct AttentionCache {
  std::vector<std::vector<double>> hidden;
  std::vector<AttentionTrace> traces;
};

AttentionResult attend_impl(const FeatureMap& bottleneck, const NetworkSpec& spec,
                            const ParamStore& params, AttentionCache* cache) {
  const std::size_t T = bottleneck.time();
  const std::size_t C = bottleneck.channels();
  const std::size_t H = spec.attention_hidden;
  if (C != spec.bottleneck_channels()) {
    throw DimensionError("attend", "channels", spec.bottleneck_channels(), C);
  }
  const DenseParams scorer = scorer_view(params, spec);
  const auto& v = params.at(kAttnVector).values;

  AttentionResult result{FeatureMap(bottleneck.batch(), T, C), {}};
  result.traces.resize(bottleneck.batch());
  if (cache) cache->hidden.resize(bottleneck.batch());

  for (std::size_t b = 0; b < bottleneck.batch(); ++b) {
    std::vector<double> hidden(T * H);
    std::vector<double> scores(T);
    for (std::size_t t = 0; t < T; ++t) {
      std::span<const double> z(&bottleneck(b, t, 0), C);
      auto pre = dense_forward(z, scorer);
      double e = 0.0;
      for (std::size_t j = 0; j < H; ++j) {
        const double a = std::tanh(pre[j]);
        hidden[t * H + j] = a;
        e += v[j] * a;
      }
      scores[t] = e;
    }
    auto weights = softmax(scores);
    const double scale = static_cast<double>(T);
    for (std::size_t t = 0; t < T; ++t) {
      const double factor = weights[t] * scale;
      for (std::size_t c = 0; c < C; ++c) result.reweighted(b, t, c) = factor * bottleneck(b, t, c);
    }
    result.traces[b] = AttentionTrace{std::move(scores), std::move(weights)};
    if (cache) cache->hidden[b] = std::move(hidden);
  }
  require_finite(result.reweighted, "attention");
  return result;
}

struct Trace {
  FeatureMap enc1;
  PoolResult pool1;
  FeatureMap enc2;
  PoolResult pool2;
  AttentionCache attention;
  FeatureMap reweighted;
  FeatureMap up1;
  FeatureMap dec1;
  FeatureMap up2;
  FeatureMap output;
};

void check_input(const FeatureMap& windows, const NetworkSpec& spec, const char* where) {
  if (windows.time() != spec.input_timesteps) {
    throw DimensionError(where, "time", spec.input_timesteps, windows.time());
  }
  if (windows.channels() != spec.input_channels) {
    throw DimensionError(where, "channels", spec.input_channels, windows.channels());
  }
}

Trace encode_trace(const FeatureMap& windows, const NetworkSpec& spec, const ParamStore& params) {
  check_input(windows, spec, "encode");
  Trace tr;
  tr.enc1 = conv1d_forward(windows, conv_view(params, kEnc1), true);
  require_finite(tr.enc1, kEnc1);
  tr.pool1 = maxpool_forward(tr.enc1, spec.pool_width, spec.pool_stride);
  tr.enc2 = conv1d_forward(tr.pool1.output, conv_view(params, kEnc2), true);
  require_finite(tr.enc2, kEnc2);
  tr.pool2 = maxpool_forward(tr.enc2, spec.pool_width, spec.pool_stride);
  return tr;
}

void check_bottleneck(const FeatureMap& m, const NetworkSpec& spec, const char* where) {
  if (m.time() != spec.bottleneck_timesteps()) {
    throw DimensionError(where, "time", spec.bottleneck_timesteps(), m.time());
  }
  if (m.channels() != spec.bottleneck_channels()) {
    throw DimensionError(where, "channels", spec.bottleneck_channels(), m.channels());
  }
}

void decode_into(Trace& tr, const NetworkSpec& spec, const ParamStore& params) {
  check_bottleneck(tr.reweighted, spec, "decode");
  tr.up1 = upsample_forward(tr.reweighted, spec.pool_stride);
  tr.dec1 = conv1d_forward(tr.up1, conv_view(params, kDec1), true);
  require_finite(tr.dec1, kDec1);
  tr.up2 = upsample_forward(tr.dec1, spec.pool_stride);
  tr.output = conv1d_forward(tr.up2, conv_view(params, kDec2), false);
  require_finite(tr.output, kDec2);
}

Trace full_trace(const FeatureMap& windows, const NetworkSpec& spec, const ParamStore& params) {
  Trace tr = encode_trace(windows, spec, params);
  if (spec.attention_enabled) {
    auto attended = attend_impl(tr.pool2.output, spec, params, &tr.attention);
    tr.reweighted = std::move(attended.reweighted);
    tr.attention.traces = std::move(attended.traces);
  } else {
    tr.reweighted = tr.pool2.output;
  }
  decode_into(tr, spec, params);
  return tr;
}

FeatureMap attention_backward(const Trace& tr, const NetworkSpec& spec, ParamStore& params,
                              const FeatureMap& grad_out) {
  const FeatureMap& z = tr.pool2.output;
  const std::size_t T = z.time();
  const std::size_t C = z.channels();
  const std::size_t H = spec.attention_hidden;
  const double scale = static_cast<double>(T);
  const DenseParams scorer = scorer_view(params, spec);
  auto& vector_block = params.at(kAttnVector);

  FeatureMap grad_z(z.batch(), T, C);
  for (std::size_t b = 0; b < z.batch(); ++b) {
    const auto& alpha = tr.attention.traces[b].weights;
    const auto& hidden = tr.attention.hidden[b];
    std::vector<double> grad_alpha(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      double dot = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        grad_z(b, t, c) += alpha[t] * scale * grad_out(b, t, c);
        dot += grad_out(b, t, c) * z(b, t, c);
      }
      grad_alpha[t] = scale * dot;
    }
    const auto grad_scores = softmax_backward(alpha, grad_alpha);
    std::vector<double> grad_pre(H);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < H; ++j) {
        const double a = hidden[t * H + j];
        vector_block.grads[j] += grad_scores[t] * a;
        grad_pre[j] = grad_scores[t] * vector_block.values[j] * (1.0 - a * a);
      }
      std::span<const double> zt(&z(b, t, 0), C);
      const auto gz = dense_backward(zt, scorer, grad_pre);
      for (std::size_t c = 0; c < C; ++c) grad_z(b, t, c) += gz[c];
    }
  }
  return grad_z;
}

}  // namespace

void NetworkSpec::validate() const {
  if (input_timesteps == 0) throw ConfigError("network: input_timesteps must be positive");
  if (input_channels == 0) throw ConfigError("network: input_channels must be positive");
  if (encoder_filters[0] == 0 || encoder_filters[1] == 0) {
    throw ConfigError("network: encoder filter counts must be positive");
  }
  if (kernel_width == 0 || kernel_width % 2 == 0) {
    throw ConfigError("network: kernel_width must be odd, got " + std::to_string(kernel_width));
  }
  if (pool_width == 0 || pool_stride == 0) {
    throw ConfigError("network: pool width and stride must be positive");
  }
  if (attention_enabled && attention_hidden == 0) {
    throw ConfigError("network: attention_hidden must be positive when attention is enabled");
  }
  if (input_timesteps < pool_width || pooled_length(input_timesteps) < pool_width) {
    throw ConfigError("network: input_timesteps " + std::to_string(input_timesteps) +
                      " too short for two pooling stages");
  }
  const std::size_t restored = bottleneck_timesteps() * pool_stride * pool_stride;
  if (restored != input_timesteps) {
    throw ConfigError("network: decoder mirror restores " + std::to_string(restored) +
                      " timesteps instead of " + std::to_string(input_timesteps) +
                      " (input_timesteps must be divisible by the pool factor squared)");
  }
}

std::size_t NetworkSpec::pooled_length(std::size_t length) const {
  if (length < pool_width || pool_stride == 0) return 0;
  return (length - pool_width) / pool_stride + 1;
}

std::size_t NetworkSpec::bottleneck_timesteps() const {
  return pooled_length(pooled_length(input_timesteps));
}

void to_json(nlohmann::json& j, const NetworkSpec& spec) {
  j = nlohmann::json{{"input_timesteps", spec.input_timesteps},
                     {"input_channels", spec.input_channels},
                     {"encoder_filters", spec.encoder_filters},
                     {"kernel_width", spec.kernel_width},
                     {"pool_width", spec.pool_width},
                     {"pool_stride", spec.pool_stride},
                     {"attention_hidden", spec.attention_hidden},
                     {"attention_enabled", spec.attention_enabled}};
}

void from_json(const nlohmann::json& j, NetworkSpec& spec) {
  NetworkSpec d;
  spec.input_timesteps = j.value("input_timesteps", d.input_timesteps);
  spec.input_channels = j.value("input_channels", d.input_channels);
  spec.encoder_filters = j.value("encoder_filters", d.encoder_filters);
  spec.kernel_width = j.value("kernel_width", d.kernel_width);
  spec.pool_width = j.value("pool_width", d.pool_width);
  spec.pool_stride = j.value("pool_stride", d.pool_stride);
  spec.attention_hidden = j.value("attention_hidden", d.attention_hidden);
  spec.attention_enabled = j.value("attention_enabled", d.attention_enabled);
}

ParamStore zero_params(const NetworkSpec& spec) {
  spec.validate();
  ParamStore store;
  for (const auto& b : layout(spec)) store.add(b.name, b.shape);
  return store;
}

ParamStore init_params(const NetworkSpec& spec, std::uint64_t seed) {
  ParamStore store = zero_params(spec);
  // Attention blocks draw from their own stream so the convolution weights
  // are identical with and without attention for the same seed.
  std::mt19937_64 conv_rng(seed);
  std::mt19937_64 attention_rng(seed ^ 0x9E3779B97F4A7C15ULL);
  const auto shapes = layout(spec);
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    if (shapes[k].is_bias) continue;
    const double limit =
        std::sqrt(6.0 / static_cast<double>(shapes[k].fan_in + shapes[k].fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto& rng = shapes[k].name.starts_with("attention.") ? attention_rng : conv_rng;
    for (auto& v : store.blocks()[k].values) v = dist(rng);
  }
  return store;
}

void check_layout(const NetworkSpec& spec, const ParamStore& params) {
  const auto shapes = layout(spec);
  if (shapes.size() != params.blocks().size()) {
    throw ConfigError("parameter store has " + std::to_string(params.blocks().size()) +
                      " blocks, network expects " + std::to_string(shapes.size()));
  }
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const auto& block = params.blocks()[k];
    if (block.name != shapes[k].name || block.shape != shapes[k].shape) {
      throw ConfigError("parameter block '" + block.name + "' does not match network block '" +
                        shapes[k].name + "'");
    }
  }
}

ConvParams conv_view(ParamStore& params, const std::string& prefix) {
  auto& kernel = params.at(prefix + ".kernel");
  auto& bias = params.at(prefix + ".bias");
  return ConvParams{kernel.shape.at(0), kernel.shape.at(1), kernel.shape.at(2),
                    kernel.values,      bias.values,        kernel.grads,
                    bias.grads};
}

ConvParams conv_view(const ParamStore& params, const std::string& prefix) {
  const auto& kernel = params.at(prefix + ".kernel");
  const auto& bias = params.at(prefix + ".bias");
  return ConvParams{kernel.shape.at(0), kernel.shape.at(1), kernel.shape.at(2), kernel.values,
                    bias.values,        {},                 {}};
}

FeatureMap encode(const FeatureMap& windows, const NetworkSpec& spec, const ParamStore& params) {
  return encode_trace(windows, spec, params).pool2.output;
}

AttentionResult attend(const FeatureMap& bottleneck, const NetworkSpec& spec,
                       const ParamStore& params) {
  if (!spec.attention_enabled) throw ArgumentError("attend: attention is disabled in this network");
  check_bottleneck(bottleneck, spec, "attend");
  return attend_impl(bottleneck, spec, params, nullptr);
}

FeatureMap decode(const FeatureMap& reweighted, const NetworkSpec& spec, const ParamStore& params) {
  Trace tr;
  tr.reweighted = reweighted;
  decode_into(tr, spec, params);
  return std::move(tr.output);
}

FeatureMap reconstruct(const FeatureMap& windows, const NetworkSpec& spec, const ParamStore& params) {
  return full_trace(windows, spec, params).output;
}

double mae_loss(const FeatureMap& reconstruction, const FeatureMap& target) {
  require_same_shape("mae_loss", target, reconstruction);
  if (target.size() == 0) throw ArgumentError("mae_loss: empty arrays");
  const auto a = reconstruction.data();
  const auto b = target.data();
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total / static_cast<double>(a.size());
}

std::vector<double> window_mae(const FeatureMap& reconstruction, const FeatureMap& target) {
  require_same_shape("window_mae", target, reconstruction);
  const std::size_t n = target.time() * target.channels();
  if (n == 0) throw ArgumentError("window_mae: empty windows");
  std::vector<double> errors(target.batch());
  for (std::size_t b = 0; b < target.batch(); ++b) {
    const auto a = reconstruction.window(b);
    const auto y = target.window(b);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::abs(a[i] - y[i]);
    errors[b] = total / static_cast<double>(n);
  }
  return errors;
}

LossResult forward_backward(const FeatureMap& batch, ParamStore& params, const NetworkSpec& spec) {
  const Trace tr = full_trace(batch, spec, params);

  LossResult result;
  result.window_errors = window_mae(tr.output, batch);
  result.loss = mae_loss(tr.output, batch);

  FeatureMap grad(batch.batch(), batch.time(), batch.channels());
  {
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    auto g = grad.data();
    const auto y = tr.output.data();
    const auto x = batch.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = y[i] - x[i];
      g[i] = d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0);
    }
  }

  grad = conv1d_backward(tr.up2, conv_view(params, kDec2), grad);
  grad = upsample_backward(grad, spec.pool_stride);
  grad = relu_backward(tr.dec1, grad);
  grad = conv1d_backward(tr.up1, conv_view(params, kDec1), grad);
  grad = upsample_backward(grad, spec.pool_stride);
  if (spec.attention_enabled) grad = attention_backward(tr, spec, params, grad);
  grad = maxpool_backward(tr.pool2.indices, grad);
  grad = relu_backward(tr.enc2, grad);
  grad = conv1d_backward(tr.pool1.output, conv_view(params, kEnc2), grad);
  grad = maxpool_backward(tr.pool1.indices, grad);
  grad = relu_backward(tr.enc1, grad);
  conv1d_backward(batch, conv_view(params, kEnc1), grad);

  for (const auto& block : params.blocks()) {
    for (double g : block.grads) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + block.name);
    }
  }
  return result;
}

}  // namespace abcd
