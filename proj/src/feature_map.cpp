#include "abcd/feature_map.hpp"

#include <algorithm>
#include <cmath>

#include "abcd/errors.hpp"

namespace abcd {

FeatureMap::FeatureMap(std::size_t batch, std::size_t time, std::size_t channels, double fill)
    : batch_(batch), time_(time), channels_(channels), data_(batch * time * channels, fill) {}

FeatureMap::FeatureMap(std::size_t batch, std::size_t time, std::size_t channels,
                       std::vector<double> data)
    : batch_(batch), time_(time), channels_(channels), data_(std::move(data)) {
  if (data_.size() != batch_ * time_ * channels_) {
    throw DimensionError("FeatureMap", "data", batch_ * time_ * channels_, data_.size());
  }
}

std::span<double> FeatureMap::window(std::size_t b) noexcept {
  return std::span<double>(data_).subspan(b * time_ * channels_, time_ * channels_);
}

std::span<const double> FeatureMap::window(std::size_t b) const noexcept {
  return std::span<const double>(data_).subspan(b * time_ * channels_, time_ * channels_);
}

bool FeatureMap::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

FeatureMap FeatureMap::slice(std::size_t first, std::size_t count) const {
  if (first + count > batch_) {
    throw DimensionError("FeatureMap::slice", "batch", batch_, first + count);
  }
  const std::size_t stride = time_ * channels_;
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(first * stride),
                          data_.begin() + static_cast<std::ptrdiff_t>((first + count) * stride));
  return FeatureMap(count, time_, channels_, std::move(out));
}

FeatureMap FeatureMap::gather(std::span<const std::size_t> indices) const {
  FeatureMap out(indices.size(), time_, channels_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= batch_) {
      throw DimensionError("FeatureMap::gather", "batch", batch_, indices[i]);
    }
    const auto src = window(indices[i]);
    std::copy(src.begin(), src.end(), out.window(i).begin());
  }
  return out;
}

void require_same_shape(const char* where, const FeatureMap& expected, const FeatureMap& actual) {
  if (expected.batch() != actual.batch()) {
    throw DimensionError(where, "batch", expected.batch(), actual.batch());
  }
  if (expected.time() != actual.time()) {
    throw DimensionError(where, "time", expected.time(), actual.time());
  }
  if (expected.channels() != actual.channels()) {
    throw DimensionError(where, "channels", expected.channels(), actual.channels());
  }
}

}  // namespace abcd
