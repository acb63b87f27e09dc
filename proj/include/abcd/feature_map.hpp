#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace abcd {

/// Dense rank-3 array laid out batch-major, then time, then channel.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t batch, std::size_t time, std::size_t channels, double fill = 0.0);
  FeatureMap(std::size_t batch, std::size_t time, std::size_t channels, std::vector<double> data);

  std::size_t batch() const noexcept { return batch_; }
  std::size_t time() const noexcept { return time_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t b, std::size_t t, std::size_t c) noexcept {
    return data_[(b * time_ + t) * channels_ + c];
  }
  const double& operator()(std::size_t b, std::size_t t, std::size_t c) const noexcept {
    return data_[(b * time_ + t) * channels_ + c];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  /// Contiguous (time x channel) slab of one batch entry.
  std::span<double> window(std::size_t b) noexcept;
  std::span<const double> window(std::size_t b) const noexcept;

  bool same_shape(const FeatureMap& other) const noexcept {
    return batch_ == other.batch_ && time_ == other.time_ && channels_ == other.channels_;
  }
  bool all_finite() const noexcept;

  /// Copy of batch entries [first, first + count).
  FeatureMap slice(std::size_t first, std::size_t count) const;
  /// Batch made of the listed entries, in the listed order.
  FeatureMap gather(std::span<const std::size_t> indices) const;

  bool operator==(const FeatureMap&) const = default;

 private:
  std::size_t batch_ = 0;
  std::size_t time_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

/// Throws DimensionError naming the first axis on which `actual` differs.
void require_same_shape(const char* where, const FeatureMap& expected, const FeatureMap& actual);

}  // namespace abcd
