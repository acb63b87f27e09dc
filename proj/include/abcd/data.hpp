#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "abcd/feature_map.hpp"

namespace abcd {

/// Milliseconds since 1970-01-01T00:00:00 (UTC, no leap seconds).
/// Accepts YYYY-MM-DD[T| ]HH:MM:SS[.fff][Z]; throws ArgumentError otherwise.
std::int64_t parse_timestamp(std::string_view text);
/// Inverse of parse_timestamp; milliseconds are printed only when non-zero.
std::string format_timestamp(std::int64_t millis);

/// Timestamped multivariate series with named real columns of equal length.
struct SeriesFrame {
  std::vector<std::string> timestamps;
  std::vector<std::int64_t> instants;  // parsed timestamps, strictly increasing
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const noexcept { return timestamps.size(); }
  std::size_t column_index(std::string_view name) const;  // throws SchemaError
  const std::vector<double>& column(std::string_view name) const;
  std::vector<double>& column(std::string_view name);
};

/// Reads `timestamp,<feature>...` CSV keeping the `schema` columns in schema order.
SeriesFrame read_csv(std::istream& in, const std::vector<std::string>& schema,
                     const std::string& source = "<stream>");
SeriesFrame ingest_csv(const std::filesystem::path& path, const std::vector<std::string>& schema);
void write_csv(std::ostream& out, const SeriesFrame& frame);

/// Training-set column statistics (population standard deviation).
struct StandardizationParams {
  std::vector<std::string> features;
  std::vector<double> mean;
  std::vector<double> stddev;
  double epsilon = 1e-12;

  bool operator==(const StandardizationParams&) const = default;
};

void to_json(nlohmann::json& j, const StandardizationParams& params);
void from_json(const nlohmann::json& j, StandardizationParams& params);

/// Fits on rows [row_begin, row_end). Constant columns keep their value as
/// mean and get stddev = epsilon.
StandardizationParams fit_standardizer(const SeriesFrame& frame,
                                       const std::vector<std::string>& features,
                                       std::size_t row_begin = 0,
                                       std::size_t row_end = std::numeric_limits<std::size_t>::max());
SeriesFrame standardize(const SeriesFrame& frame, const StandardizationParams& params);
SeriesFrame destandardize(const SeriesFrame& frame, const StandardizationParams& params);

struct WindowSet {
  FeatureMap windows;                // (count, length, features)
  std::vector<std::size_t> origins;  // first source row of each window
  std::size_t length = 0;
  std::size_t stride = 1;

  std::size_t size() const noexcept { return origins.size(); }
  WindowSet subset(std::size_t first, std::size_t count) const;
};

/// floor((rows - length) / stride) + 1 windows; a trailing partial window is dropped.
std::size_t window_count(std::size_t rows, std::size_t length, std::size_t stride);
WindowSet make_windows(const SeriesFrame& frame, const std::vector<std::string>& features,
                       std::size_t length, std::size_t stride = 1);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

/// test = floor(n (1 - train_fraction)), validation = floor(train_part * val_fraction),
/// each raised to at least one; the remainder trains.
SplitSizes split_sizes(std::size_t n, double train_fraction, double val_fraction);

struct DataSplit {
  WindowSet train;
  WindowSet validation;
  WindowSet test;
};

/// Chronological split in window order. With `purge_overlap`, leading
/// validation/test windows that share rows with the previous part are dropped.
DataSplit chrono_split(const WindowSet& windows, double train_fraction = 0.8,
                       double val_fraction = 0.1, bool purge_overlap = true);

}  // namespace abcd
