#include "abcd/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "abcd/errors.hpp"

namespace abcd {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant's algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

bool read_digits(std::string_view text, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
    value = value * 10 + (text[i] - '0');
  }
  out = value;
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

bool parse_real(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

std::int64_t parse_timestamp(std::string_view text) {
  text = trim(text);
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  const bool ok = read_digits(text, 0, 4, year) && text.size() >= 19 && text[4] == '-' &&
                  read_digits(text, 5, 2, month) && text[7] == '-' && read_digits(text, 8, 2, day) &&
                  (text[10] == 'T' || text[10] == ' ') && read_digits(text, 11, 2, hour) &&
                  text[13] == ':' && read_digits(text, 14, 2, minute) && text[16] == ':' &&
                  read_digits(text, 17, 2, second);
  if (!ok) throw ArgumentError("malformed timestamp '" + std::string(text) + "'");

  std::size_t pos = 19;
  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int scale = 100;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 3) millis += (text[pos] - '0') * scale;
      scale /= 10;
      ++digits;
      ++pos;
    }
    if (digits == 0) throw ArgumentError("malformed timestamp '" + std::string(text) + "'");
  }
  if (pos < text.size() && text[pos] == 'Z') ++pos;
  if (pos != text.size()) throw ArgumentError("malformed timestamp '" + std::string(text) + "'");

  static constexpr int kDaysInMonth[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12 || day < 1 || day > kDaysInMonth[month - 1] || hour > 23 ||
      minute > 59 || second > 59) {
    throw ArgumentError("timestamp out of range '" + std::string(text) + "'");
  }
  const std::int64_t days =
      days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  return ((days * 24 + hour) * 60 + minute) * 60000 + second * 1000 + millis;
}

std::string format_timestamp(std::int64_t millis) {
  std::int64_t days = millis / 86'400'000;
  std::int64_t rem = millis % 86'400'000;
  if (rem < 0) {
    rem += 86'400'000;
    --days;
  }
  std::int64_t year = 0;
  unsigned month = 0, day = 0;
  civil_from_days(days, year, month, day);
  const auto ms = static_cast<int>(rem % 1000);
  const auto secs = static_cast<int>(rem / 1000);
  char buf[40];
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d", static_cast<long long>(year),
                  month, day, secs / 3600, (secs / 60) % 60, secs % 60);
  } else {
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d.%03d",
                  static_cast<long long>(year), month, day, secs / 3600, (secs / 60) % 60, secs % 60,
                  ms);
  }
  return buf;
}

std::size_t SeriesFrame::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw SchemaError("unknown feature column '" + std::string(name) + "'", std::string(name));
}

const std::vector<double>& SeriesFrame::column(std::string_view name) const {
  return columns[column_index(name)];
}

std::vector<double>& SeriesFrame::column(std::string_view name) {
  return columns[column_index(name)];
}

SeriesFrame read_csv(std::istream& in, const std::vector<std::string>& schema,
                     const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header row");
  const auto header = split_fields(line);
  if (header.empty() || header[0] != "timestamp") {
    throw ParseError(source, 1, "header must start with 'timestamp'");
  }
  std::vector<std::size_t> positions;
  for (const auto& name : schema) {
    std::size_t pos = 0;
    for (std::size_t i = 1; i < header.size(); ++i) {
      if (header[i] == name) pos = i;
    }
    if (pos == 0) {
      throw SchemaError(source + ": missing feature column '" + name + "'", name);
    }
    positions.push_back(pos);
  }

  SeriesFrame frame;
  frame.names = schema;
  frame.columns.resize(schema.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    }
    std::int64_t instant = 0;
    try {
      instant = parse_timestamp(fields[0]);
    } catch (const ArgumentError& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!frame.instants.empty() && instant <= frame.instants.back()) {
      throw OrderingError(source + ":" + std::to_string(line_no) + ": timestamp " +
                          std::string(fields[0]) + " does not follow " + frame.timestamps.back());
    }
    for (std::size_t k = 0; k < positions.size(); ++k) {
      double value = 0.0;
      const auto field = fields[positions[k]];
      if (field.empty()) {
        throw ParseError(source, line_no, "empty value in column '" + schema[k] + "'");
      }
      if (!parse_real(field, value)) {
        throw ParseError(source, line_no,
                         "invalid number '" + std::string(field) + "' in column '" + schema[k] + "'");
      }
      frame.columns[k].push_back(value);
    }
    frame.timestamps.emplace_back(fields[0]);
    frame.instants.push_back(instant);
  }
  return frame;
}

SeriesFrame ingest_csv(const std::filesystem::path& path, const std::vector<std::string>& schema) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open data file '" + path.string() + "'");
  return read_csv(in, schema, path.string());
}

void write_csv(std::ostream& out, const SeriesFrame& frame) {
  out << "timestamp";
  for (const auto& n : frame.names) out << ',' << n;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    out << frame.timestamps[r];
    for (const auto& col : frame.columns) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, col[r]);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
}

void to_json(nlohmann::json& j, const StandardizationParams& params) {
  j = nlohmann::json{{"features", params.features},
                     {"mean", params.mean},
                     {"stddev", params.stddev},
                     {"epsilon", params.epsilon}};
}

void from_json(const nlohmann::json& j, StandardizationParams& params) {
  j.at("features").get_to(params.features);
  j.at("mean").get_to(params.mean);
  j.at("stddev").get_to(params.stddev);
  params.epsilon = j.value("epsilon", 1e-12);
  if (params.mean.size() != params.features.size() || params.stddev.size() != params.features.size()) {
    throw ConfigError("standardizer: feature, mean and stddev lengths differ");
  }
}

StandardizationParams fit_standardizer(const SeriesFrame& frame,
                                       const std::vector<std::string>& features,
                                       std::size_t row_begin, std::size_t row_end) {
  row_end = std::min(row_end, frame.rows());
  if (row_begin >= row_end) throw InsufficientDataError("fit_standardizer: no rows to fit");
  StandardizationParams params;
  params.features = features;
  const auto n = static_cast<double>(row_end - row_begin);
  for (const auto& name : features) {
    const auto& col = frame.column(name);
    // Shifting by the first value keeps a constant column's mean exact.
    const double pivot = col[row_begin];
    double shifted = 0.0;
    for (std::size_t r = row_begin; r < row_end; ++r) shifted += col[r] - pivot;
    const double mean = pivot + shifted / n;
    double sq = 0.0;
    for (std::size_t r = row_begin; r < row_end; ++r) sq += (col[r] - mean) * (col[r] - mean);
    params.mean.push_back(mean);
    params.stddev.push_back(std::max(std::sqrt(sq / n), params.epsilon));
  }
  return params;
}

SeriesFrame standardize(const SeriesFrame& frame, const StandardizationParams& params) {
  SeriesFrame out = frame;
  for (std::size_t k = 0; k < params.features.size(); ++k) {
    for (auto& v : out.column(params.features[k])) v = (v - params.mean[k]) / params.stddev[k];
  }
  return out;
}

SeriesFrame destandardize(const SeriesFrame& frame, const StandardizationParams& params) {
  SeriesFrame out = frame;
  for (std::size_t k = 0; k < params.features.size(); ++k) {
    for (auto& v : out.column(params.features[k])) v = v * params.stddev[k] + params.mean[k];
  }
  return out;
}

WindowSet WindowSet::subset(std::size_t first, std::size_t count) const {
  WindowSet out;
  out.windows = windows.slice(first, count);
  out.origins.assign(origins.begin() + static_cast<std::ptrdiff_t>(first),
                     origins.begin() + static_cast<std::ptrdiff_t>(first + count));
  out.length = length;
  out.stride = stride;
  return out;
}

std::size_t window_count(std::size_t rows, std::size_t length, std::size_t stride) {
  if (length == 0 || stride == 0 || rows < length) return 0;
  return (rows - length) / stride + 1;
}

WindowSet make_windows(const SeriesFrame& frame, const std::vector<std::string>& features,
                       std::size_t length, std::size_t stride) {
  if (length == 0) throw ArgumentError("make_windows: length must be positive");
  if (stride == 0) throw ArgumentError("make_windows: stride must be positive");
  if (frame.rows() < length) {
    throw InsufficientDataError("make_windows: " + std::to_string(frame.rows()) +
                                " rows cannot fill a window of " + std::to_string(length));
  }
  std::vector<const std::vector<double>*> cols;
  for (const auto& f : features) cols.push_back(&frame.column(f));

  const std::size_t count = window_count(frame.rows(), length, stride);
  WindowSet set;
  set.windows = FeatureMap(count, length, features.size());
  set.length = length;
  set.stride = stride;
  set.origins.resize(count);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t origin = w * stride;
    set.origins[w] = origin;
    for (std::size_t t = 0; t < length; ++t) {
      for (std::size_t c = 0; c < cols.size(); ++c) set.windows(w, t, c) = (*cols[c])[origin + t];
    }
  }
  return set;
}

SplitSizes split_sizes(std::size_t n, double train_fraction, double val_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0) || !(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ArgumentError("split fractions must lie in (0, 1)");
  }
  // The small bias keeps exact products such as 10 * (1 - 0.8) from flooring down.
  constexpr double kBias = 1e-9;
  auto floor_of = [](double x) { return static_cast<std::size_t>(std::floor(x + kBias)); };
  SplitSizes s;
  s.test = std::max<std::size_t>(1, floor_of(static_cast<double>(n) * (1.0 - train_fraction)));
  const std::size_t train_part = n > s.test ? n - s.test : 0;
  s.validation = std::max<std::size_t>(1, floor_of(static_cast<double>(train_part) * val_fraction));
  if (train_part <= s.validation) {
    throw InsufficientDataError("chrono_split: " + std::to_string(n) +
                                " windows cannot fill train, validation and test parts");
  }
  s.train = train_part - s.validation;
  return s;
}

DataSplit chrono_split(const WindowSet& windows, double train_fraction, double val_fraction,
                       bool purge_overlap) {
  const SplitSizes s = split_sizes(windows.size(), train_fraction, val_fraction);
  DataSplit split;
  split.train = windows.subset(0, s.train);

  auto take_after = [&](const WindowSet& previous, std::size_t first, std::size_t count) {
    std::size_t skip = 0;
    if (purge_overlap && previous.size() > 0) {
      const std::size_t boundary = previous.origins.back() + previous.length;
      while (skip < count && windows.origins[first + skip] < boundary) ++skip;
    }
    return windows.subset(first + skip, count - skip);
  };
  split.validation = take_after(split.train, s.train, s.validation);
  split.test = take_after(split.validation.size() > 0 ? split.validation : split.train,
                          s.train + s.validation, s.test);
  if (split.validation.size() == 0 || split.test.size() == 0) {
    throw InsufficientDataError("chrono_split: a part is empty after removing boundary-overlapping windows");
  }
  return split;
}

}  // namespace abcd
