#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "abcd/detector.hpp"
#include "abcd/model.hpp"
#include "abcd/risk.hpp"
#include "abcd/trainer.hpp"

namespace abcd::cli {

inline constexpr int kReportFormatVersion = 1;

struct DataOptions {
  std::size_t stride = 1;
  double train_fraction = 0.8;
  double validation_fraction = 0.1;
};

struct DetectorOptions {
  std::size_t merge_gap = 0;
  std::size_t stride = 1;
  std::string monitored_column = "conductivity";
  AlarmLevels alarms;
};

struct CalibrationOptions {
  std::size_t bins = 10;
  double scale = 0.0;  // <= 0 selects the threshold's std_error
};

/// Merged, serializable view of every stage's options.
struct RunConfig {
  std::vector<std::string> features{"conductivity", "supply_temperature"};
  NetworkSpec network;
  TrainConfig training;
  DataOptions data;
  DetectorOptions detector;
  CalibrationOptions calibration;
  BandTable band_table = BandTable::defaults();
  RecommendationPolicy policy;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests. Arguments exclude the
/// program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abcd::cli
