#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "abcd/data.hpp"
#include "abcd/model.hpp"

namespace abcd {

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 42;
  bool attention_enabled = true;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& config);
void from_json(const nlohmann::json& j, TrainConfig& config);

/// Anomaly decision boundary: mean + one population std of training errors.
struct ThresholdSpec {
  double mean_error = 0.0;
  double std_error = 0.0;
  double threshold = 0.0;
  std::size_t population = 0;

  bool operator==(const ThresholdSpec&) const = default;
};

void to_json(nlohmann::json& j, const ThresholdSpec& spec);
void from_json(const nlohmann::json& j, ThresholdSpec& spec);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_mae = 0.0;
  double validation_mae = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double initial_train_mae = 0.0;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;
  double best_validation_mae = 0.0;
  std::optional<ThresholdSpec> threshold;
  double wall_seconds = 0.0;
};

void to_json(nlohmann::json& j, const TrainReport& report);

/// Stops once validation MAE has failed to improve `patience` epochs in a row.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  /// Records one epoch; returns true when this epoch is the new best.
  bool observe(std::size_t epoch, double validation_mae);
  bool should_stop() const noexcept { return stale_epochs_ >= patience_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_value() const noexcept { return best_value_; }

 private:
  std::size_t patience_;
  std::size_t stale_epochs_ = 0;
  std::size_t best_epoch_ = 0;
  double best_value_ = 0.0;
};

struct TrainResult {
  ParamStore params;
  TrainReport report;
};

/// Mini-batch Adam on batch MAE with early stopping; returns best-validation parameters.
/// spec.attention_enabled is taken from the config.
TrainResult train(NetworkSpec spec, ParamStore initial, const WindowSet& train_set,
                  const WindowSet& validation_set, const TrainConfig& config);

/// Per-window reconstruction MAE, evaluated in fixed-size chunks.
std::vector<double> window_errors(const NetworkSpec& spec, const ParamStore& params,
                                  const FeatureMap& windows);
double mean_error(const NetworkSpec& spec, const ParamStore& params, const FeatureMap& windows);

ThresholdSpec threshold_from_errors(std::span<const double> errors);
ThresholdSpec calibrate_threshold(const NetworkSpec& spec, const ParamStore& params,
                                  const WindowSet& train_set);

/// (worse - better) / worse * 100. Positive when `better` is lower; empty
/// when `worse` is zero and the change is undefined.
std::optional<double> percent_change(double worse, double better);

struct AblationArm {
  double test_mae = 0.0;
  std::size_t anomaly_count = 0;
  ThresholdSpec threshold;
  TrainReport report;
};

struct AblationReport {
  AblationArm with_attention;
  AblationArm without_attention;
  std::optional<double> mae_improvement_percent;
  std::optional<double> anomaly_reduction_percent;
};

void to_json(nlohmann::json& j, const AblationReport& report);

/// Trains both arms from the same seed and data, then scores the test split.
AblationReport ablation_run(const NetworkSpec& spec, const DataSplit& data, const TrainConfig& config);

}  // namespace abcd
