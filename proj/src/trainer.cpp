#include "abcd/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "abcd/adam.hpp"
#include "abcd/errors.hpp"

namespace abcd {

namespace {

constexpr std::size_t kEvalChunk = 256;

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("training: batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("training: learning_rate must be positive");
  }
  if (max_epochs == 0) throw ConfigError("training: max_epochs must be positive");
  if (patience == 0) throw ConfigError("training: patience must be at least 1");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"batch_size", c.batch_size},   {"learning_rate", c.learning_rate},
                     {"max_epochs", c.max_epochs},   {"patience", c.patience},
                     {"seed", c.seed},               {"attention_enabled", c.attention_enabled}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.batch_size = j.value("batch_size", d.batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.max_epochs = j.value("max_epochs", d.max_epochs);
  c.patience = j.value("patience", d.patience);
  c.seed = j.value("seed", d.seed);
  c.attention_enabled = j.value("attention_enabled", d.attention_enabled);
}

void to_json(nlohmann::json& j, const ThresholdSpec& s) {
  j = nlohmann::json{{"mean_error", s.mean_error},
                     {"std_error", s.std_error},
                     {"threshold", s.threshold},
                     {"population", s.population}};
}

void from_json(const nlohmann::json& j, ThresholdSpec& s) {
  j.at("mean_error").get_to(s.mean_error);
  j.at("std_error").get_to(s.std_error);
  j.at("threshold").get_to(s.threshold);
  s.population = j.value("population", std::size_t{0});
}

void to_json(nlohmann::json& j, const TrainReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"train_mae", e.train_mae}, {"validation_mae", e.validation_mae}});
  }
  j = nlohmann::json{{"epochs", epochs},
                     {"initial_train_mae", r.initial_train_mae},
                     {"stopped_epoch", r.stopped_epoch},
                     {"best_epoch", r.best_epoch},
                     {"best_validation_mae", r.best_validation_mae},
                     {"wall_seconds", r.wall_seconds}};
  j["threshold"] = r.threshold ? nlohmann::json(*r.threshold) : nlohmann::json(nullptr);
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience_ == 0) throw ConfigError("early stopping: patience must be at least 1");
}

bool EarlyStopping::observe(std::size_t epoch, double validation_mae) {
  if (best_epoch_ == 0 || validation_mae < best_value_) {
    best_epoch_ = epoch;
    best_value_ = validation_mae;
    stale_epochs_ = 0;
    return true;
  }
  ++stale_epochs_;
  return false;
}

std::vector<double> window_errors(const NetworkSpec& spec, const ParamStore& params,
                                  const FeatureMap& windows) {
  std::vector<double> errors;
  errors.reserve(windows.batch());
  for (std::size_t first = 0; first < windows.batch(); first += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, windows.batch() - first);
    const FeatureMap chunk = windows.slice(first, count);
    const auto part = window_mae(reconstruct(chunk, spec, params), chunk);
    errors.insert(errors.end(), part.begin(), part.end());
  }
  return errors;
}

double mean_error(const NetworkSpec& spec, const ParamStore& params, const FeatureMap& windows) {
  if (windows.batch() == 0) throw InsufficientDataError("mean_error: no windows");
  const auto errors = window_errors(spec, params, windows);
  return std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
}

TrainResult train(NetworkSpec spec, ParamStore initial, const WindowSet& train_set,
                  const WindowSet& validation_set, const TrainConfig& config) {
  config.validate();
  spec.attention_enabled = config.attention_enabled;
  spec.validate();
  check_layout(spec, initial);
  if (train_set.size() == 0) throw InsufficientDataError("train: empty training set");
  if (validation_set.size() == 0) throw InsufficientDataError("train: empty validation set");

  const auto started = std::chrono::steady_clock::now();
  TrainResult result{std::move(initial), {}};
  ParamStore& params = result.params;
  params.zero_grads();
  TrainReport& report = result.report;
  report.initial_train_mae = mean_error(spec, params, train_set.windows);

  AdamState adam(AdamConfig{config.learning_rate});
  EarlyStopping stopper(config.patience);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ParamStore best = params;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size, ++batch_index) {
      const std::size_t count = std::min(config.batch_size, order.size() - first);
      const FeatureMap batch =
          train_set.windows.gather(std::span<const std::size_t>(order).subspan(first, count));
      params.zero_grads();
      LossResult step;
      try {
        step = forward_backward(batch, params, spec);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
      if (!std::isfinite(step.loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": loss is not finite");
      }
      adam_update(params, adam);
      loss_sum += step.loss * static_cast<double>(count);
    }

    EpochRecord record{epoch, loss_sum / static_cast<double>(order.size()),
                       mean_error(spec, params, validation_set.windows)};
    report.epochs.push_back(record);
    report.stopped_epoch = epoch;
    if (stopper.observe(epoch, record.validation_mae)) best = params;
    if (stopper.should_stop()) break;
  }

  params = std::move(best);
  params.zero_grads();
  report.best_epoch = stopper.best_epoch();
  report.best_validation_mae = stopper.best_value();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

ThresholdSpec threshold_from_errors(std::span<const double> errors) {
  if (errors.size() < 2) {
    throw InsufficientDataError("threshold calibration needs at least 2 training windows, got " +
                                std::to_string(errors.size()));
  }
  const auto n = static_cast<double>(errors.size());
  const double pivot = errors.front();
  double shifted = 0.0;
  for (double e : errors) shifted += e - pivot;
  const double mean = pivot + shifted / n;
  double sq = 0.0;
  for (double e : errors) sq += (e - mean) * (e - mean);
  ThresholdSpec spec;
  spec.mean_error = mean;
  spec.std_error = std::sqrt(sq / n);
  spec.threshold = spec.mean_error + spec.std_error;
  spec.population = errors.size();
  return spec;
}

ThresholdSpec calibrate_threshold(const NetworkSpec& spec, const ParamStore& params,
                                  const WindowSet& train_set) {
  if (train_set.size() < 2) {
    throw InsufficientDataError("threshold calibration needs at least 2 training windows, got " +
                                std::to_string(train_set.size()));
  }
  const auto errors = window_errors(spec, params, train_set.windows);
  return threshold_from_errors(errors);
}

std::optional<double> percent_change(double worse, double better) {
  if (worse == 0.0) {
    if (better == 0.0) return 0.0;
    return std::nullopt;
  }
  return (worse - better) / worse * 100.0;
}

void to_json(nlohmann::json& j, const AblationReport& r) {
  auto arm = [](const AblationArm& a) {
    return nlohmann::json{{"test_mae", a.test_mae},
                          {"anomaly_count", a.anomaly_count},
                          {"threshold", a.threshold},
                          {"best_epoch", a.report.best_epoch},
                          {"stopped_epoch", a.report.stopped_epoch}};
  };
  j = nlohmann::json{{"mae_split", "test"},
                     {"with_attention", arm(r.with_attention)},
                     {"without_attention", arm(r.without_attention)},
                     {"mae_improvement_percent", optional_number(r.mae_improvement_percent)},
                     {"anomaly_reduction_percent", optional_number(r.anomaly_reduction_percent)}};
}

AblationReport ablation_run(const NetworkSpec& spec, const DataSplit& data, const TrainConfig& config) {
  auto run_arm = [&](bool attention) {
    NetworkSpec arm_spec = spec;
    arm_spec.attention_enabled = attention;
    TrainConfig arm_config = config;
    arm_config.attention_enabled = attention;
    auto trained = train(arm_spec, init_params(arm_spec, config.seed), data.train, data.validation,
                         arm_config);
    AblationArm arm;
    arm.threshold = calibrate_threshold(arm_spec, trained.params, data.train);
    const auto errors = window_errors(arm_spec, trained.params, data.test.windows);
    arm.test_mae = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    arm.anomaly_count = static_cast<std::size_t>(std::count_if(
        errors.begin(), errors.end(), [&](double e) { return e > arm.threshold.threshold; }));
    trained.report.threshold = arm.threshold;
    arm.report = std::move(trained.report);
    return arm;
  };
  if (data.test.size() == 0) throw InsufficientDataError("ablation: empty test split");

  AblationReport report;
  report.with_attention = run_arm(true);
  report.without_attention = run_arm(false);
  report.mae_improvement_percent =
      percent_change(report.without_attention.test_mae, report.with_attention.test_mae);
  report.anomaly_reduction_percent =
      percent_change(static_cast<double>(report.without_attention.anomaly_count),
                     static_cast<double>(report.with_attention.anomaly_count));
  return report;
}

}  // namespace abcd
