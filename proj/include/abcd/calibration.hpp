#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "abcd/trainer.hpp"

namespace abcd {

struct ProbabilisticPrediction {
  double probability = 0.0;
  int label = 0;
};

/// logistic((mae - threshold) / scale). A non-positive scale selects the
/// threshold's std_error floored at 1e-12.
double error_to_probability(double mae, const ThresholdSpec& threshold, double scale = 0.0);

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;  // exclusive except for the last bin
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double observed_frequency = 0.0;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double ece = 0.0;
  std::size_t total = 0;
};

void to_json(nlohmann::json& j, const CalibrationReport& report);

/// Index of the equal-width bin holding p; the last bin is closed.
std::size_t bin_index(double probability, std::size_t num_bins);

/// Equal-width binning over [0, 1]; observed frequency is the positive-label rate.
CalibrationReport expected_calibration_error(std::span<const ProbabilisticPrediction> predictions,
                                             std::size_t num_bins = 10);

struct ReliabilityPoint {
  double confidence = 0.0;
  double frequency = 0.0;
  std::size_t count = 0;
};

/// One point per non-empty bin, in bin order.
std::vector<ReliabilityPoint> reliability_points(const CalibrationReport& report);

}  // namespace abcd
