#include "abcd/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "abcd/errors.hpp"

namespace abcd {

double error_to_probability(double mae, const ThresholdSpec& threshold, double scale) {
  if (!std::isfinite(mae)) throw NumericError("error_to_probability: non-finite reconstruction error");
  if (!(scale > 0.0)) scale = std::max(threshold.std_error, 1e-12);
  const double z = (mae - threshold.threshold) / scale;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t bin_index(double p, std::size_t num_bins) {
  if (num_bins == 0) throw ArgumentError("calibration: num_bins must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ArgumentError("calibration: probability " + std::to_string(p) + " outside [0, 1]");
  }
  const auto b = static_cast<double>(num_bins);
  auto k = static_cast<std::size_t>(std::floor(p * b));
  if (k >= num_bins) return num_bins - 1;
  // Keep the index consistent with edges computed as k / num_bins.
  if (k + 1 < num_bins && p >= static_cast<double>(k + 1) / b) ++k;
  if (k > 0 && p < static_cast<double>(k) / b) --k;
  return k;
}

void to_json(nlohmann::json& j, const CalibrationReport& r) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : r.bins) {
    bins.push_back({{"lower", b.lower},
                    {"upper", b.upper},
                    {"count", b.count},
                    {"mean_confidence", b.mean_confidence},
                    {"observed_frequency", b.observed_frequency}});
  }
  j = nlohmann::json{{"ece", r.ece}, {"total", r.total}, {"bins", bins}};
}

CalibrationReport expected_calibration_error(std::span<const ProbabilisticPrediction> predictions,
                                             std::size_t num_bins) {
  if (predictions.empty()) throw ArgumentError("calibration: empty prediction list");
  if (num_bins == 0) throw ArgumentError("calibration: num_bins must be at least 1");

  std::vector<double> confidence_sum(num_bins, 0.0);
  std::vector<double> residual_sum(num_bins, 0.0);
  std::vector<std::size_t> positives(num_bins, 0);
  CalibrationReport report;
  report.total = predictions.size();
  report.bins.resize(num_bins);
  for (const auto& p : predictions) {
    if (p.label != 0 && p.label != 1) {
      throw ArgumentError("calibration: label must be 0 or 1, got " + std::to_string(p.label));
    }
    const std::size_t k = bin_index(p.probability, num_bins);
    ++report.bins[k].count;
    confidence_sum[k] += p.probability;
    positives[k] += static_cast<std::size_t>(p.label);
    residual_sum[k] += static_cast<double>(p.label) - p.probability;
  }

  // sum_b (n_b/N)|acc_b - conf_b| written as sum_b |sum (y - p)| / N so the
  // cancellation happens per sample.
  double gap = 0.0;
  const auto b = static_cast<double>(num_bins);
  for (std::size_t k = 0; k < num_bins; ++k) {
    auto& bin = report.bins[k];
    bin.lower = static_cast<double>(k) / b;
    bin.upper = static_cast<double>(k + 1) / b;
    if (bin.count == 0) continue;
    const auto n = static_cast<double>(bin.count);
    bin.mean_confidence = confidence_sum[k] / n;
    bin.observed_frequency = static_cast<double>(positives[k]) / n;
    gap += std::abs(residual_sum[k]);
  }
  report.ece = gap / static_cast<double>(report.total);
  return report;
}

std::vector<ReliabilityPoint> reliability_points(const CalibrationReport& report) {
  std::vector<ReliabilityPoint> points;
  for (const auto& bin : report.bins) {
    if (bin.count == 0) continue;
    points.push_back({bin.mean_confidence, bin.observed_frequency, bin.count});
  }
  return points;
}

}  // namespace abcd
