#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "abcd/detector.hpp"

namespace abcd {

/// Severity, probability and detection grades, each in [1, 5].
struct FmecaScore {
  int severity = 1;
  int probability = 1;
  int detection = 1;

  void validate() const;  // throws ValidationError
};

/// Risk priority rank S * P * D.
int rpr(const FmecaScore& score);

enum class RiskBand { Low, Medium, High };

std::string_view to_string(RiskBand band);
RiskBand band_from_string(std::string_view text);

struct BandRange {
  int lower = 1;  // inclusive
  int upper = 1;  // inclusive
  RiskBand band = RiskBand::Low;
};

/// Partition of [1, 125] into risk bands.
class BandTable {
 public:
  /// <= 25 low, 26..50 medium, > 50 high.
  static BandTable defaults();
  /// Throws ConfigError on gaps, overlaps or ranges outside [1, 125].
  explicit BandTable(std::vector<BandRange> ranges);

  RiskBand classify(int rpr) const;
  const std::vector<BandRange>& ranges() const noexcept { return ranges_; }

 private:
  std::vector<BandRange> ranges_;
};

void to_json(nlohmann::json& j, const BandTable& table);
BandTable band_table_from_json(const nlohmann::json& j);

struct EventStats {
  std::size_t high_spike = 0;
  std::size_t negative_glitch = 0;
  std::size_t other = 0;
  std::size_t total_events = 0;
  std::size_t span_samples = 0;
  std::size_t high_alarm_occurrences = 0;  // peak above alarm levels 1 & 2
  std::size_t trip_alarm_occurrences = 0;  // peak above alarm level 3
};

void to_json(nlohmann::json& j, const EventStats& stats);

EventStats aggregate_events(std::span<const AnomalyEvent> events, std::size_t span_samples,
                            const AlarmLevels& alarms = {});

/// Band-keyed maintenance action.
struct RecommendationPolicy {
  std::string low = "defer replacement; continue condition monitoring";
  std::string medium = "replace at next planned shutdown";
  std::string high = "replace immediately / trigger alarm response";

  const std::string& action(RiskBand band) const;
};

void to_json(nlohmann::json& j, const RecommendationPolicy& policy);
void from_json(const nlohmann::json& j, RecommendationPolicy& policy);

struct FmecaAssessment {
  FmecaScore score;
  int rpr = 0;
  RiskBand band = RiskBand::Low;
  std::string recommendation;
};

void to_json(nlohmann::json& j, const FmecaAssessment& assessment);

std::string recommend(const FmecaAssessment& assessment, const EventStats& stats,
                      const RecommendationPolicy& policy = {});

/// Validates the score, computes rank, band and recommendation.
FmecaAssessment assess(const FmecaScore& score, const EventStats& stats,
                       const BandTable& table = BandTable::defaults(),
                       const RecommendationPolicy& policy = {});

}  // namespace abcd
