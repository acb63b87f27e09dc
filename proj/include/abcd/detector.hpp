#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "abcd/data.hpp"
#include "abcd/model.hpp"
#include "abcd/trainer.hpp"

namespace abcd {

struct ScoredWindow {
  std::size_t origin = 0;
  double error = 0.0;
  bool is_anomalous = false;

  bool operator==(const ScoredWindow&) const = default;
};

/// Strict rule: anomalous iff error > threshold.
std::vector<ScoredWindow> label_errors(std::span<const std::size_t> origins,
                                       std::span<const double> errors,
                                       const ThresholdSpec& threshold);
std::vector<ScoredWindow> score(const WindowSet& windows, const NetworkSpec& spec,
                                const ParamStore& params, const ThresholdSpec& threshold);

enum class EventCategory { HighSpike, NegativeGlitch, Other };

std::string_view to_string(EventCategory category);
EventCategory category_from_string(std::string_view text);

struct AnomalyEvent {
  std::size_t id = 0;
  std::size_t start = 0;  // origin of the first member window
  std::size_t end = 0;    // origin of the last member window, inclusive
  std::string start_timestamp;
  std::string end_timestamp;
  std::size_t duration = 0;  // end - start + 1 samples
  std::size_t window_count = 0;
  double peak_error = 0.0;
  double peak_value = 0.0;  // largest raw monitored value the event covers
  EventCategory category = EventCategory::Other;

  bool operator==(const AnomalyEvent&) const = default;
};

void to_json(nlohmann::json& j, const AnomalyEvent& event);
void from_json(const nlohmann::json& j, AnomalyEvent& event);

/// Merges anomalous windows whose origins differ by at most merge_gap + 1.
/// Timestamps and categories are left for the caller to fill.
std::vector<AnomalyEvent> group_events(std::span<const ScoredWindow> scored, std::size_t merge_gap = 0);

/// Conductivity alarm levels in raw units.
struct AlarmLevels {
  double high = 1.0;  // alarm levels 1 and 2
  double trip = 1.5;  // alarm level 3

  bool operator==(const AlarmLevels&) const = default;
};

struct CategoryRules {
  std::string monitored_column = "conductivity";
  AlarmLevels alarms;
  std::size_t window_length = 1;  // rows covered past an event's last origin
};

/// Raw rows inspected for an event: [start, end + window_length - 1], clipped to the frame.
std::pair<std::size_t, std::size_t> covered_rows(const AnomalyEvent& event, std::size_t window_length,
                                                 std::size_t frame_rows);

/// high-spike if the peak monitored value exceeds the high alarm level,
/// else negative-glitch if any covered value in any column is below zero, else other.
EventCategory categorize(const AnomalyEvent& event, const SeriesFrame& raw, const CategoryRules& rules);

/// Fills timestamps, peak_value and category of every event from the raw frame.
void annotate_events(std::vector<AnomalyEvent>& events, const SeriesFrame& raw, const CategoryRules& rules);

}  // namespace abcd
