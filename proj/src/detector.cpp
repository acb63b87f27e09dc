#include "abcd/detector.hpp"

#include <algorithm>

#include "abcd/errors.hpp"

namespace abcd {

std::vector<ScoredWindow> label_errors(std::span<const std::size_t> origins,
                                       std::span<const double> errors,
                                       const ThresholdSpec& threshold) {
  if (origins.size() != errors.size()) {
    throw DimensionError("label_errors", "windows", origins.size(), errors.size());
  }
  std::vector<ScoredWindow> out(origins.size());
  for (std::size_t i = 0; i < origins.size(); ++i) {
    out[i] = ScoredWindow{origins[i], errors[i], errors[i] > threshold.threshold};
  }
  return out;
}

std::vector<ScoredWindow> score(const WindowSet& windows, const NetworkSpec& spec,
                                const ParamStore& params, const ThresholdSpec& threshold) {
  const auto errors = window_errors(spec, params, windows.windows);
  return label_errors(windows.origins, errors, threshold);
}

std::string_view to_string(EventCategory category) {
  switch (category) {
    case EventCategory::HighSpike: return "high-spike";
    case EventCategory::NegativeGlitch: return "negative-glitch";
    case EventCategory::Other: return "other";
  }
  return "other";
}

EventCategory category_from_string(std::string_view text) {
  if (text == "high-spike") return EventCategory::HighSpike;
  if (text == "negative-glitch") return EventCategory::NegativeGlitch;
  if (text == "other") return EventCategory::Other;
  throw ArgumentError("unknown event category '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const AnomalyEvent& e) {
  j = nlohmann::json{{"id", e.id},
                     {"start", e.start},
                     {"end", e.end},
                     {"start_timestamp", e.start_timestamp},
                     {"end_timestamp", e.end_timestamp},
                     {"duration", e.duration},
                     {"window_count", e.window_count},
                     {"peak_error", e.peak_error},
                     {"peak_value", e.peak_value},
                     {"category", to_string(e.category)}};
}

void from_json(const nlohmann::json& j, AnomalyEvent& e) {
  j.at("id").get_to(e.id);
  j.at("start").get_to(e.start);
  j.at("end").get_to(e.end);
  e.start_timestamp = j.value("start_timestamp", std::string{});
  e.end_timestamp = j.value("end_timestamp", std::string{});
  j.at("duration").get_to(e.duration);
  e.window_count = j.value("window_count", std::size_t{0});
  j.at("peak_error").get_to(e.peak_error);
  e.peak_value = j.value("peak_value", 0.0);
  e.category = category_from_string(j.at("category").get<std::string>());
}

std::vector<AnomalyEvent> group_events(std::span<const ScoredWindow> scored, std::size_t merge_gap) {
  std::vector<AnomalyEvent> events;
  for (const auto& w : scored) {
    if (!w.is_anomalous) continue;
    if (!events.empty() && w.origin > events.back().end &&
        w.origin - events.back().end <= merge_gap + 1) {
      auto& e = events.back();
      e.end = w.origin;
      e.duration = e.end - e.start + 1;
      e.peak_error = std::max(e.peak_error, w.error);
      ++e.window_count;
      continue;
    }
    if (!events.empty() && w.origin <= events.back().end) {
      throw ArgumentError("group_events: scored windows are not ordered by origin");
    }
    AnomalyEvent e;
    e.id = events.size() + 1;
    e.start = e.end = w.origin;
    e.duration = 1;
    e.window_count = 1;
    e.peak_error = w.error;
    events.push_back(e);
  }
  return events;
}

std::pair<std::size_t, std::size_t> covered_rows(const AnomalyEvent& event, std::size_t window_length,
                                                 std::size_t frame_rows) {
  if (frame_rows == 0 || event.start >= frame_rows) {
    throw ArgumentError("event " + std::to_string(event.id) + " lies outside the frame");
  }
  const std::size_t last = std::min(event.end + std::max<std::size_t>(window_length, 1) - 1,
                                    frame_rows - 1);
  return {event.start, last};
}

namespace {

double peak_monitored(const AnomalyEvent& event, const SeriesFrame& raw, const CategoryRules& rules) {
  const auto [first, last] = covered_rows(event, rules.window_length, raw.rows());
  const auto& col = raw.column(rules.monitored_column);
  return *std::max_element(col.begin() + static_cast<std::ptrdiff_t>(first),
                           col.begin() + static_cast<std::ptrdiff_t>(last) + 1);
}

}  // namespace

EventCategory categorize(const AnomalyEvent& event, const SeriesFrame& raw, const CategoryRules& rules) {
  if (peak_monitored(event, raw, rules) > rules.alarms.high) return EventCategory::HighSpike;
  const auto [first, last] = covered_rows(event, rules.window_length, raw.rows());
  for (const auto& col : raw.columns) {
    for (std::size_t r = first; r <= last; ++r) {
      if (col[r] < 0.0) return EventCategory::NegativeGlitch;
    }
  }
  return EventCategory::Other;
}

void annotate_events(std::vector<AnomalyEvent>& events, const SeriesFrame& raw,
                     const CategoryRules& rules) {
  for (auto& e : events) {
    e.peak_value = peak_monitored(e, raw, rules);
    e.category = categorize(e, raw, rules);
    e.start_timestamp = raw.timestamps.at(e.start);
    e.end_timestamp = raw.timestamps.at(std::min(e.end, raw.rows() - 1));
  }
}

}  // namespace abcd
