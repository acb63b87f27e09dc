#include "abcd/risk.hpp"

#include <algorithm>
#include <sstream>

#include "abcd/errors.hpp"

namespace abcd {

namespace {

constexpr int kMinRank = 1;
constexpr int kMaxRank = 125;

void check_grade(const char* name, int grade) {
  if (grade < 1 || grade > 5) {
    throw ValidationError(std::string(name) + " grade must lie in [1, 5], got " + std::to_string(grade));
  }
}

}  // namespace

void FmecaScore::validate() const {
  check_grade("severity", severity);
  check_grade("probability", probability);
  check_grade("detection", detection);
}

int rpr(const FmecaScore& score) {
  score.validate();
  return score.severity * score.probability * score.detection;
}

std::string_view to_string(RiskBand band) {
  switch (band) {
    case RiskBand::Low: return "low";
    case RiskBand::Medium: return "medium";
    case RiskBand::High: return "high";
  }
  return "low";
}

RiskBand band_from_string(std::string_view text) {
  if (text == "low") return RiskBand::Low;
  if (text == "medium") return RiskBand::Medium;
  if (text == "high") return RiskBand::High;
  throw ConfigError("unknown risk band '" + std::string(text) + "'");
}

BandTable BandTable::defaults() {
  return BandTable({{1, 25, RiskBand::Low}, {26, 50, RiskBand::Medium}, {51, 125, RiskBand::High}});
}

BandTable::BandTable(std::vector<BandRange> ranges) : ranges_(std::move(ranges)) {
  if (ranges_.empty()) throw ConfigError("band table is empty");
  std::sort(ranges_.begin(), ranges_.end(),
            [](const BandRange& a, const BandRange& b) { return a.lower < b.lower; });
  int expected = kMinRank;
  for (const auto& r : ranges_) {
    if (r.lower > r.upper) {
      throw ConfigError("band table: range [" + std::to_string(r.lower) + ", " +
                        std::to_string(r.upper) + "] is inverted");
    }
    if (r.lower > expected) {
      throw ConfigError("band table: ranks " + std::to_string(expected) + ".." +
                        std::to_string(r.lower - 1) + " are not covered");
    }
    if (r.lower < expected) {
      throw ConfigError("band table: range starting at " + std::to_string(r.lower) +
                        " overlaps the previous range");
    }
    expected = r.upper + 1;
  }
  if (expected != kMaxRank + 1) {
    throw ConfigError("band table must end at " + std::to_string(kMaxRank) + ", ends at " +
                      std::to_string(expected - 1));
  }
}

RiskBand BandTable::classify(int rank) const {
  if (rank < kMinRank || rank > kMaxRank) {
    throw ValidationError("risk priority rank " + std::to_string(rank) + " outside [1, 125]");
  }
  for (const auto& r : ranges_) {
    if (rank >= r.lower && rank <= r.upper) return r.band;
  }
  throw InternalError("band table does not cover rank " + std::to_string(rank));
}

void to_json(nlohmann::json& j, const BandTable& table) {
  j = nlohmann::json::array();
  for (const auto& r : table.ranges()) {
    j.push_back({{"lower", r.lower}, {"upper", r.upper}, {"band", to_string(r.band)}});
  }
}

BandTable band_table_from_json(const nlohmann::json& j) {
  const auto& list = j.is_object() ? j.at("bands") : j;
  if (!list.is_array()) throw ConfigError("band table must be an array of ranges");
  std::vector<BandRange> ranges;
  try {
    for (const auto& item : list) {
      ranges.push_back(BandRange{item.at("lower").get<int>(), item.at("upper").get<int>(),
                                 band_from_string(item.at("band").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("band table: ") + e.what());
  }
  return BandTable(std::move(ranges));
}

void to_json(nlohmann::json& j, const EventStats& s) {
  j = nlohmann::json{{"high_spike", s.high_spike},
                     {"negative_glitch", s.negative_glitch},
                     {"other", s.other},
                     {"total_events", s.total_events},
                     {"span_samples", s.span_samples},
                     {"high_alarm_occurrences", s.high_alarm_occurrences},
                     {"trip_alarm_occurrences", s.trip_alarm_occurrences}};
}

EventStats aggregate_events(std::span<const AnomalyEvent> events, std::size_t span_samples,
                            const AlarmLevels& alarms) {
  EventStats stats;
  stats.span_samples = span_samples;
  for (const auto& e : events) {
    switch (e.category) {
      case EventCategory::HighSpike: ++stats.high_spike; break;
      case EventCategory::NegativeGlitch: ++stats.negative_glitch; break;
      case EventCategory::Other: ++stats.other; break;
    }
    if (e.peak_value > alarms.high) ++stats.high_alarm_occurrences;
    if (e.peak_value > alarms.trip) ++stats.trip_alarm_occurrences;
  }
  stats.total_events = events.size();
  return stats;
}

const std::string& RecommendationPolicy::action(RiskBand band) const {
  switch (band) {
    case RiskBand::Low: return low;
    case RiskBand::Medium: return medium;
    case RiskBand::High: return high;
  }
  return low;
}

void to_json(nlohmann::json& j, const RecommendationPolicy& p) {
  j = nlohmann::json{{"low", p.low}, {"medium", p.medium}, {"high", p.high}};
}

void from_json(const nlohmann::json& j, RecommendationPolicy& p) {
  RecommendationPolicy d;
  p.low = j.value("low", d.low);
  p.medium = j.value("medium", d.medium);
  p.high = j.value("high", d.high);
}

void to_json(nlohmann::json& j, const FmecaAssessment& a) {
  j = nlohmann::json{{"severity", a.score.severity},
                     {"probability", a.score.probability},
                     {"detection", a.score.detection},
                     {"rpr", a.rpr},
                     {"band", to_string(a.band)},
                     {"recommendation", a.recommendation}};
}

std::string recommend(const FmecaAssessment& assessment, const EventStats& stats,
                      const RecommendationPolicy& policy) {
  std::ostringstream out;
  out << "RPR " << assessment.rpr << " (S=" << assessment.score.severity
      << " P=" << assessment.score.probability << " D=" << assessment.score.detection << "), "
      << to_string(assessment.band) << " risk: " << policy.action(assessment.band)
      << ". Evidence over " << stats.span_samples << " samples: " << stats.total_events
      << " events (" << stats.high_spike << " high-spike, " << stats.negative_glitch
      << " negative-glitch, " << stats.other << " other); " << stats.high_alarm_occurrences
      << " high-alarm and " << stats.trip_alarm_occurrences << " trip-level occurrences.";
  return out.str();
}

FmecaAssessment assess(const FmecaScore& score, const EventStats& stats, const BandTable& table,
                       const RecommendationPolicy& policy) {
  FmecaAssessment a;
  a.score = score;
  a.rpr = rpr(score);
  a.band = table.classify(a.rpr);
  a.recommendation = recommend(a, stats, policy);
  return a;
}

}  // namespace abcd
