#include <doctest.h>

#include "abcd/errors.hpp"
#include "abcd/risk.hpp"

using namespace abcd;

namespace {

AnomalyEvent event_of(EventCategory category, double peak) {
  AnomalyEvent e;
  e.category = category;
  e.peak_value = peak;
  return e;
}

}  // namespace

TEST_CASE("risk priority rank examples") {
  const auto table = BandTable::defaults();
  CHECK(rpr({5, 4, 2}) == 40);
  CHECK(table.classify(40) == RiskBand::Medium);
  CHECK(rpr({5, 4, 1}) == 20);
  CHECK(table.classify(20) == RiskBand::Low);
  CHECK(rpr({5, 5, 5}) == 125);
  CHECK(table.classify(125) == RiskBand::High);
  CHECK(table.classify(25) == RiskBand::Low);
  CHECK(table.classify(26) == RiskBand::Medium);
  CHECK(table.classify(50) == RiskBand::Medium);
  CHECK(table.classify(51) == RiskBand::High);
}

TEST_CASE("grades outside 1..5 are rejected") {
  CHECK_THROWS_AS(rpr({0, 4, 2}), ValidationError);
  CHECK_THROWS_AS(rpr({5, 6, 2}), ValidationError);
  CHECK_THROWS_AS(rpr({5, 4, -1}), ValidationError);
  CHECK_THROWS_AS(assess({0, 1, 1}, EventStats{}), ValidationError);
}

TEST_CASE("all 125 grade triples map to exactly one band, monotonically") {
  const auto table = BandTable::defaults();
  auto rank = [](RiskBand b) { return static_cast<int>(b); };
  for (int s = 1; s <= 5; ++s)
    for (int p = 1; p <= 5; ++p)
      for (int d = 1; d <= 5; ++d) {
        const int r = rpr({s, p, d});
        CHECK(r == s * p * d);
        CHECK(r >= 1);
        CHECK(r <= 125);
        int matches = 0;
        for (const auto& range : table.ranges())
          if (r >= range.lower && r <= range.upper) ++matches;
        CHECK(matches == 1);
        const auto band = table.classify(r);
        if (s < 5) CHECK(rank(table.classify(rpr({s + 1, p, d}))) >= rank(band));
        if (p < 5) CHECK(rank(table.classify(rpr({s, p + 1, d}))) >= rank(band));
        if (d < 5) CHECK(rank(table.classify(rpr({s, p, d + 1}))) >= rank(band));
      }
  for (int r = 1; r < 125; ++r) CHECK(rank(table.classify(r + 1)) >= rank(table.classify(r)));
}

TEST_CASE("band table validation") {
  CHECK_THROWS_AS(BandTable({{1, 25, RiskBand::Low}, {27, 125, RiskBand::High}}), ConfigError);
  CHECK_THROWS_AS(BandTable({{1, 30, RiskBand::Low}, {25, 125, RiskBand::High}}), ConfigError);
  CHECK_THROWS_AS(BandTable({{1, 25, RiskBand::Low}, {26, 100, RiskBand::High}}), ConfigError);
  CHECK_THROWS_AS(BandTable({{2, 125, RiskBand::Low}}), ConfigError);
  CHECK_THROWS_AS(BandTable({}), ConfigError);
  const BandTable custom({{1, 10, RiskBand::Low}, {11, 60, RiskBand::Medium}, {61, 125, RiskBand::High}});
  CHECK(custom.classify(40) == RiskBand::Medium);
  nlohmann::json j = custom;
  CHECK(band_table_from_json(j).ranges().size() == 3);
  CHECK(band_table_from_json(nlohmann::json{{"bands", j}}).classify(61) == RiskBand::High);
  CHECK_THROWS_AS(band_table_from_json(nlohmann::json::parse(R"([{"lower":1,"upper":125,"band":"severe"}])")),
                  Error);
}

TEST_CASE("event aggregation") {
  const std::vector<AnomalyEvent> events{
      event_of(EventCategory::HighSpike, 1.7), event_of(EventCategory::NegativeGlitch, 0.4),
      event_of(EventCategory::NegativeGlitch, 0.3), event_of(EventCategory::NegativeGlitch, 0.5)};
  const auto stats = aggregate_events(events, 1000, AlarmLevels{1.0, 1.5});
  CHECK(stats.high_spike == 1);
  CHECK(stats.negative_glitch == 3);
  CHECK(stats.other == 0);
  CHECK(stats.total_events == 4);
  CHECK(stats.span_samples == 1000);
  CHECK(stats.high_alarm_occurrences == 1);
  CHECK(stats.trip_alarm_occurrences == 1);
  const auto none = aggregate_events({}, 10);
  CHECK(none.total_events == 0);
}

TEST_CASE("recommendations") {
  const RecommendationPolicy policy;
  const std::vector<AnomalyEvent> events{event_of(EventCategory::HighSpike, 1.2),
                                         event_of(EventCategory::NegativeGlitch, 0.1),
                                         event_of(EventCategory::NegativeGlitch, 0.2),
                                         event_of(EventCategory::NegativeGlitch, 0.3)};
  const EventStats stats = aggregate_events(events, 500, AlarmLevels{1.0, 1.5});
  auto contains = [](const std::string& text, const std::string& part) {
    return text.find(part) != std::string::npos;
  };
  for (int s = 1; s <= 5; ++s)
    for (int p = 1; p <= 5; ++p)
      for (int d = 1; d <= 5; ++d) {
        const auto a = assess({s, p, d}, stats);
        CHECK(contains(a.recommendation, policy.action(a.band)));
        CHECK(contains(a.recommendation, "RPR " + std::to_string(s * p * d)));
        CHECK(a.recommendation == recommend(a, stats));
        CHECK(a.recommendation == assess({s, p, d}, stats).recommendation);
      }
  const auto low = assess({5, 4, 1}, stats);
  CHECK(stats.trip_alarm_occurrences == 0);
  CHECK(contains(low.recommendation, "defer replacement; continue condition monitoring"));
  CHECK(contains(low.recommendation, "1 high-spike"));
  CHECK(contains(low.recommendation, "3 negative-glitch"));
  CHECK(contains(assess({5, 4, 2}, stats).recommendation, "replace at next planned shutdown"));
  CHECK(contains(assess({5, 5, 5}, stats).recommendation, "replace immediately / trigger alarm response"));

  RecommendationPolicy custom;
  custom.medium = "inspect resin";
  CHECK(contains(assess({5, 4, 2}, stats, BandTable::defaults(), custom).recommendation, "inspect resin"));
}

TEST_CASE("aggregation matches enumeration on random event lists") {
  std::uint64_t state = 12345;
  auto next = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return state >> 33;
  };
  const AlarmLevels alarms{1.0, 1.5};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AnomalyEvent> events(next() % 30);
    std::size_t counts[3] = {0, 0, 0}, high = 0, trip = 0;
    for (auto& e : events) {
      const auto k = next() % 3;
      e = event_of(static_cast<EventCategory>(k), static_cast<double>(next() % 200) / 100.0);
      ++counts[k];
      if (e.peak_value > 1.0) ++high;
      if (e.peak_value > 1.5) ++trip;
    }
    const auto stats = aggregate_events(events, 1000, alarms);
    CHECK(stats.high_spike == counts[0]);
    CHECK(stats.negative_glitch == counts[1]);
    CHECK(stats.other == counts[2]);
    CHECK(stats.total_events == events.size());
    CHECK(stats.high_alarm_occurrences == high);
    CHECK(stats.trip_alarm_occurrences == trip);
  }
}
