#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "abcd/datagen.hpp"
#include "abcd/errors.hpp"

using namespace abcd;

namespace {

ScenarioConfig base(std::size_t samples = 300) {
  ScenarioConfig c;
  c.samples = samples;
  return c;
}

Injection inj(InjectionKind kind, std::size_t start, std::size_t length, double magnitude = 5.0) {
  return Injection{kind, start, length, magnitude};
}

}  // namespace

TEST_CASE("no injections, no labels") {
  const auto g = generate(base());
  CHECK(g.frame.rows() == 300);
  CHECK(g.labels.size() == 300);
  CHECK(std::none_of(g.labels.begin(), g.labels.end(), [](bool b) { return b; }));
  CHECK(g.frame.names == std::vector<std::string>{"conductivity", "supply_temperature"});
  CHECK(g.frame.timestamps[0] == "2020-01-01T00:00:00");
  CHECK(g.frame.timestamps[1] == "2020-01-01T01:00:00");
}

TEST_CASE("same seed, identical frames; different seed, different noise") {
  auto c = base();
  c.injections = {inj(InjectionKind::CorrelatedSpike, 50, 5)};
  const auto a = generate(c);
  const auto b = generate(c);
  CHECK(a.frame.columns == b.frame.columns);
  CHECK(a.labels == b.labels);
  c.seed = 8;
  CHECK(generate(c).frame.columns != a.frame.columns);
}

TEST_CASE("labels are exactly the injected ranges") {
  auto c = base();
  c.injections = {inj(InjectionKind::CorrelatedSpike, 100, 5)};
  const auto g = generate(c);
  for (std::size_t i = 0; i < g.labels.size(); ++i) CHECK(g.labels[i] == (i >= 100 && i <= 104));

  c.injections = {inj(InjectionKind::UncorrelatedSpike, 10, 3), inj(InjectionKind::NegativeGlitch, 20, 2),
                  inj(InjectionKind::CorrelatedSpike, 290, 10)};
  const auto h = generate(c);
  std::size_t count = 0;
  for (bool b : h.labels) count += b;
  CHECK(count == 15);
  CHECK(h.labels[10]);
  CHECK(h.labels[21]);
  CHECK_FALSE(h.labels[22]);
  CHECK(h.labels[299]);
}

TEST_CASE("zero noise and no injections gives the exact level plus sinusoid") {
  auto c = base(100);
  c.conductivity_noise = 0.0;
  c.temperature_noise = 0.0;
  const auto g = generate(c);
  for (std::size_t i = 0; i < 100; ++i) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(i % c.diurnal_period) /
                         static_cast<double>(c.diurnal_period);
    CHECK(g.frame.columns[0][i] == c.conductivity_level + c.conductivity_diurnal * std::sin(phase));
    CHECK(g.frame.columns[1][i] == c.temperature_level + c.temperature_diurnal * std::sin(phase));
  }
}

TEST_CASE("injection effects per kind") {
  auto c = base();
  const auto clean = generate(c);
  c.injections = {inj(InjectionKind::CorrelatedSpike, 40, 4), inj(InjectionKind::UncorrelatedSpike, 80, 4),
                  inj(InjectionKind::NegativeGlitch, 120, 3)};
  const auto g = generate(c);
  const auto& c0 = clean.frame.columns;
  const auto& c1 = g.frame.columns;
  for (std::size_t i = 0; i < 300; ++i) {
    const bool in_corr = i >= 40 && i < 44, in_unc = i >= 80 && i < 84, in_neg = i >= 120 && i < 123;
    if (in_corr) {
      CHECK(c1[0][i] > c0[0][i]);
      CHECK(c1[1][i] > c0[1][i]);
      CHECK(c1[0][i] - c0[0][i] >= 2.5 * c.conductivity_noise - 1e-12);
      CHECK(c1[0][i] - c0[0][i] <= 5.0 * c.conductivity_noise + 1e-12);
    } else if (in_unc) {
      CHECK(c1[0][i] > c0[0][i]);
      CHECK(c1[1][i] == c0[1][i]);
    } else if (in_neg) {
      CHECK(c1[0][i] < 0.0);
      CHECK(c1[1][i] < 0.0);
    } else {
      CHECK(c1[0][i] == c0[0][i]);
      CHECK(c1[1][i] == c0[1][i]);
    }
  }
}

TEST_CASE("configuration errors") {
  auto c = base();
  c.injections = {inj(InjectionKind::CorrelatedSpike, 10, 5), inj(InjectionKind::NegativeGlitch, 14, 2)};
  try {
    generate(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("correlated-spike") != std::string::npos);
    CHECK(msg.find("negative-glitch") != std::string::npos);
  }
  c.injections = {inj(InjectionKind::CorrelatedSpike, 298, 5)};
  CHECK_THROWS_AS(generate(c), ConfigError);
  c.injections = {inj(InjectionKind::CorrelatedSpike, 10, 0)};
  CHECK_THROWS_AS(generate(c), ConfigError);
  c = base();
  c.conductivity_noise = -0.1;
  CHECK_THROWS_AS(generate(c), ConfigError);
  c = base();
  c.conductivity_noise = 0.0;
  c.injections = {inj(InjectionKind::CorrelatedSpike, 10, 2)};
  CHECK_THROWS_AS(generate(c), ConfigError);
}

TEST_CASE("config json and labels file round trip") {
  auto c = base();
  c.injections = {inj(InjectionKind::UncorrelatedSpike, 10, 3, 4.0)};
  nlohmann::json j = c;
  const auto back = j.get<ScenarioConfig>();
  CHECK(generate(back).frame.columns == generate(c).frame.columns);

  const auto g = generate(c);
  std::stringstream ss;
  write_labels(ss, g.labels);
  CHECK(read_labels(ss) == g.labels);
  std::istringstream bad("index,label\n0,0\n2,1\n");
  CHECK_THROWS(read_labels(bad));
  CHECK(injection_kind_from_string("uncorrelated-spike") == InjectionKind::UncorrelatedSpike);
  CHECK_THROWS(injection_kind_from_string("spike"));
}
