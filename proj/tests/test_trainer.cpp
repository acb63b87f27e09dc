#include <doctest.h>

#include <cmath>
#include <random>

#include "abcd/errors.hpp"
#include "abcd/model.hpp"
#include "abcd/trainer.hpp"
#include "test_util.hpp"

using namespace abcd;

namespace {

// Oracle: two-pass direct summation in long double.
double oracle_threshold(const std::vector<double>& e) {
  long double sum = 0.0L;
  for (double v : e) sum += v;
  const long double mean = sum / static_cast<long double>(e.size());
  long double sq = 0.0L;
  for (double v : e) sq += (v - mean) * (v - mean);
  return static_cast<double>(mean + std::sqrt(sq / static_cast<long double>(e.size())));
}

WindowSet windows_from(FeatureMap map) {
  WindowSet ws;
  ws.length = map.time();
  ws.stride = 1;
  ws.origins.resize(map.batch());
  for (std::size_t i = 0; i < map.batch(); ++i) ws.origins[i] = i;
  ws.windows = std::move(map);
  return ws;
}

WindowSet sine_windows(std::size_t count, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  FeatureMap m(count, length, 2);
  for (std::size_t b = 0; b < count; ++b)
    for (std::size_t t = 0; t < length; ++t) {
      const double phase = 2.0 * 3.141592653589793 * static_cast<double>((b + t) % 24) / 24.0;
      m(b, t, 0) = std::sin(phase) + noise(rng);
      m(b, t, 1) = std::cos(phase) + noise(rng);
    }
  return windows_from(std::move(m));
}

}  // namespace

TEST_CASE("threshold formula") {
  const auto t = threshold_from_errors(std::vector<double>{1, 2, 3});
  CHECK(t.mean_error == 2.0);
  CHECK(t.std_error == doctest::Approx(0.81650).epsilon(1e-5));
  CHECK(t.threshold == doctest::Approx(2.81650).epsilon(1e-5));
  CHECK(t.population == 3);

  for (double c : {0.0, 0.1, 0.123456789, 7.0, 1e-9}) {
    const auto k = threshold_from_errors(std::vector<double>(17, c));
    CHECK(k.threshold == c);
    CHECK(k.std_error == 0.0);
  }
  CHECK_THROWS_AS(threshold_from_errors(std::vector<double>{1.0}), InsufficientDataError);
}

TEST_CASE("threshold matches a direct summation oracle on random error sets") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 500;
    std::lognormal_distribution<double> dist(-2.0, 1.0);
    std::vector<double> e(n);
    for (auto& v : e) v = dist(rng);
    const double expected = oracle_threshold(e);
    const auto got = threshold_from_errors(e);
    REQUIRE(std::abs(got.threshold - expected) <= 1e-12 * std::max(1.0, expected));
  }
}

TEST_CASE("early stopping") {
  SUBCASE("patience 1 with worsening validation stops after two epochs") {
    EarlyStopping es(1);
    CHECK(es.observe(1, 0.5));
    CHECK_FALSE(es.should_stop());
    CHECK_FALSE(es.observe(2, 0.6));
    CHECK(es.should_stop());
    CHECK(es.best_epoch() == 1);
    CHECK(es.best_value() == 0.5);
  }
  SUBCASE("improvement resets the counter") {
    EarlyStopping es(2);
    es.observe(1, 1.0);
    es.observe(2, 1.1);
    es.observe(3, 0.9);
    es.observe(4, 0.95);
    CHECK_FALSE(es.should_stop());
    es.observe(5, 0.95);
    CHECK(es.should_stop());
    CHECK(es.best_epoch() == 3);
  }
  SUBCASE("ties are not improvements") {
    EarlyStopping es(1);
    es.observe(1, 1.0);
    CHECK_FALSE(es.observe(2, 1.0));
    CHECK(es.should_stop());
  }
}

TEST_CASE("percent change") {
  CHECK(std::abs(*percent_change(0.0094, 0.00402) - 57.2) < 0.5);
  CHECK(*percent_change(32, 29) == doctest::Approx(9.375).epsilon(1e-12));
  CHECK(*percent_change(5, 5) == 0.0);
  CHECK(*percent_change(2, 3) < 0.0);
  CHECK_FALSE(percent_change(0, 1).has_value());
}

TEST_CASE("training on constant windows converges") {
  const NetworkSpec spec;
  const std::size_t n = 640;
  FeatureMap m(n, 24, 2);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t t = 0; t < 24; ++t) {
      m(b, t, 0) = 0.5;
      m(b, t, 1) = -0.25;
    }
  const auto ws = windows_from(std::move(m));
  TrainConfig config;
  config.max_epochs = 50;
  config.patience = 50;
  const auto train_set = ws.subset(0, n - 64);
  const auto r = train(spec, init_params(spec, 1), train_set, ws.subset(n - 64, 64), config);
  CHECK(r.report.epochs.size() <= 50);
  CHECK(mean_error(spec, r.params, train_set.windows) < 1e-3);
}

TEST_CASE("training restores the best validation epoch and reduces error") {
  NetworkSpec spec;
  spec.input_timesteps = 8;
  const auto tr = sine_windows(96, 8, 1);
  const auto va = sine_windows(24, 8, 2);
  TrainConfig config;
  config.max_epochs = 30;
  config.patience = 3;
  config.learning_rate = 0.005;
  const auto r = train(spec, init_params(spec, 3), tr, va, config);
  const auto& rep = r.report;
  CHECK(rep.stopped_epoch == rep.epochs.size());
  CHECK(rep.best_epoch >= 1);
  CHECK(rep.epochs[rep.best_epoch - 1].validation_mae == rep.best_validation_mae);
  for (const auto& e : rep.epochs) CHECK(e.validation_mae >= rep.best_validation_mae);
  CHECK(mean_error(spec, r.params, va.windows) == rep.best_validation_mae);
  CHECK(rep.epochs.back().train_mae < rep.initial_train_mae);
}

TEST_CASE("training is deterministic for a fixed seed") {
  NetworkSpec spec;
  spec.input_timesteps = 8;
  const auto tr = sine_windows(70, 8, 4);
  const auto va = sine_windows(10, 8, 5);
  TrainConfig config;
  config.max_epochs = 5;
  config.batch_size = 16;
  const auto a = train(spec, init_params(spec, 6), tr, va, config);
  const auto b = train(spec, init_params(spec, 6), tr, va, config);
  CHECK(a.params == b.params);
  CHECK(a.report.epochs == b.report.epochs);
  config.seed = 43;
  const auto c = train(spec, init_params(spec, 6), tr, va, config);
  CHECK_FALSE(c.params == a.params);
}

TEST_CASE("calibrated threshold") {
  NetworkSpec spec;
  spec.input_timesteps = 8;
  const auto params = init_params(spec, 9);
  const auto ws = sine_windows(40, 8, 10);
  const auto t = calibrate_threshold(spec, params, ws);
  CHECK(t.population == 40);
  CHECK(std::abs(t.threshold - oracle_threshold(window_errors(spec, params, ws.windows))) < 1e-12);
  CHECK_THROWS_AS(calibrate_threshold(spec, params, ws.subset(0, 1)), InsufficientDataError);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.batch_size = 0;
  CHECK_THROWS(c.validate());
  c = TrainConfig{};
  c.learning_rate = -1.0;
  CHECK_THROWS(c.validate());
  nlohmann::json j = TrainConfig{};
  CHECK(j.get<TrainConfig>() == TrainConfig{});
}
