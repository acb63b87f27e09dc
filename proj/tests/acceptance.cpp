// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "abcd/calibration.hpp"
#include "abcd/cli.hpp"
#include "abcd/data.hpp"
#include "abcd/datagen.hpp"
#include "abcd/gradient_check.hpp"
#include "abcd/model.hpp"
#include "abcd/risk.hpp"
#include "abcd/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... values) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, values...);
  return buf;
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  return json::parse(f);
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = abcd::cli::run(args, out, err);
  if (code != 0) std::cerr << "  cli " << args.front() << " failed: " << err.str();
  return code;
}

// Oracles kept independent of the library code paths.

double oracle_threshold(const std::vector<double>& e) {
  long double sum = 0.0L;
  for (double v : e) sum += v;
  const long double mean = sum / static_cast<long double>(e.size());
  long double sq = 0.0L;
  for (double v : e) sq += (v - mean) * (v - mean);
  return static_cast<double>(mean + std::sqrt(sq / static_cast<long double>(e.size())));
}

double oracle_ece(const std::vector<abcd::ProbabilisticPrediction>& preds, std::size_t bins) {
  long double ece = 0.0L;
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / static_cast<double>(bins);
    const double hi = static_cast<double>(b + 1) / static_cast<double>(bins);
    long double conf = 0.0L, pos = 0.0L;
    std::size_t n = 0;
    for (const auto& p : preds) {
      const bool inside = p.probability >= lo && (b + 1 == bins ? p.probability <= hi : p.probability < hi);
      if (!inside) continue;
      conf += p.probability;
      pos += p.label;
      ++n;
    }
    if (n == 0) continue;
    const long double nb = static_cast<long double>(n);
    ece += nb / static_cast<long double>(preds.size()) * std::fabs(pos / nb - conf / nb);
  }
  return static_cast<double>(ece);
}

Verdict gradient_correctness() {
  const auto start = Clock::now();
  abcd::NetworkSpec spec;
  auto params = abcd::init_params(spec, 2024);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  abcd::FeatureMap x(4, spec.input_timesteps, spec.input_channels);
  for (auto& v : x.data()) v = n01(rng);
  auto loss = [&](const abcd::ParamStore& p) { return abcd::mae_loss(abcd::reconstruct(x, spec, p), x); };
  auto backward = [&](abcd::ParamStore& p) { abcd::forward_backward(x, p, spec); };
  const auto report = abcd::gradient_check(loss, backward, params, {100, 1e-5, 1e-4, 7});
  const double wall = seconds_since(start);
  return {report.probes == 100 && report.max_relative_error < 1e-4 && wall < 10.0,
          fmt("max relative error %.3e over %zu probes (worst %s[%zu]), %.2f s", report.max_relative_error,
              report.probes, report.worst_block.c_str(), report.worst_index, wall)};
}

Verdict ece_oracle() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<abcd::ProbabilisticPrediction> preds(1 + rng() % 50);
    for (auto& p : preds) p = {rng() % 6 == 0 ? static_cast<double>(rng() % 11) / 10.0 : u(rng),
                               static_cast<int>(rng() % 2)};
    for (std::size_t bins : {1u, 2u, 5u, 10u})
      worst = std::max(worst, std::abs(abcd::expected_calibration_error(preds, bins).ece - oracle_ece(preds, bins)));
  }
  const std::vector<abcd::ProbabilisticPrediction> hand{{0.1, 0}, {0.2, 1}, {0.8, 1}, {0.9, 1}};
  const double hand_ece = abcd::expected_calibration_error(hand, 2).ece;
  return {worst <= 1e-12 && hand_ece == 0.25,
          fmt("max |ece - oracle| %.3e over 100 cases x 4 bin counts; hand case %.17g", worst, hand_ece)};
}

Verdict calibration_property() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<abcd::ProbabilisticPrediction> preds(10000);
  for (auto& p : preds) {
    p.probability = u(rng);
    p.label = u(rng) < p.probability ? 1 : 0;
  }
  const double sampled = abcd::expected_calibration_error(preds, 10).ece;
  std::vector<abcd::ProbabilisticPrediction> half(1000);
  for (std::size_t i = 0; i < half.size(); ++i) half[i] = {0.5, static_cast<int>(i % 2)};
  const double degenerate = abcd::expected_calibration_error(half, 10).ece;
  return {sampled < 0.02 && degenerate == 0.0,
          fmt("Bernoulli ECE %.5f (< 0.02), degenerate ECE %.17g", sampled, degenerate)};
}

Verdict rpr_reproduction() {
  const auto table = abcd::BandTable::defaults();
  const int a = abcd::rpr({5, 4, 2}), b = abcd::rpr({5, 4, 1});
  bool ok = a == 40 && b == 20 && table.classify(a) == abcd::RiskBand::Medium &&
            table.classify(b) == abcd::RiskBand::Low;
  std::size_t valid = 0;
  for (int s = 1; s <= 5; ++s)
    for (int p = 1; p <= 5; ++p)
      for (int d = 1; d <= 5; ++d) {
        const int r = abcd::rpr({s, p, d});
        int hits = 0;
        for (const auto& range : table.ranges()) hits += r >= range.lower && r <= range.upper;
        valid += hits == 1;
      }
  int covered = 0;
  for (int r = 1; r <= 125; ++r) {
    int hits = 0;
    for (const auto& range : table.ranges()) hits += r >= range.lower && r <= range.upper;
    covered += hits == 1;
  }
  ok = ok && valid == 125 && covered == 125;
  return {ok, fmt("(5,4,2)=%d %s, (5,4,1)=%d %s, %zu/125 triples in exactly one band, %d/125 ranks covered", a,
                  std::string(abcd::to_string(table.classify(a))).c_str(), b,
                  std::string(abcd::to_string(table.classify(b))).c_str(), valid, covered)};
}

Verdict threshold_formula() {
  std::mt19937_64 rng(5);
  std::gamma_distribution<double> dist(2.0, 0.05);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> e(2 + rng() % 1000);
    for (auto& v : e) v = dist(rng);
    const double expected = oracle_threshold(e);
    worst = std::max(worst, std::abs(abcd::threshold_from_errors(e).threshold - expected));
  }
  const double c = 0.0123;
  const double constant = abcd::threshold_from_errors(std::vector<double>(50, c)).threshold;
  return {worst <= 1e-12 && constant == c,
          fmt("max |threshold - oracle| %.3e over 1000 sets; constant set %.17g -> %.17g", worst, c, constant)};
}

// Scenario shared by the end-to-end, ablation and determinism criteria.
struct Scenario {
  fs::path dir;
  std::string p(const std::string& name) const { return (dir / name).string(); }
};

Scenario make_scenario() {
  Scenario s{fs::temp_directory_path() / "abcd_acceptance"};
  fs::remove_all(s.dir);
  fs::create_directories(s.dir);
  abcd::ScenarioConfig config;
  config.samples = 2000;
  config.seed = 11;
  const abcd::InjectionKind kinds[] = {abcd::InjectionKind::CorrelatedSpike, abcd::InjectionKind::UncorrelatedSpike,
                                       abcd::InjectionKind::NegativeGlitch};
  for (std::size_t k = 0; k < 10; ++k) {
    const auto kind = kinds[k % 3];
    config.injections.push_back({kind, 1625 + 37 * k, kind == abcd::InjectionKind::NegativeGlitch ? 3u : 4u, 5.0});
  }
  write_text(s.dir / "scenario.json", json(config).dump(1));
  write_text(s.dir / "run.json", R"({
 "training": {"batch_size": 32, "learning_rate": 0.003, "max_epochs": 200, "patience": 5, "seed": 3},
 "detector": {"high_alarm": 0.6}
})");
  write_text(s.dir / "short.json", R"({
 "training": {"batch_size": 32, "learning_rate": 0.003, "max_epochs": 4, "patience": 5, "seed": 3},
 "detector": {"high_alarm": 0.6}
})");
  return s;
}

Verdict end_to_end(const Scenario& s) {
  const auto start = Clock::now();
  if (cli({"gen", "--config", s.p("scenario.json"), "--out", s.p("data.csv"), "--labels", s.p("labels.csv")}) ||
      cli({"train", "--data", s.p("data.csv"), "--config", s.p("run.json"), "--checkpoint", s.p("ck.json"),
           "--report", s.p("train.json")}) ||
      cli({"detect", "--data", s.p("data.csv"), "--checkpoint", s.p("ck.json"), "--config", s.p("run.json"),
           "--report", s.p("anomalies.json"), "--trace", s.p("trace.csv")}))
    return {false, "pipeline command failed"};
  const double wall = seconds_since(start);

  std::ifstream labels_in(s.dir / "labels.csv");
  const auto labels = abcd::read_labels(labels_in);
  const auto train = read_json(s.dir / "train.json");
  const auto report = read_json(s.dir / "anomalies.json");
  const std::size_t L = report["window_length"];
  const std::size_t test_first = train["split"]["test"]["first_origin"];

  // Injections all start inside the test segment.
  const auto scenario = read_json(s.dir / "scenario.json").get<abcd::ScenarioConfig>();
  bool confined = true;
  for (const auto& inj : scenario.injections) confined = confined && inj.start >= test_first;

  // Event-level recall: an injection is found when a detected event's covered rows touch it.
  std::size_t found = 0;
  for (const auto& inj : scenario.injections) {
    bool hit = false;
    for (const auto& e : report["events"]) {
      const std::size_t lo = e["start"], hi = e["end"].get<std::size_t>() + L - 1;
      hit = hit || (lo < inj.start + inj.length && inj.start <= hi);
    }
    found += hit;
  }
  const double recall = static_cast<double>(found) / static_cast<double>(scenario.injections.size());

  // Window-level false positives among clean test windows.
  std::ifstream trace(s.dir / "trace.csv");
  std::string line;
  std::getline(trace, line);
  std::size_t clean = 0, false_pos = 0;
  while (std::getline(trace, line)) {
    std::stringstream row(line);
    std::string origin, ts, err, flag;
    std::getline(row, origin, ',');
    std::getline(row, ts, ',');
    std::getline(row, err, ',');
    std::getline(row, flag, ',');
    const std::size_t o = std::stoul(origin);
    if (o < test_first) continue;
    if (std::any_of(labels.begin() + static_cast<std::ptrdiff_t>(o),
                    labels.begin() + static_cast<std::ptrdiff_t>(o + L), [](bool b) { return b; }))
      continue;
    ++clean;
    false_pos += flag == "1";
  }
  const double fpr = clean ? static_cast<double>(false_pos) / static_cast<double>(clean) : 1.0;
  const auto& th = train["training"]["threshold"];
  return {confined && wall <= 120.0 && recall >= 0.9 && fpr <= 0.05,
          fmt("recall %zu/10 = %.2f (>= 0.9), clean-test FPR %zu/%zu = %.4f (<= 0.05), threshold %.4f "
              "(mean %.4f + std %.4f), %zu epochs, %.1f s",
              found, recall, false_pos, clean, fpr, th["threshold"].get<double>(), th["mean_error"].get<double>(),
              th["std_error"].get<double>(), train["training"]["stopped_epoch"].get<std::size_t>(), wall)};
}

Verdict ablation_harness(const Scenario& s) {
  if (cli({"ablation", "--data", s.p("data.csv"), "--config", s.p("run.json"), "--report", s.p("ablation.json")}))
    return {false, "ablation command failed"};
  const auto r = read_json(s.dir / "ablation.json");
  const bool shaped = r["with_attention"].contains("test_mae") && r["without_attention"].contains("test_mae") &&
                      r["with_attention"].contains("anomaly_count") &&
                      r["without_attention"].contains("anomaly_count") && r.contains("mae_improvement_percent") &&
                      r.contains("anomaly_reduction_percent");
  const double reference = *abcd::percent_change(0.0094, 0.00402);
  return {shaped && std::abs(reference - 57.2) <= 0.5,
          fmt("MAE %.5f vs %.5f, anomalies %zu vs %zu, formula on 0.0094/0.00402 = %.2f%%",
              r["with_attention"]["test_mae"].get<double>(), r["without_attention"]["test_mae"].get<double>(),
              r["with_attention"]["anomaly_count"].get<std::size_t>(),
              r["without_attention"]["anomaly_count"].get<std::size_t>(), reference)};
}

Verdict determinism(const Scenario& s) {
  for (const std::string run : {"a", "b"}) {
    if (cli({"train", "--data", s.p("data.csv"), "--config", s.p("short.json"), "--checkpoint",
             s.p("det_ck_" + run + ".json")}) ||
        cli({"detect", "--data", s.p("data.csv"), "--checkpoint", s.p("det_ck_" + run + ".json"), "--config",
             s.p("short.json"), "--report", s.p("det_an_" + run + ".json")}))
      return {false, "pipeline command failed"};
  }
  const auto ck_a = slurp(s.dir / "det_ck_a.json"), ck_b = slurp(s.dir / "det_ck_b.json");
  const auto an_a = slurp(s.dir / "det_an_a.json"), an_b = slurp(s.dir / "det_an_b.json");
  return {!ck_a.empty() && ck_a == ck_b && !an_a.empty() && an_a == an_b,
          fmt("checkpoints %s (%zu bytes), anomaly reports %s (%zu bytes)", ck_a == ck_b ? "identical" : "differ",
              ck_a.size(), an_a == an_b ? "identical" : "differ", an_a.size())};
}

Verdict mirror_shapes() {
  std::size_t specs = 0, shape_ok = 0;
  double worst = 0.0;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (std::size_t T : {8u, 16u, 24u})
    for (std::size_t C : {1u, 2u, 4u}) {
      abcd::NetworkSpec spec;
      spec.input_timesteps = T;
      spec.input_channels = C;
      spec.validate();
      ++specs;
      auto params = abcd::init_params(spec, T * 10 + C);
      abcd::FeatureMap x(3, T, C);
      for (auto& v : x.data()) v = n01(rng);
      shape_ok += abcd::reconstruct(x, spec, params).same_shape(x);
      for (auto& v : params.at("attention.vector").values) v = 0.0;
      const auto z = abcd::encode(x, spec, params);
      const auto attended = abcd::attend(z, spec, params).reweighted;
      for (std::size_t i = 0; i < z.size(); ++i)
        worst = std::max(worst, std::abs(attended.values()[i] - z.values()[i]));
    }
  return {shape_ok == specs && worst <= 1e-12,
          fmt("%zu/%zu specs reconstruct input dims, zero-scorer max deviation %.3e", shape_ok, specs, worst)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict()>& check) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << v.detail << std::endl;
  };

  report(1, "gradient correctness", gradient_correctness);
  report(2, "ECE oracle equivalence", ece_oracle);
  report(3, "calibration property", calibration_property);
  report(4, "RPR reproduction", rpr_reproduction);
  report(5, "threshold formula", threshold_formula);
  const Scenario scenario = make_scenario();
  report(6, "end-to-end detection", [&] { return end_to_end(scenario); });
  report(7, "ablation harness", [&] { return ablation_harness(scenario); });
  report(8, "determinism", [&] { return determinism(scenario); });
  report(9, "mirror and shape properties", mirror_shapes);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
