#include "abcd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <charconv>

#include "abcd/calibration.hpp"
#include "abcd/checkpoint.hpp"
#include "abcd/data.hpp"
#include "abcd/datagen.hpp"
#include "abcd/errors.hpp"

namespace abcd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  if (features.empty()) throw ConfigError("config: at least one feature is required");
  if (network.input_channels != features.size()) {
    throw ConfigError("config: network.input_channels (" + std::to_string(network.input_channels) +
                      ") must equal the number of features (" + std::to_string(features.size()) + ")");
  }
  network.validate();
  training.validate();
  if (data.stride == 0 || detector.stride == 0) throw ConfigError("config: window stride must be positive");
  if (calibration.bins == 0) throw ConfigError("config: calibration.bins must be at least 1");
}

json to_json(const RunConfig& c) {
  return json{{"features", c.features},
              {"network", c.network},
              {"training", c.training},
              {"data",
               {{"stride", c.data.stride},
                {"train_fraction", c.data.train_fraction},
                {"validation_fraction", c.data.validation_fraction}}},
              {"detector",
               {{"merge_gap", c.detector.merge_gap},
                {"stride", c.detector.stride},
                {"monitored_column", c.detector.monitored_column},
                {"high_alarm", c.detector.alarms.high},
                {"trip_alarm", c.detector.alarms.trip}}},
              {"calibration", {{"bins", c.calibration.bins}, {"scale", c.calibration.scale}}},
              {"band_table", c.band_table},
              {"recommendations", c.policy}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("features")) c.features = j.at("features").get<std::vector<std::string>>();
    c.network.input_channels = c.features.size();
    if (j.contains("network")) {
      c.network = j.at("network").get<NetworkSpec>();
      if (!j.at("network").contains("input_channels")) c.network.input_channels = c.features.size();
    }
    if (j.contains("training")) c.training = j.at("training").get<TrainConfig>();
    c.network.attention_enabled = c.training.attention_enabled;
    if (j.contains("network") && j.at("network").contains("attention_enabled") &&
        !(j.contains("training") && j.at("training").contains("attention_enabled"))) {
      c.training.attention_enabled = c.network.attention_enabled;
    }
    if (j.contains("data")) {
      const auto& d = j.at("data");
      c.data.stride = d.value("stride", c.data.stride);
      c.data.train_fraction = d.value("train_fraction", c.data.train_fraction);
      c.data.validation_fraction = d.value("validation_fraction", c.data.validation_fraction);
    }
    if (j.contains("detector")) {
      const auto& d = j.at("detector");
      c.detector.merge_gap = d.value("merge_gap", c.detector.merge_gap);
      c.detector.stride = d.value("stride", c.detector.stride);
      c.detector.monitored_column = d.value("monitored_column", c.detector.monitored_column);
      c.detector.alarms.high = d.value("high_alarm", c.detector.alarms.high);
      c.detector.alarms.trip = d.value("trip_alarm", c.detector.alarms.trip);
    }
    if (j.contains("calibration")) {
      const auto& d = j.at("calibration");
      c.calibration.bins = d.value("bins", c.calibration.bins);
      c.calibration.scale = d.value("scale", c.calibration.scale);
    }
    if (j.contains("band_table")) c.band_table = band_table_from_json(j.at("band_table"));
    if (j.contains("recommendations")) c.policy = j.at("recommendations").get<RecommendationPolicy>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

json read_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError(std::string("cannot open ") + what + " '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + " '" + path.string() + "': " + e.what());
  }
}

/// Writes through a sibling temporary so a failed run never leaves a partial file.
void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ArgumentError("failed writing '" + path.string() + "'");
  }
  fs::rename(tmp, path);
}

json document(const char* kind) {
  return json{{"format_version", kReportFormatVersion}, {"kind", kind}};
}

struct PreparedData {
  SeriesFrame raw;
  StandardizationParams standardizer;
  DataSplit split;
};

// Split on raw windows, fit the standardizer on the training rows only, then
// rebuild the same windows from the standardized frame.
PreparedData prepare(const fs::path& data_path, const RunConfig& config) {
  PreparedData p;
  p.raw = ingest_csv(data_path, config.features);
  const std::size_t length = config.network.input_timesteps;
  const auto raw_windows = make_windows(p.raw, config.features, length, config.data.stride);
  const auto raw_split =
      chrono_split(raw_windows, config.data.train_fraction, config.data.validation_fraction);
  const std::size_t train_rows = raw_split.train.origins.back() + length;
  p.standardizer = fit_standardizer(p.raw, config.features, 0, train_rows);
  const auto windows = make_windows(standardize(p.raw, p.standardizer), config.features, length,
                                    config.data.stride);
  p.split = chrono_split(windows, config.data.train_fraction, config.data.validation_fraction);
  return p;
}

json split_summary(const DataSplit& s) {
  auto part = [](const WindowSet& w) {
    return json{{"windows", w.size()}, {"first_origin", w.origins.front()}, {"last_origin", w.origins.back()}};
  };
  return json{{"train", part(s.train)}, {"validation", part(s.validation)}, {"test", part(s.test)}};
}

RunConfig config_or_default(const std::string& path) {
  if (path.empty()) {
    RunConfig c;
    c.validate();
    return c;
  }
  return run_config_from_json(read_json_file(path, "config"));
}

struct GenArgs {
  std::string config, out, labels;
  std::optional<std::uint64_t> seed;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  ScenarioConfig scenario;
  try {
    scenario = read_json_file(a.config, "scenario config").get<ScenarioConfig>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
  if (a.seed) scenario.seed = *a.seed;
  const auto series = generate(scenario);
  std::ostringstream csv, labels;
  write_csv(csv, series.frame);
  write_labels(labels, series.labels);
  write_file(a.out, csv.str());
  write_file(a.labels, labels.str());
  out << "wrote " << series.frame.rows() << " samples to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string data, config, checkpoint, report;
  std::optional<std::uint64_t> seed;
  bool no_attention = false;
};

void apply_overrides(RunConfig& config, const std::optional<std::uint64_t>& seed, bool no_attention) {
  if (seed) config.training.seed = *seed;
  if (no_attention) {
    config.training.attention_enabled = false;
    config.network.attention_enabled = false;
  }
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig config = config_or_default(a.config);
  apply_overrides(config, a.seed, a.no_attention);
  const auto prepared = prepare(a.data, config);

  auto trained = train(config.network, init_params(config.network, config.training.seed),
                       prepared.split.train, prepared.split.validation, config.training);
  const ThresholdSpec threshold = calibrate_threshold(config.network, trained.params, prepared.split.train);
  trained.report.threshold = threshold;
  const double test_mae = mean_error(config.network, trained.params, prepared.split.test.windows);

  Checkpoint checkpoint;
  checkpoint.spec = config.network;
  checkpoint.params = trained.params;
  checkpoint.seed = config.training.seed;
  checkpoint.features = config.features;
  checkpoint.window_stride = config.data.stride;
  checkpoint.standardizer = prepared.standardizer;
  checkpoint.threshold = threshold;

  json report = document("train-report");
  report["config"] = to_json(config);
  report["split"] = split_summary(prepared.split);
  report["training"] = trained.report;
  report["test_mae"] = test_mae;

  write_file(a.checkpoint, dump_document(checkpoint_to_json(checkpoint)));
  if (!a.report.empty()) write_file(a.report, dump_document(report));
  out << "trained " << trained.report.stopped_epoch << " epochs (best " << trained.report.best_epoch
      << "), threshold " << threshold.threshold << ", test MAE " << test_mae << "\n";
  return 0;
}

struct DetectArgs {
  std::string data, checkpoint, config, report, trace;
  std::optional<std::size_t> merge_gap;
};

fs::path default_trace_path(const fs::path& report) {
  fs::path p = report;
  p.replace_extension();
  p += "_trace.csv";
  return p;
}

int cmd_detect(const DetectArgs& a, std::ostream& out) {
  RunConfig config = config_or_default(a.config);
  if (a.merge_gap) config.detector.merge_gap = *a.merge_gap;
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  if (!ckpt.standardizer || !ckpt.threshold) {
    throw ConfigError("checkpoint '" + a.checkpoint + "' lacks a standardizer or threshold");
  }
  if (ckpt.features.size() != ckpt.spec.input_channels) {
    throw ConfigError("checkpoint '" + a.checkpoint + "' features do not match its network");
  }
  std::vector<std::string> schema = ckpt.features;
  const bool monitored_is_feature =
      std::find(schema.begin(), schema.end(), config.detector.monitored_column) != schema.end();
  if (!monitored_is_feature) schema.push_back(config.detector.monitored_column);
  const SeriesFrame raw = ingest_csv(a.data, schema);

  const auto windows = make_windows(standardize(raw, *ckpt.standardizer), ckpt.features,
                                    ckpt.spec.input_timesteps, config.detector.stride);
  const auto scored = score(windows, ckpt.spec, ckpt.params, *ckpt.threshold);
  auto events = group_events(scored, config.detector.merge_gap);
  CategoryRules rules{config.detector.monitored_column, config.detector.alarms, ckpt.spec.input_timesteps};
  annotate_events(events, raw, rules);

  const auto anomalous = static_cast<std::size_t>(
      std::count_if(scored.begin(), scored.end(), [](const ScoredWindow& w) { return w.is_anomalous; }));
  json report = document("anomaly-report");
  report["samples"] = raw.rows();
  report["window_length"] = ckpt.spec.input_timesteps;
  report["window_stride"] = config.detector.stride;
  report["merge_gap"] = config.detector.merge_gap;
  report["alarms"] = {{"high", config.detector.alarms.high}, {"trip", config.detector.alarms.trip}};
  report["threshold"] = *ckpt.threshold;
  report["windows_scored"] = scored.size();
  report["anomalous_windows"] = anomalous;
  report["events"] = events;

  std::ostringstream trace;
  trace << "origin,timestamp,error,anomalous\n";
  char buf[64];
  for (const auto& w : scored) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, w.error);
    trace << w.origin << ',' << raw.timestamps[w.origin] << ','
          << std::string_view(buf, static_cast<std::size_t>(end - buf)) << ','
          << (w.is_anomalous ? 1 : 0) << '\n';
  }
  const fs::path trace_path = a.trace.empty() ? default_trace_path(a.report) : fs::path(a.trace);
  write_file(a.report, dump_document(report));
  write_file(trace_path, trace.str());
  out << anomalous << " of " << scored.size() << " windows anomalous, " << events.size() << " events\n";
  return 0;
}

struct RiskArgs {
  std::string anomalies, config, band_table, report;
  int severity = 0;
  int probability = 0;
  std::vector<int> detection;
};

int cmd_risk(const RiskArgs& a, std::ostream& out) {
  RunConfig config = config_or_default(a.config);
  if (!a.band_table.empty()) config.band_table = band_table_from_json(read_json_file(a.band_table, "band table"));
  const json anomalies = read_json_file(a.anomalies, "anomaly report");
  std::vector<AnomalyEvent> events;
  std::size_t span = 0;
  try {
    events = anomalies.at("events").get<std::vector<AnomalyEvent>>();
    span = anomalies.at("samples").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError("anomaly report '" + a.anomalies + "': " + e.what());
  }
  const EventStats stats = aggregate_events(events, span, config.detector.alarms);

  json report = document("risk-report");
  report["stats"] = stats;
  report["band_table"] = config.band_table;
  report["assessments"] = json::array();
  for (int d : a.detection) {
    const auto assessment = assess(FmecaScore{a.severity, a.probability, d}, stats, config.band_table, config.policy);
    report["assessments"].push_back(assessment);
    out << assessment.recommendation << "\n";
  }
  write_file(a.report, dump_document(report));
  return 0;
}

struct CalibrateArgs {
  std::string anomalies, trace, labels, predictions, config, report, points;
  std::optional<std::size_t> bins;
  std::optional<double> scale;
};

std::vector<ProbabilisticPrediction> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open predictions file '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<ProbabilisticPrediction> preds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    ProbabilisticPrediction p;
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used = 0;
      p.probability = std::stod(line.substr(0, comma), &used);
      p.label = std::stoi(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError(path.string(), line_no, "expected 'probability,label'");
    }
    preds.push_back(p);
  }
  return preds;
}

std::vector<ProbabilisticPrediction> predictions_from_trace(const CalibrateArgs& a, double scale) {
  const json anomalies = read_json_file(a.anomalies, "anomaly report");
  ThresholdSpec threshold;
  std::size_t length = 0;
  try {
    threshold = anomalies.at("threshold").get<ThresholdSpec>();
    length = anomalies.at("window_length").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError("anomaly report '" + a.anomalies + "': " + e.what());
  }
  std::ifstream label_in(a.labels);
  if (!label_in) throw ArgumentError("cannot open labels file '" + a.labels + "'");
  const auto labels = read_labels(label_in, a.labels);

  std::ifstream in(a.trace);
  if (!in) throw ArgumentError("cannot open trace file '" + a.trace + "'");
  std::string line;
  std::getline(in, line);
  std::vector<ProbabilisticPrediction> preds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() < 3) throw ParseError(a.trace, line_no, "expected origin,timestamp,error,...");
    std::size_t origin = 0;
    double error = 0.0;
    try {
      origin = std::stoul(fields[0]);
      error = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw ParseError(a.trace, line_no, "invalid origin or error");
    }
    if (origin + length > labels.size()) {
      throw ParseError(a.trace, line_no, "window exceeds the labelled samples");
    }
    // A window is a positive when any of its samples is labelled anomalous.
    const bool positive = std::any_of(labels.begin() + static_cast<std::ptrdiff_t>(origin),
                                      labels.begin() + static_cast<std::ptrdiff_t>(origin + length),
                                      [](bool b) { return b; });
    preds.push_back({error_to_probability(error, threshold, scale), positive ? 1 : 0});
  }
  return preds;
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  RunConfig config = config_or_default(a.config);
  const std::size_t bins = a.bins.value_or(config.calibration.bins);
  const double scale = a.scale.value_or(config.calibration.scale);

  std::vector<ProbabilisticPrediction> preds;
  if (!a.predictions.empty()) {
    preds = read_predictions(a.predictions);
  } else {
    if (a.anomalies.empty() || a.labels.empty()) {
      throw ArgumentError("calibrate needs --predictions, or --anomalies with --labels");
    }
    CalibrateArgs resolved = a;
    if (resolved.trace.empty()) resolved.trace = default_trace_path(a.anomalies).string();
    preds = predictions_from_trace(resolved, scale);
  }

  const auto report = expected_calibration_error(preds, bins);
  const auto points = reliability_points(report);
  json doc = document("calibration-report");
  doc["num_bins"] = bins;
  doc.update(json(report));
  json pts = json::array();
  for (const auto& p : points) {
    pts.push_back({{"confidence", p.confidence}, {"frequency", p.frequency}, {"count", p.count}});
  }
  doc["reliability"] = pts;
  write_file(a.report, dump_document(doc));
  if (!a.points.empty()) {
    std::ostringstream csv;
    csv << "confidence,frequency,count\n";
    for (const auto& p : points) csv << p.confidence << ',' << p.frequency << ',' << p.count << '\n';
    write_file(a.points, csv.str());
  }
  out << "ECE " << report.ece << " over " << report.total << " predictions (" << bins << " bins)\n";
  return 0;
}

struct AblationArgs {
  std::string data, config, report;
  std::optional<std::uint64_t> seed;
};

int cmd_ablation(const AblationArgs& a, std::ostream& out) {
  RunConfig config = config_or_default(a.config);
  apply_overrides(config, a.seed, false);
  const auto prepared = prepare(a.data, config);
  const auto result = ablation_run(config.network, prepared.split, config.training);
  json doc = document("ablation-report");
  doc["seed"] = config.training.seed;
  doc.update(json(result));
  write_file(a.report, dump_document(doc));
  out << "test MAE with attention " << result.with_attention.test_mae << ", without "
      << result.without_attention.test_mae << "\n";
  return 0;
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
  return run_config_from_json(read_json_file(path, "config"));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-based convolutional autoencoder anomaly detection and risk ranking"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic cooling-system series with labels");
  gen_cmd->add_option("--config", gen.config, "Scenario config (JSON)")->required();
  gen_cmd->add_option("--out", gen.out, "Output CSV")->required();
  gen_cmd->add_option("--labels", gen.labels, "Output labels CSV")->required();
  gen_cmd->add_option("--seed", gen.seed, "Override the scenario seed");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the autoencoder and calibrate the threshold");
  train_cmd->add_option("--data", tr.data, "Input CSV")->required();
  train_cmd->add_option("--config", tr.config, "Run config (JSON)");
  train_cmd->add_option("--checkpoint", tr.checkpoint, "Checkpoint output")->required();
  train_cmd->add_option("--report", tr.report, "Training report output");
  train_cmd->add_option("--seed", tr.seed, "Override the training seed");
  train_cmd->add_flag("--no-attention", tr.no_attention, "Train without the attention block");

  DetectArgs det;
  auto* detect_cmd = app.add_subcommand("detect", "Score windows and group anomaly events");
  detect_cmd->add_option("--data", det.data, "Input CSV")->required();
  detect_cmd->add_option("--checkpoint", det.checkpoint, "Trained checkpoint")->required();
  detect_cmd->add_option("--config", det.config, "Run config (JSON) for detector options");
  detect_cmd->add_option("--report", det.report, "Anomaly report output")->required();
  detect_cmd->add_option("--trace", det.trace, "Per-window error trace CSV (default <report>_trace.csv)");
  detect_cmd->add_option("--merge-gap", det.merge_gap, "Largest origin gap merged into one event");

  RiskArgs risk;
  auto* risk_cmd = app.add_subcommand("risk", "Rank risk from FMECA grades and detected events");
  risk_cmd->add_option("--anomalies", risk.anomalies, "Anomaly report from detect")->required();
  risk_cmd->add_option("--severity,-S", risk.severity, "Severity grade 1-5")->required();
  risk_cmd->add_option("--probability,-P", risk.probability, "Probability grade 1-5")->required();
  risk_cmd->add_option("--detection,-D", risk.detection, "Detection grade 1-5 (repeatable)")->required();
  risk_cmd->add_option("--band-table", risk.band_table, "Band table (JSON)");
  risk_cmd->add_option("--config", risk.config, "Run config (JSON)");
  risk_cmd->add_option("--report", risk.report, "Risk report output")->required();

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Expected calibration error and reliability points");
  cal_cmd->add_option("--anomalies", cal.anomalies, "Anomaly report from detect");
  cal_cmd->add_option("--trace", cal.trace, "Per-window error trace (default <anomalies>_trace.csv)");
  cal_cmd->add_option("--labels", cal.labels, "Ground-truth labels CSV");
  cal_cmd->add_option("--predictions", cal.predictions, "CSV of probability,label pairs");
  cal_cmd->add_option("--bins", cal.bins, "Number of equal-width bins");
  cal_cmd->add_option("--scale", cal.scale, "Logistic scale (default: training error std)");
  cal_cmd->add_option("--config", cal.config, "Run config (JSON)");
  cal_cmd->add_option("--report", cal.report, "Calibration report output")->required();
  cal_cmd->add_option("--points", cal.points, "Reliability points CSV output");

  AblationArgs abl;
  auto* abl_cmd = app.add_subcommand("ablation", "Compare the network with and without attention");
  abl_cmd->add_option("--data", abl.data, "Input CSV")->required();
  abl_cmd->add_option("--config", abl.config, "Run config (JSON)");
  abl_cmd->add_option("--report", abl.report, "Comparison report output")->required();
  abl_cmd->add_option("--seed", abl.seed, "Override the training seed");

  std::vector<const char*> argv{"abcd"};
  argv.reserve(args.size() + 1);
  for (const auto& s : args) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen, out);
    if (train_cmd->parsed()) return cmd_train(tr, out);
    if (detect_cmd->parsed()) return cmd_detect(det, out);
    if (risk_cmd->parsed()) return cmd_risk(risk, out);
    if (cal_cmd->parsed()) return cmd_calibrate(cal, out);
    if (abl_cmd->parsed()) return cmd_ablation(abl, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace abcd::cli
