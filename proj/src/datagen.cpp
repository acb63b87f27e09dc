#include "abcd/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>

#include "abcd/errors.hpp"

namespace abcd {

std::string_view to_string(InjectionKind kind) {
  switch (kind) {
    case InjectionKind::CorrelatedSpike: return "correlated-spike";
    case InjectionKind::UncorrelatedSpike: return "uncorrelated-spike";
    case InjectionKind::NegativeGlitch: return "negative-glitch";
  }
  return "correlated-spike";
}

InjectionKind injection_kind_from_string(std::string_view text) {
  if (text == "correlated-spike") return InjectionKind::CorrelatedSpike;
  if (text == "uncorrelated-spike") return InjectionKind::UncorrelatedSpike;
  if (text == "negative-glitch") return InjectionKind::NegativeGlitch;
  throw ConfigError("unknown injection kind '" + std::string(text) + "'");
}

namespace {

std::string describe(const Injection& inj, std::size_t index) {
  return "injection #" + std::to_string(index) + " (" + std::string(to_string(inj.kind)) + " at [" +
         std::to_string(inj.start) + ", " + std::to_string(inj.start + inj.length - 1) + "])";
}

}  // namespace

void ScenarioConfig::validate() const {
  if (samples == 0) throw ConfigError("scenario: samples must be positive");
  if (interval_seconds <= 0) throw ConfigError("scenario: interval_seconds must be positive");
  if (diurnal_period == 0) throw ConfigError("scenario: diurnal_period must be positive");
  if (!(conductivity_level >= 0.0 && conductivity_level <= 2.0)) {
    throw ConfigError("scenario: conductivity_level must lie in the meter range [0, 2] uS/cm");
  }
  if (!(conductivity_noise >= 0.0) || !(temperature_noise >= 0.0)) {
    throw ConfigError("scenario: noise sigma must be non-negative");
  }
  try {
    parse_timestamp(start_time);
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (!injections.empty() && (conductivity_noise <= 0.0 || temperature_noise <= 0.0)) {
    throw ConfigError("scenario: injections are sized in noise sigma, which must be positive");
  }
  for (std::size_t i = 0; i < injections.size(); ++i) {
    const auto& inj = injections[i];
    if (inj.length == 0) throw ConfigError("scenario: " + describe(inj, i) + " has zero length");
    if (inj.start + inj.length > samples) {
      throw ConfigError("scenario: " + describe(inj, i) + " extends past sample " +
                        std::to_string(samples - 1));
    }
    if (!(inj.magnitude > 0.0)) {
      throw ConfigError("scenario: " + describe(inj, i) + " needs a positive magnitude");
    }
    for (std::size_t k = 0; k < i; ++k) {
      const auto& other = injections[k];
      const bool disjoint = inj.start + inj.length <= other.start || other.start + other.length <= inj.start;
      if (!disjoint) {
        throw ConfigError("scenario: overlapping injections " + describe(other, k) + " and " +
                          describe(inj, i));
      }
    }
  }
}

void to_json(nlohmann::json& j, const ScenarioConfig& c) {
  nlohmann::json injections = nlohmann::json::array();
  for (const auto& inj : c.injections) {
    injections.push_back({{"kind", to_string(inj.kind)},
                          {"start", inj.start},
                          {"length", inj.length},
                          {"magnitude", inj.magnitude}});
  }
  j = nlohmann::json{{"samples", c.samples},
                     {"seed", c.seed},
                     {"start_time", c.start_time},
                     {"interval_seconds", c.interval_seconds},
                     {"conductivity_level", c.conductivity_level},
                     {"conductivity_noise", c.conductivity_noise},
                     {"conductivity_diurnal", c.conductivity_diurnal},
                     {"temperature_level", c.temperature_level},
                     {"temperature_noise", c.temperature_noise},
                     {"temperature_diurnal", c.temperature_diurnal},
                     {"diurnal_period", c.diurnal_period},
                     {"injections", injections}};
}

void from_json(const nlohmann::json& j, ScenarioConfig& c) {
  ScenarioConfig d;
  c.samples = j.value("samples", d.samples);
  c.seed = j.value("seed", d.seed);
  c.start_time = j.value("start_time", d.start_time);
  c.interval_seconds = j.value("interval_seconds", d.interval_seconds);
  c.conductivity_level = j.value("conductivity_level", d.conductivity_level);
  c.conductivity_noise = j.value("conductivity_noise", d.conductivity_noise);
  c.conductivity_diurnal = j.value("conductivity_diurnal", d.conductivity_diurnal);
  c.temperature_level = j.value("temperature_level", d.temperature_level);
  c.temperature_noise = j.value("temperature_noise", d.temperature_noise);
  c.temperature_diurnal = j.value("temperature_diurnal", d.temperature_diurnal);
  c.diurnal_period = j.value("diurnal_period", d.diurnal_period);
  c.injections.clear();
  if (j.contains("injections")) {
    for (const auto& item : j.at("injections")) {
      Injection inj;
      inj.kind = injection_kind_from_string(item.at("kind").get<std::string>());
      inj.start = item.at("start").get<std::size_t>();
      inj.length = item.value("length", std::size_t{1});
      inj.magnitude = item.value("magnitude", 5.0);
      c.injections.push_back(inj);
    }
  }
}

GeneratedSeries generate(const ScenarioConfig& config) {
  config.validate();
  const std::size_t n = config.samples;
  GeneratedSeries out;
  auto& frame = out.frame;
  frame.names = {std::string(kConductivity), std::string(kSupplyTemperature)};
  frame.columns.assign(2, std::vector<double>(n));
  frame.timestamps.resize(n);
  frame.instants.resize(n);
  out.labels.assign(n, false);

  const std::int64_t start = parse_timestamp(config.start_time);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  auto& cond = frame.columns[0];
  auto& temp = frame.columns[1];
  for (std::size_t i = 0; i < n; ++i) {
    frame.instants[i] = start + static_cast<std::int64_t>(i) * config.interval_seconds * 1000;
    frame.timestamps[i] = format_timestamp(frame.instants[i]);
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(i % config.diurnal_period) /
                         static_cast<double>(config.diurnal_period);
    const double wave = std::sin(phase);
    cond[i] = config.conductivity_level + config.conductivity_diurnal * wave;
    temp[i] = config.temperature_level + config.temperature_diurnal * wave;
    // Draw both channels every sample so the noise stream does not depend on sigma.
    const double cond_noise = unit(rng);
    const double temp_noise = unit(rng);
    if (config.conductivity_noise > 0.0) cond[i] += config.conductivity_noise * cond_noise;
    if (config.temperature_noise > 0.0) temp[i] += config.temperature_noise * temp_noise;
  }

  for (const auto& inj : config.injections) {
    for (std::size_t j = 0; j < inj.length; ++j) {
      const std::size_t i = inj.start + j;
      // Spikes rise monotonically from half to full magnitude.
      const double ramp = inj.length == 1 ? 1.0
                                          : 0.5 + 0.5 * static_cast<double>(j) /
                                                      static_cast<double>(inj.length - 1);
      switch (inj.kind) {
        case InjectionKind::CorrelatedSpike:
          cond[i] += inj.magnitude * config.conductivity_noise * ramp;
          temp[i] += inj.magnitude * config.temperature_noise * ramp;
          break;
        case InjectionKind::UncorrelatedSpike:
          cond[i] += inj.magnitude * config.conductivity_noise * ramp;
          break;
        case InjectionKind::NegativeGlitch:
          cond[i] = -inj.magnitude * config.conductivity_noise;
          temp[i] = -inj.magnitude * config.temperature_noise;
          break;
      }
      out.labels[i] = true;
    }
  }
  return out;
}

void write_labels(std::ostream& out, const std::vector<bool>& labels) {
  out << "index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << (labels[i] ? 1 : 0) << '\n';
}

std::vector<bool> read_labels(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header row");
  std::vector<bool> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(source, line_no, "expected 'index,label'");
    std::size_t index = 0;
    try {
      index = std::stoul(line.substr(0, comma));
    } catch (const std::exception&) {
      throw ParseError(source, line_no, "invalid sample index");
    }
    const std::string value = line.substr(comma + 1);
    if (value != "0" && value != "1") throw ParseError(source, line_no, "label must be 0 or 1");
    if (index != labels.size()) {
      throw ParseError(source, line_no, "expected index " + std::to_string(labels.size()));
    }
    labels.push_back(value == "1");
  }
  return labels;
}

}  // namespace abcd
