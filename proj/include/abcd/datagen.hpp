#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "abcd/data.hpp"

namespace abcd {

enum class InjectionKind { CorrelatedSpike, UncorrelatedSpike, NegativeGlitch };

std::string_view to_string(InjectionKind kind);
InjectionKind injection_kind_from_string(std::string_view text);

/// Magnitude is in multiples of each channel's noise sigma.
struct Injection {
  InjectionKind kind = InjectionKind::CorrelatedSpike;
  std::size_t start = 0;
  std::size_t length = 1;
  double magnitude = 5.0;
};

struct ScenarioConfig {
  std::size_t samples = 2000;
  std::uint64_t seed = 7;
  std::string start_time = "2020-01-01T00:00:00";
  std::int64_t interval_seconds = 3600;
  // Conductivity in uS/cm, supply temperature in degrees C.
  double conductivity_level = 0.5;
  double conductivity_noise = 0.01;
  double conductivity_diurnal = 0.05;
  double temperature_level = 30.0;
  double temperature_noise = 0.3;
  double temperature_diurnal = 2.0;
  std::size_t diurnal_period = 24;
  std::vector<Injection> injections;

  void validate() const;  // throws ConfigError
};

void to_json(nlohmann::json& j, const ScenarioConfig& config);
void from_json(const nlohmann::json& j, ScenarioConfig& config);

inline constexpr std::string_view kConductivity = "conductivity";
inline constexpr std::string_view kSupplyTemperature = "supply_temperature";

struct GeneratedSeries {
  SeriesFrame frame;
  std::vector<bool> labels;  // true exactly on injected samples
};

GeneratedSeries generate(const ScenarioConfig& config);

void write_labels(std::ostream& out, const std::vector<bool>& labels);
std::vector<bool> read_labels(std::istream& in, const std::string& source = "<stream>");

}  // namespace abcd
