#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "abcd/data.hpp"
#include "abcd/model.hpp"
#include "abcd/trainer.hpp"

namespace abcd {

inline constexpr int kCheckpointFormatVersion = 1;

/// Everything needed to score new data with a trained model.
struct Checkpoint {
  NetworkSpec spec;
  ParamStore params;
  std::uint64_t seed = 0;
  std::vector<std::string> features;
  std::size_t window_stride = 1;
  std::optional<StandardizationParams> standardizer;
  std::optional<ThresholdSpec> threshold;
};

nlohmann::json params_to_json(const ParamStore& params);
ParamStore params_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
/// Throws ConfigError on a wrong format version or a parameter layout that
/// disagrees with the stored network.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

std::string dump_document(const nlohmann::json& j);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace abcd
