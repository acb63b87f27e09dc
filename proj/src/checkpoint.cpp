#include "abcd/checkpoint.hpp"

#include <fstream>

#include "abcd/errors.hpp"

namespace abcd {

nlohmann::json params_to_json(const ParamStore& params) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : params.blocks()) {
    blocks.push_back({{"name", b.name}, {"shape", b.shape}, {"values", b.values}});
  }
  return blocks;
}

ParamStore params_from_json(const nlohmann::json& j) {
  ParamStore store;
  for (const auto& item : j) {
    auto& block = store.add(item.at("name").get<std::string>(),
                            item.at("shape").get<std::vector<std::size_t>>());
    auto values = item.at("values").get<std::vector<double>>();
    if (values.size() != block.size()) {
      throw ConfigError("checkpoint: block '" + block.name + "' holds " +
                        std::to_string(values.size()) + " values, shape needs " +
                        std::to_string(block.size()));
    }
    block.values = std::move(values);
  }
  return store;
}

nlohmann::json checkpoint_to_json(const Checkpoint& c) {
  nlohmann::json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["kind"] = "abcd-checkpoint";
  j["seed"] = c.seed;
  j["network"] = c.spec;
  j["features"] = c.features;
  j["window_stride"] = c.window_stride;
  j["standardizer"] = c.standardizer ? nlohmann::json(*c.standardizer) : nlohmann::json(nullptr);
  j["threshold"] = c.threshold ? nlohmann::json(*c.threshold) : nlohmann::json(nullptr);
  j["parameters"] = params_to_json(c.params);
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw ConfigError("checkpoint: unsupported format_version " + std::to_string(version));
    }
    Checkpoint c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.spec = j.at("network").get<NetworkSpec>();
    c.spec.validate();
    c.features = j.value("features", std::vector<std::string>{});
    c.window_stride = j.value("window_stride", std::size_t{1});
    if (j.contains("standardizer") && !j.at("standardizer").is_null()) {
      c.standardizer = j.at("standardizer").get<StandardizationParams>();
    }
    if (j.contains("threshold") && !j.at("threshold").is_null()) {
      c.threshold = j.at("threshold").get<ThresholdSpec>();
    }
    c.params = params_from_json(j.at("parameters"));
    check_layout(c.spec, c.params);
    if (!c.features.empty() && c.features.size() != c.spec.input_channels) {
      throw ConfigError("checkpoint: " + std::to_string(c.features.size()) +
                        " features for a network with " + std::to_string(c.spec.input_channels) +
                        " input channels");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

std::string dump_document(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write checkpoint '" + path.string() + "'");
  out << dump_document(checkpoint_to_json(checkpoint));
  if (!out) throw ArgumentError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open checkpoint '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint '" + path.string() + "': " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace abcd
