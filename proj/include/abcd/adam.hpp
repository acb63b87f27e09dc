#pragma once

#include <cstdint>
#include <vector>

#include "abcd/params.hpp"

namespace abcd {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates aligned block-for-block with a ParamStore.
struct AdamState {
  AdamConfig config;
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  AdamState() = default;
  explicit AdamState(AdamConfig c) : config(c) {}
};

/// One bias-corrected Adam step over every block, then zeroes the gradients.
/// A non-finite gradient raises NumericError before anything is modified.
void adam_update(ParamStore& params, AdamState& state);

}  // namespace abcd
