#include "abcd/adam.hpp"

#include <cmath>

#include "abcd/errors.hpp"

namespace abcd {

void adam_update(ParamStore& params, AdamState& state) {
  auto& blocks = params.blocks();
  for (const auto& block : blocks) {
    for (std::size_t i = 0; i < block.grads.size(); ++i) {
      if (!std::isfinite(block.grads[i])) {
        throw NumericError("adam_update: non-finite gradient in '" + block.name + "' at index " +
                           std::to_string(i));
      }
    }
  }

  if (state.first_moment.empty() && state.second_moment.empty()) {
    for (const auto& block : blocks) {
      state.first_moment.emplace_back(block.size(), 0.0);
      state.second_moment.emplace_back(block.size(), 0.0);
    }
  }
  if (state.first_moment.size() != blocks.size() || state.second_moment.size() != blocks.size()) {
    throw InternalError("adam_update: moment state does not match the parameter store");
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (state.first_moment[k].size() != blocks[k].size() ||
        state.second_moment[k].size() != blocks[k].size()) {
      throw InternalError("adam_update: moment shape mismatch for '" + blocks[k].name + "'");
    }
  }

  const auto& cfg = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t k = 0; k < blocks.size(); ++k) {
    auto& block = blocks[k];
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t i = 0; i < block.size(); ++i) {
      const double g = block.grads[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      block.values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      block.grads[i] = 0.0;
    }
  }
}

}  // namespace abcd
