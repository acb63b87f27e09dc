#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "abcd/params.hpp"

namespace abcd {

struct GradientCheckOptions {
  std::size_t probes = 100;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
  // Below this magnitude both gradients count as zero and the absolute
  // difference is compared instead.
  double zero_floor = 1e-8;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::string worst_block;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t probes = 0;
  bool passed = false;
};

/// `loss` evaluates the scalar objective at the current parameter values.
/// `backward` recomputes the objective's analytic gradient into the grad slots.
/// Probed coordinates are drawn uniformly over all parameters from `seed`.
GradientCheckReport gradient_check(const std::function<double(const ParamStore&)>& loss,
                                   const std::function<void(ParamStore&)>& backward,
                                   ParamStore& params, const GradientCheckOptions& options = {});

}  // namespace abcd
