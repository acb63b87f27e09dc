#include "abcd/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "abcd/errors.hpp"

namespace abcd {

GradientCheckReport gradient_check(const std::function<double(const ParamStore&)>& loss,
                                   const std::function<void(ParamStore&)>& backward,
                                   ParamStore& params, const GradientCheckOptions& options) {
  if (!(options.step > 0.0)) throw ArgumentError("gradient_check: step must be positive");
  const std::size_t total = params.parameter_count();
  if (total == 0) throw ArgumentError("gradient_check: no parameters");

  params.zero_grads();
  backward(params);
  std::vector<std::vector<double>> analytic;
  for (const auto& block : params.blocks()) analytic.push_back(block.grads);

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);

  GradientCheckReport report;
  report.probes = options.probes;
  for (std::size_t probe = 0; probe < options.probes; ++probe) {
    std::size_t flat = pick(rng);
    std::size_t k = 0;
    while (flat >= params.blocks()[k].size()) {
      flat -= params.blocks()[k].size();
      ++k;
    }
    auto& value = params.blocks()[k].values[flat];
    const double saved = value;
    value = saved + options.step;
    const double plus = loss(params);
    value = saved - options.step;
    const double minus = loss(params);
    value = saved;

    const double numeric = (plus - minus) / (2.0 * options.step);
    const double exact = analytic[k][flat];
    const double scale = std::max(std::abs(numeric), std::abs(exact));
    const double diff = std::abs(numeric - exact);
    const double error = scale < options.zero_floor ? diff : diff / scale;
    if (error > report.max_relative_error || probe == 0) {
      report.max_relative_error = error;
      report.worst_block = params.blocks()[k].name;
      report.worst_index = flat;
      report.worst_analytic = exact;
      report.worst_numeric = numeric;
    }
  }
  report.passed = report.max_relative_error < options.tolerance;
  return report;
}

}  // namespace abcd
