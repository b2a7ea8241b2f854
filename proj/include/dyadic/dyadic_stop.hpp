#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "dyadic/compensator.hpp"
#include "dyadic/doob.hpp"
#include "dyadic/error.hpp"
#include "dyadic/paths.hpp"
#include "dyadic/stopping.hpp"

namespace dyadic {

struct DyadicStopApproximation {
  std::vector<int> levels;
  /// sigma_n on the master grid; finitely valued, never infinite.
  std::vector<GridStoppingTime> sigmas;
  CompensatorApproximation compensator;
};

/// Finitely valued stopping times approaching a predictable tau from below:
/// sigma_n is the left end of the first level-N_n interval on which the
/// approximating step process of 1_{[tau, 1]} reaches 1/2, and 1 if it never
/// does.
inline DyadicStopApproximation dyadic_stop_approx(const GridStoppingTime& tau,
                                                  const std::vector<int>& levels = {}) {
  const ProcessPaths a = indicator_from(tau);
  const auto& space = tau.space();
  if (!is_grid_predictable(a, space.master_level()))
    throw Error(ErrorCode::NotPredictableInput, "1_{[tau, 1]} is not grid-predictable");
  CompensatorOptions options;
  options.levels = levels;
  DyadicStopApproximation out{{}, {}, approximate_compensator(a, options)};
  for (const DyadicStepProcess& step : out.compensator.steps) {
    const std::size_t stride = space.grid().stride(step.level());
    std::vector<std::size_t> sigma(space.num_outcomes(), space.last_index());
    for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
      for (std::size_t j = 0; j <= step.steps(); ++j) {
        if (step.value(j)[w] >= 0.5) {
          sigma[w] = j == 0 ? 0 : (j - 1) * stride;
          break;
        }
      }
    }
    out.levels.push_back(step.level());
    out.sigmas.emplace_back(tau.space_ptr(), std::move(sigma));
  }
  return out;
}

}  // namespace dyadic
