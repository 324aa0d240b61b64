#pragma once

#include <cmath>

#include "occstereo/grid.hpp"

namespace occstereo {

/// Per-pixel Gaussian disparity belief. Pixels not covered by any valid,
/// informative patch have sigma = +inf and mean = NaN.
struct Consensus {
  Field mean;
  Field sigma;

  bool informative(int x, int y) const { return std::isfinite(sigma(x, y)) && sigma(x, y) > 0.0; }
};

}  // namespace occstereo
