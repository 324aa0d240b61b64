#pragma once

// Serial, unoptimized versions of the hot kernels. Tests compare the OpenMP
// kernels against these; the benchmark times both.

#include <vector>

#include "occstereo/consensus.hpp"
#include "occstereo/costs.hpp"
#include "occstereo/grid.hpp"
#include "occstereo/patches.hpp"
#include "occstereo/solver.hpp"

namespace occstereo::reference {

Volume matching_cost(const StereoPair& pair);

/// Sorts the whole window per pixel.
Field median_filter(const Field& phi, int k);

/// Brute-force O(N²) squared distance to the nearest target pixel.
Field squared_distance_to(const Mask& targets);

OcclusionOffsets ray_cast_offsets(const Field& theta1_map, const Field& theta2_map, const Field& phi, double step);

/// Every patch summed straight from the pixel curves.
PatchCurves aggregate_patch_costs(const PatchHierarchy& h, const Volume& m, const DisparityMap* disparity,
                                  double beta);

/// Scans every patch for every pixel.
Consensus update_consensus(const PatchHierarchy& h, const std::vector<PatchState>& states);

Field evolution_bracket(const Field& phi, const DataTerms& data, const Field& b_weight, double mu);

}  // namespace occstereo::reference
