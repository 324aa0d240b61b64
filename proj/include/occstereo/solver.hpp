#pragma once

// Alternating descent for the two-layer occlusion-aware energy
//
//   J = Σ H(φ)·M(Θ1) + Σ (1 − H(φ₊))(1 − H(φ))·M(Θ2) + μ Σ B·δ(φ)·|∇φ|
//
// Each iteration refreshes the occlusion offsets, patch validity and
// messages, the consensus, both global shapes, and then takes one explicit
// descent step on φ followed by median filtering (and periodic
// reinitialization).

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "occstereo/consensus.hpp"
#include "occstereo/costs.hpp"
#include "occstereo/grid.hpp"
#include "occstereo/level_set.hpp"
#include "occstereo/patches.hpp"
#include "occstereo/shapes.hpp"

namespace occstereo {

struct SolverConfig {
  double dt = 0.2;
  double eps = kDefaultHeavisideEps;
  double mu = 4.0;
  AlphaWeights alphas{};
  std::optional<double> beta;  // unset: 0.4 / d_max
  int max_iters = 1000;
  int reinit_every = 10;
  int median_k = 7;
  double phi_tol = 1e-4;      // sign-flip fraction treated as "no change"
  int converge_window = 5;    // consecutive quiet iterations to stop
  HierarchyParams hierarchy{};
  BoundaryParams boundary{};
  double ray_step = 0.25;
  std::uint64_t rng_seed = 0;

  double beta_for(int d_max) const { return beta ? *beta : 0.4 / d_max; }
  void validate() const;
};

struct Volumes {
  CostVolume cost;
  BoundaryCostVolume b_occ;
  BoundaryCostVolume b_mono;

  static Volumes build(const StereoPair& pair, const BoundaryParams& params);
};

struct EnergyTerms {
  double foreground = 0.0;
  double background = 0.0;
  double boundary = 0.0;  // already multiplied by μ

  double total() const { return foreground + background + boundary; }
};

struct TraceRecord {
  int iteration = 0;
  EnergyTerms energy;
  double flip_fraction = 0.0;
  GlobalShape theta1;
  GlobalShape theta2;
  bool theta1_kept = false;  // fit was rank deficient, previous shape reused
  bool theta2_kept = false;
};

struct SolverState {
  LevelSetField phi;
  GlobalShape theta1;
  GlobalShape theta2;
  OcclusionOffsets offsets;  // for the current φ and shapes
  Consensus consensus;
  std::vector<PatchState> patches;
  int iteration = 0;
  int quiet_streak = 0;
  bool converged = false;
  std::vector<TraceRecord> trace;
};

struct SolveResult {
  DisparityMap disparity;
  OcclusionMask occlusion;
  LevelSetField phi;
  Consensus consensus;
  GlobalShape theta1;
  GlobalShape theta2;
  std::vector<TraceRecord> trace;
  bool converged = false;
};

/// Matching costs sampled along the current surfaces.
struct DataTerms {
  Field m1;          // M(x, y, Θ1(x,y))
  Field m2;          // M(x, y, Θ2(x,y))
  Field m2_shifted;  // M(x − Δθ, y, Θ2(x,y))
};

DataTerms sample_data_terms(const Volume& m, const Field& theta1_map, const Field& theta2_map,
                            const OcclusionOffsets& offsets);

/// Discrete energy with pixel area 1.
EnergyTerms energy(const Field& phi, const Field& phi_plus, const DataTerms& data, const Field& b_weight, double eps,
                   double mu);

/// −M(Θ1) + M(x − Δθ, Θ2) + μ(B·κ + N·∇B), the bracket of the descent step.
Field evolution_bracket(const Field& phi, const DataTerms& data, const Field& b_weight, double mu);

/// φ + dt·δ_ε(φ)·bracket.
LevelSetField evolve_phi(const Field& phi, const Field& bracket, double dt, double eps);

class Solver {
 public:
  Solver(StereoPair pair, SolverConfig config);

  const StereoPair& pair() const { return pair_; }
  const SolverConfig& config() const { return config_; }
  const Volumes& volumes() const { return volumes_; }
  const ShapeFrame& frame() const { return frame_; }
  const PatchHierarchy& hierarchy() const { return hierarchy_; }

  /// φ0 from the ellipse; shapes zero, offsets zero, empty trace.
  SolverState initial_state(const EllipseSpec& ellipse) const;

  /// One alternation. The first call (iteration 0) treats Δθ as zero, all
  /// patches as valid and drops the disparity regularizer.
  void step(SolverState& state) const;

  EnergyTerms energy(const SolverState& state) const;
  SolveResult finish(const SolverState& state) const;

  using Observer = std::function<void(const SolverState&)>;
  /// Steps until max_iters or until fewer than phi_tol of the pixels change
  /// sign for converge_window consecutive iterations.
  SolveResult run(const EllipseSpec& ellipse, const Observer& observer = {}) const;

 private:
  StereoPair pair_;
  SolverConfig config_;
  Volumes volumes_;
  ShapeFrame frame_;
  PatchHierarchy hierarchy_;
};

SolveResult run(const StereoPair& pair, const SolverConfig& config, const EllipseSpec& ellipse);

}  // namespace occstereo
