// OpenMP kernels against their serial references on a 256x256, d_max 32 scene.
// Arg(0) is the reference, Arg(n > 0) the parallel kernel on n threads.
#include <benchmark/benchmark.h>
#include <omp.h>

#include "occstereo/harness.hpp"
#include "occstereo/level_set.hpp"
#include "occstereo/occlusion.hpp"
#include "occstereo/reference.hpp"
#include "occstereo/solver.hpp"

using namespace occstereo;

namespace {

struct Fixture {
  Scene scene;
  Volume cost;
  Field phi;
  Field theta1;
  Field theta2;
  PatchHierarchy hierarchy;
  std::vector<PatchState> states;
  DataTerms terms;
  Field b_weight;

  Fixture() {
    scene = generate_scene(SceneSpec{});
    cost = build_matching_cost(scene.pair).values;
    phi = init_ellipse({130, 126, 58, 62}, 256, 256);
    theta1 = Field(256, 256, 20.0);
    theta2 = Field(256, 256, 4.0);
    hierarchy = PatchHierarchy::build(256, 256, HierarchyParams{});
    PatchCurves curves;
    aggregate_patch_costs(hierarchy, cost, nullptr, 0.0, curves);
    update_messages(hierarchy, curves, std::vector<std::uint8_t>(hierarchy.size(), 1), states);
    terms = sample_data_terms(cost, theta1, theta2, ray_cast_offsets(theta1, theta2, phi));
    const Volumes v = Volumes::build(scene.pair, BoundaryParams{});
    b_weight = combined_boundary_weight(v.b_occ, v.b_mono, theta1, AlphaWeights{});
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

// Returns true for the reference variant.
bool setup(const benchmark::State& state) {
  if (state.range(0) > 0) omp_set_num_threads(static_cast<int>(state.range(0)));
  return state.range(0) == 0;
}

void BM_MatchingCost(benchmark::State& state) {
  const Fixture& f = fixture();
  const bool ref = setup(state);
  for (auto _ : state) {
    if (ref) {
      benchmark::DoNotOptimize(reference::matching_cost(f.scene.pair));
    } else {
      benchmark::DoNotOptimize(build_matching_cost(f.scene.pair));
    }
  }
}

void BM_Median7(benchmark::State& state) {
  const Fixture& f = fixture();
  const bool ref = setup(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref ? reference::median_filter(f.phi, 7) : median_filter(f.phi, 7));
  }
}

void BM_RayCast(benchmark::State& state) {
  const Fixture& f = fixture();
  const bool ref = setup(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref ? reference::ray_cast_offsets(f.theta1, f.theta2, f.phi, kRayStep)
                                 : ray_cast_offsets(f.theta1, f.theta2, f.phi));
  }
}

void BM_PatchCosts(benchmark::State& state) {
  const Fixture& f = fixture();
  const bool ref = setup(state);
  PatchCurves curves;
  for (auto _ : state) {
    if (ref) {
      benchmark::DoNotOptimize(reference::aggregate_patch_costs(f.hierarchy, f.cost, nullptr, 0.0));
    } else {
      aggregate_patch_costs(f.hierarchy, f.cost, nullptr, 0.0, curves);
      benchmark::DoNotOptimize(curves);
    }
  }
}

void BM_Consensus(benchmark::State& state) {
  const Fixture& f = fixture();
  const bool ref = setup(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref ? reference::update_consensus(f.hierarchy, f.states)
                                 : update_consensus(f.hierarchy, f.states));
  }
}

void BM_Bracket(benchmark::State& state) {
  const Fixture& f = fixture();
  const bool ref = setup(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref ? reference::evolution_bracket(f.phi, f.terms, f.b_weight, 4.0)
                                 : evolution_bracket(f.phi, f.terms, f.b_weight, 4.0));
  }
}

void BM_SolverStep(benchmark::State& state) {
  const Fixture& f = fixture();
  setup(state);
  const Solver solver(f.scene.pair, SolverConfig{});
  SolverState st = solver.initial_state({130, 126, 58, 62});
  solver.step(st);
  for (auto _ : state) {
    SolverState s = st;
    solver.step(s);
    benchmark::DoNotOptimize(s.phi);
  }
}

void thread_args(benchmark::internal::Benchmark* b) {
  b->Arg(0);
  for (int n = 1; n <= omp_get_num_procs(); n *= 2) b->Arg(n);
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_MatchingCost)->Apply(thread_args);
BENCHMARK(BM_Median7)->Apply(thread_args);
BENCHMARK(BM_RayCast)->Apply(thread_args);
BENCHMARK(BM_PatchCosts)->Apply(thread_args);
// The serial consensus scans every patch for every pixel; skip it at this size.
BENCHMARK(BM_Consensus)->DenseRange(1, 1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bracket)->Apply(thread_args);
BENCHMARK(BM_SolverStep)->DenseRange(1, 1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
