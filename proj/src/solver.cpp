#include "occstereo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "occstereo/occlusion.hpp"

namespace occstereo {

void SolverConfig::validate() const {
  auto fail = [](const char* what) { throw Error(Errc::InvalidArgument, what); };
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(eps > 0.0)) fail("eps must be positive");
  if (!(mu >= 0.0)) fail("mu must be nonnegative");
  if (!(alphas.alpha1 >= 0.0 && alphas.alpha2 >= 0.0 && alphas.alpha3 >= 0.0)) fail("alphas must be nonnegative");
  if (beta && !(*beta >= 0.0)) fail("beta must be nonnegative");
  if (max_iters < 0) fail("max_iters must be >= 0");
  if (reinit_every < 1) fail("reinit_every must be >= 1");
  if (median_k < 1 || median_k % 2 == 0) fail("median_k must be odd and >= 1");
  if (!(phi_tol >= 0.0)) fail("phi_tol must be nonnegative");
  if (converge_window < 1) fail("converge_window must be >= 1");
  if (!(ray_step > 0.0)) fail("ray_step must be positive");
  if (!(boundary.eps_b > 0.0) || !(boundary.b_cap > 0.0) || !(boundary.sigma_g > 0.0)) {
    fail("boundary parameters must be positive");
  }
}

Volumes Volumes::build(const StereoPair& pair, const BoundaryParams& params) {
  Volumes v;
  v.cost = build_matching_cost(pair);
  v.b_occ = build_occ_boundary_cost(v.cost.values, params);
  v.b_mono = build_mono_boundary_cost(pair, params);
  return v;
}

DataTerms sample_data_terms(const Volume& m, const Field& theta1_map, const Field& theta2_map,
                            const OcclusionOffsets& offsets) {
  const int w = theta1_map.width();
  const int h = theta1_map.height();
  DataTerms t{Field(w, h), Field(w, h), Field(w, h)};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      t.m1(x, y) = sample_d(m, x, y, theta1_map(x, y));
      t.m2(x, y) = sample_d(m, x, y, theta2_map(x, y));
      t.m2_shifted(x, y) = sample_xd(m, x - offsets(x, y), y, theta2_map(x, y));
    }
  }
  return t;
}

EnergyTerms energy(const Field& phi, const Field& phi_plus, const DataTerms& data, const Field& b_weight, double eps,
                   double mu) {
  const int w = phi.width();
  const int h = phi.height();
  std::vector<EnergyTerms> rows(static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    EnergyTerms r;
    for (int x = 0; x < w; ++x) {
      const double hp = heaviside_eps(phi(x, y), eps);
      const double hq = heaviside_eps(phi_plus(x, y), eps);
      r.foreground += hp * data.m1(x, y);
      r.background += (1.0 - hq) * (1.0 - hp) * data.m2(x, y);
      const double gx = 0.5 * (phi.clamped(x + 1, y) - phi.clamped(x - 1, y));
      const double gy = 0.5 * (phi.clamped(x, y + 1) - phi.clamped(x, y - 1));
      r.boundary += b_weight(x, y) * dirac_eps(phi(x, y), eps) * std::hypot(gx, gy);
    }
    rows[y] = r;
  }
  EnergyTerms e;
  for (const EnergyTerms& r : rows) {
    e.foreground += r.foreground;
    e.background += r.background;
    e.boundary += r.boundary;
  }
  e.boundary *= mu;
  return e;
}

Field evolution_bracket(const Field& phi, const DataTerms& data, const Field& b_weight, double mu) {
  const int w = phi.width();
  const int h = phi.height();
  Field out(w, h);
  if (mu == 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = -data.m1.data()[i] + data.m2_shifted.data()[i];
    return out;
  }
  const Field kappa = curvature(phi);
  const NormalField n = normal_field(phi);
  const Gradient gb = central_gradient(b_weight);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double geodesic = b_weight(x, y) * kappa(x, y) + n.nx(x, y) * gb.dx(x, y) + n.ny(x, y) * gb.dy(x, y);
      out(x, y) = -data.m1(x, y) + data.m2_shifted(x, y) + mu * geodesic;
    }
  }
  return out;
}

LevelSetField evolve_phi(const Field& phi, const Field& bracket, double dt, double eps) {
  require_same_shape(phi, bracket, "evolve_phi");
  LevelSetField out(phi.width(), phi.height());
  const std::size_t n = phi.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double p = phi.data()[i];
    out.data()[i] = p + dt * dirac_eps(p, eps) * bracket.data()[i];
  }
  return out;
}

Solver::Solver(StereoPair pair, SolverConfig config)
    : pair_(std::move(pair)), config_(std::move(config)) {
  validate(pair_);
  config_.validate();
  volumes_ = Volumes::build(pair_, config_.boundary);
  frame_ = ShapeFrame{pair_.left.width(), pair_.left.height(), static_cast<double>(pair_.d_max)};
  hierarchy_ = PatchHierarchy::build(frame_.width, frame_.height, config_.hierarchy);
}

SolverState Solver::initial_state(const EllipseSpec& ellipse) const {
  SolverState s;
  s.phi = init_ellipse(ellipse, frame_.width, frame_.height);
  s.offsets = OcclusionOffsets(frame_.width, frame_.height);
  s.consensus = Consensus{Field(frame_.width, frame_.height, std::nan("")),
                          Field(frame_.width, frame_.height, std::numeric_limits<double>::infinity())};
  return s;
}

namespace {

double flip_fraction(const Field& before, const Field& after) {
  std::size_t flips = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    flips += is_foreground(before.data()[i]) != is_foreground(after.data()[i]);
  }
  return static_cast<double>(flips) / static_cast<double>(before.size());
}

}  // namespace

void Solver::step(SolverState& state) const {
  const bool first = state.iteration == 0;
  const int w = frame_.width;
  const int h = frame_.height;
  const Field& phi = state.phi;

  // (i) occlusion status and per-patch messages.
  const Field phi_plus = first ? phi : shifted_levelset_sample(phi, state.offsets);
  const OcclusionMask occ = first ? OcclusionMask(w, h) : occluded_mask(phi, phi_plus);
  const std::vector<std::uint8_t> validity =
      first ? std::vector<std::uint8_t>(hierarchy_.size(), 1) : update_validity(hierarchy_, phi, phi_plus);
  PatchCurves curves;
  if (first) {
    aggregate_patch_costs(hierarchy_, volumes_.cost.values, nullptr, 0.0, curves);
  } else {
    const DisparityMap d = compose_disparity(phi, state.theta1, state.theta2, frame_);
    aggregate_patch_costs(hierarchy_, volumes_.cost.values, &d, config_.beta_for(pair_.d_max), curves);
  }
  update_messages(hierarchy_, curves, validity, state.patches);

  // (ii) consensus.
  state.consensus = update_consensus(hierarchy_, state.patches);

  // (iii) global shapes, then the boundary.
  RegionMask fg(w, h), bg(w, h);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const bool f = is_foreground(phi.data()[i]);
    fg.data()[i] = f;
    bg.data()[i] = !f && !occ.data()[i];
  }
  TraceRecord rec;
  if (auto t = fit_shape_wls(state.consensus, fg, frame_)) {
    state.theta1 = *t;
  } else {
    rec.theta1_kept = true;
  }
  if (auto t = fit_shape_wls(state.consensus, bg, frame_)) {
    state.theta2 = *t;
  } else {
    rec.theta2_kept = true;
  }

  const Field t1 = frame_.evaluate(state.theta1);
  const Field t2 = frame_.evaluate(state.theta2);
  const OcclusionOffsets offsets = first ? OcclusionOffsets(w, h) : ray_cast_offsets(t1, t2, phi, config_.ray_step);
  const DataTerms data = sample_data_terms(volumes_.cost.values, t1, t2, offsets);
  const Field b_weight = combined_boundary_weight(volumes_.b_occ, volumes_.b_mono, t1, config_.alphas);
  const Field bracket = evolution_bracket(phi, data, b_weight, config_.mu);

  LevelSetField next = median_filter(evolve_phi(phi, bracket, config_.dt, config_.eps), config_.median_k);
  if ((state.iteration + 1) % config_.reinit_every == 0) {
    ReinitResult r = reinit_sdf(next);
    if (!r.all_one_sign) next = std::move(r.phi);
  }

  rec.iteration = state.iteration + 1;
  rec.flip_fraction = flip_fraction(phi, next);
  state.offsets = ray_cast_offsets(t1, t2, next, config_.ray_step);
  const Field next_plus = shifted_levelset_sample(next, state.offsets);
  rec.energy = occstereo::energy(next, next_plus, data, b_weight, config_.eps, config_.mu);
  rec.theta1 = state.theta1;
  rec.theta2 = state.theta2;

  state.phi = std::move(next);
  state.iteration += 1;
  state.quiet_streak = rec.flip_fraction < config_.phi_tol ? state.quiet_streak + 1 : 0;
  state.converged = state.quiet_streak >= config_.converge_window;
  state.trace.push_back(rec);
}

EnergyTerms Solver::energy(const SolverState& state) const {
  const Field t1 = frame_.evaluate(state.theta1);
  const Field t2 = frame_.evaluate(state.theta2);
  const DataTerms data = sample_data_terms(volumes_.cost.values, t1, t2, state.offsets);
  const Field b_weight = combined_boundary_weight(volumes_.b_occ, volumes_.b_mono, t1, config_.alphas);
  return occstereo::energy(state.phi, shifted_levelset_sample(state.phi, state.offsets), data, b_weight,
                           config_.eps, config_.mu);
}

SolveResult Solver::finish(const SolverState& state) const {
  SolveResult r;
  r.disparity = compose_disparity(state.phi, state.theta1, state.theta2, frame_);
  r.occlusion = occluded_mask(state.phi, shifted_levelset_sample(state.phi, state.offsets));
  r.phi = state.phi;
  r.consensus = state.consensus;
  r.theta1 = state.theta1;
  r.theta2 = state.theta2;
  r.trace = state.trace;
  r.converged = state.converged;
  return r;
}

SolveResult Solver::run(const EllipseSpec& ellipse, const Observer& observer) const {
  SolverState state = initial_state(ellipse);
  while (state.iteration < config_.max_iters && !state.converged) {
    step(state);
    if (observer) observer(state);
  }
  return finish(state);
}

SolveResult run(const StereoPair& pair, const SolverConfig& config, const EllipseSpec& ellipse) {
  return Solver(pair, config).run(ellipse);
}

}  // namespace occstereo
