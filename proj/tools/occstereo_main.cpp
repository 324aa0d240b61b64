// occstereo: two-layer occlusion-aware stereo from the command line.
//
//   occstereo run   --config run.json [overrides]
//   occstereo synth --spec scene.json --out dir
//   occstereo eval  --pred disparity.pfm --gt gt.pfm --boundary gt_boundary.png
//   occstereo viz   --dir run_output
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "occstereo/harness.hpp"
#include "occstereo/image_io.hpp"
#include "occstereo/occlusion.hpp"
#include "occstereo/run_io.hpp"
#include "occstereo/solver.hpp"

namespace {

using namespace occstereo;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunArgs {
  std::string config, left, right, gt, gt_boundary, out, ellipse;
  std::optional<int> max_iters, d_max, median_k, reinit_every, levels, patch_base;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, eps, mu, alpha1, alpha2, alpha3, beta, phi_tol, eps_b, b_cap, sigma_g;
  bool no_viz = false;
  bool no_trace = false;
  bool quiet = false;
};

RunConfig resolve(const RunArgs& a) {
  RunConfig c = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  if (!a.left.empty()) c.left = a.left;
  if (!a.right.empty()) c.right = a.right;
  if (!a.gt.empty()) c.gt = a.gt;
  if (!a.gt_boundary.empty()) c.gt_boundary = a.gt_boundary;
  if (!a.out.empty()) c.out = a.out;
  if (!a.ellipse.empty()) {
    c.ellipse = parse_ellipse(a.ellipse);
    c.ellipse_set = true;
  }
  SolverConfig& s = c.solver;
  if (a.max_iters) s.max_iters = *a.max_iters;
  if (a.d_max) c.d_max = *a.d_max;
  if (a.median_k) s.median_k = *a.median_k;
  if (a.reinit_every) s.reinit_every = *a.reinit_every;
  if (a.levels) s.hierarchy.levels = *a.levels;
  if (a.patch_base) s.hierarchy.base = *a.patch_base;
  if (a.seed) c.seed = s.rng_seed = *a.seed;
  if (a.dt) s.dt = *a.dt;
  if (a.eps) s.eps = *a.eps;
  if (a.mu) s.mu = *a.mu;
  if (a.alpha1) s.alphas.alpha1 = *a.alpha1;
  if (a.alpha2) s.alphas.alpha2 = *a.alpha2;
  if (a.alpha3) s.alphas.alpha3 = *a.alpha3;
  if (a.beta) s.beta = *a.beta;
  if (a.phi_tol) s.phi_tol = *a.phi_tol;
  if (a.eps_b) s.boundary.eps_b = *a.eps_b;
  if (a.b_cap) s.boundary.b_cap = *a.b_cap;
  if (a.sigma_g) s.boundary.sigma_g = *a.sigma_g;
  if (a.no_viz) c.viz = false;
  if (a.no_trace) c.trace = false;
  if (c.left.empty() || c.right.empty()) throw UsageError("run needs --left and --right (or a config naming them)");
  if (!c.ellipse_set) throw UsageError("run needs an initial --ellipse cx,cy,rx,ry (or 'ellipse' in the config)");
  c.validate();
  return c;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create '" + dir.string() + "': " + ec.message());
}

int cmd_run(const RunArgs& args) {
  const RunConfig cfg = resolve(args);
  StereoPair pair{load_image(cfg.left), load_image(cfg.right), cfg.d_max};
  if (!pair.left.same_shape(pair.right)) {
    throw Error(Errc::InvalidArgument, "'" + cfg.left.string() + "' and '" + cfg.right.string() + "' differ in size");
  }
  RunManifest manifest;
  manifest.config = cfg.to_json();
  manifest.version = library_version();
  manifest.checksums["left"] = sha256_file(cfg.left);
  manifest.checksums["right"] = sha256_file(cfg.right);

  std::optional<DisparityMap> gt;
  Mask boundary;
  if (!cfg.gt.empty()) {
    gt = load_pfm(cfg.gt);
    manifest.checksums["gt"] = sha256_file(cfg.gt);
    if (!gt->same_shape(pair.left)) throw Error(Errc::InvalidArgument, "'" + cfg.gt.string() + "' size mismatch");
    if (!cfg.gt_boundary.empty()) {
      boundary = load_mask(cfg.gt_boundary);
      manifest.checksums["gt_boundary"] = sha256_file(cfg.gt_boundary);
      require_same_shape(boundary, *gt, "gt boundary");
    } else {
      boundary = boundary_from_disparity(*gt);
    }
  }

  const Solver solver(pair, cfg.solver);
  const SolveResult result = solver.run(cfg.ellipse, [&](const SolverState& s) {
    if (!args.quiet && s.iteration % 50 == 0) {
      const TraceRecord& r = s.trace.back();
      std::fprintf(stderr, "iter %d  J=%.6g  flips=%.3g\n", r.iteration, r.energy.total(), r.flip_fraction);
    }
  });

  make_dir(cfg.out);
  save_pfm(cfg.out / "disparity.pfm", result.disparity);
  save_pfm(cfg.out / "phi.pfm", result.phi);
  save_pfm(cfg.out / "consensus_mean.pfm", result.consensus.mean);
  save_pfm(cfg.out / "consensus_sigma.pfm", result.consensus.sigma);
  save_mask_png(cfg.out / "occlusion.png", result.occlusion);
  save_visualizations(result, pair.left, cfg.d_max, cfg.out, {cfg.viz, cfg.trace});

  manifest.trace = result.trace;
  manifest.converged = result.converged;
  if (gt) {
    const OcclusionMask gt_occ = gt_occlusion_from_disparity(*gt);
    manifest.metrics = evaluate(result.disparity, result.occlusion, *gt, gt_occ, boundary);
    write_metrics_csv(cfg.out / "metrics.csv", {{cfg.left.filename().string(), *manifest.metrics}});
  }
  write_manifest(cfg.out / "manifest.json", manifest);
  std::printf("%s: %zu iterations, %s\n", cfg.out.string().c_str(), result.trace.size(),
              result.converged ? "converged" : "iteration cap reached");
  if (manifest.metrics) {
    std::printf("f1=%.4f bad4=%.4f\n", manifest.metrics->f1, manifest.metrics->bad4);
  }
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out, std::optional<std::uint64_t> seed) {
  SceneSpec spec = spec_path.empty() ? SceneSpec{} : scene_spec_from_json(read_json(spec_path));
  if (seed) spec.seed = *seed;
  const Scene sc = generate_scene(spec);
  const fs::path dir = out;
  make_dir(dir);
  save_png_gray16(dir / "left.png", sc.pair.left);
  save_png_gray16(dir / "right.png", sc.pair.right);
  save_pfm(dir / "gt_disparity.pfm", sc.disparity);
  save_mask_png(dir / "gt_occlusion.png", sc.occlusion);
  save_mask_png(dir / "gt_boundary.png", sc.boundary);
  write_text_atomic(dir / "scene.json", to_json(spec).dump(2) + "\n");

  // A ready-to-run configuration with the true region as the initial ellipse.
  RunConfig rc;
  rc.left = dir / "left.png";
  rc.right = dir / "right.png";
  rc.gt = dir / "gt_disparity.pfm";
  rc.gt_boundary = dir / "gt_boundary.png";
  rc.out = dir / "run";
  rc.d_max = spec.d_max;
  rc.ellipse = {spec.cx, spec.cy, spec.rx, spec.ry};
  rc.ellipse_set = true;
  rc.seed = spec.seed;
  write_text_atomic(dir / "run_config.json", rc.to_json().dump(2) + "\n");
  std::printf("%s: %dx%d scene, %zu occluded pixels\n", dir.string().c_str(), spec.width, spec.height,
              count_set(sc.occlusion));
  return 0;
}

struct EvalArgs {
  std::string pred, pred_occ, gt, gt_occ, boundary, out, name;
  int radius = kEvalBandRadius;
};

int cmd_eval(const EvalArgs& a) {
  const DisparityMap pred = load_pfm(a.pred);
  const fs::path occ_path = a.pred_occ.empty() ? fs::path(a.pred).parent_path() / "occlusion.png" : fs::path(a.pred_occ);
  const OcclusionMask pred_occ = load_mask(occ_path);
  const DisparityMap gt = load_pfm(a.gt);
  const OcclusionMask gt_occ = a.gt_occ.empty() ? gt_occlusion_from_disparity(gt) : load_mask(a.gt_occ);
  const Mask boundary = a.boundary.empty() ? boundary_from_disparity(gt) : load_mask(a.boundary);
  require_same_shape(pred, gt, "eval");
  require_same_shape(pred_occ, gt, "eval");
  require_same_shape(gt_occ, gt, "eval");
  require_same_shape(boundary, gt, "eval");
  const MetricsReport m = evaluate(pred, pred_occ, gt, gt_occ, boundary, a.radius);
  const std::string name = a.name.empty() ? fs::path(a.pred).filename().string() : a.name;
  if (!a.out.empty()) {
    make_dir(a.out);
    write_metrics_csv(fs::path(a.out) / "metrics.csv", {{name, m}});
  }
  std::printf("image,precision,recall,f1,bad4\n%s,%.6f,%.6f,%.6f,%.6f\n", name.c_str(), m.precision, m.recall, m.f1,
              m.bad4);
  return 0;
}

int cmd_viz(const std::string& dir_arg, const std::string& left_arg) {
  const fs::path dir = dir_arg;
  const Json manifest = read_json(dir / "manifest.json");
  const double d_max = manifest.at("config").value("d_max", 32);
  SolveResult r;
  r.disparity = load_pfm(dir / "disparity.pfm");
  r.phi = load_pfm(dir / "phi.pfm");
  r.occlusion = load_mask(dir / "occlusion.png");
  r.consensus.mean = load_pfm(dir / "consensus_mean.pfm");
  r.consensus.sigma = load_pfm(dir / "consensus_sigma.pfm");
  const std::string left = left_arg.empty() ? manifest.at("config").value("left", "") : left_arg;
  const Field image = left.empty() ? Field(r.phi.width(), r.phi.height(), 0.5) : load_image(left);
  save_visualizations(r, image, d_max, dir, {true, false});
  std::printf("%s: visualizations rewritten\n", dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-layer occlusion-aware stereo boundary estimation"};
  app.set_version_flag("--version", library_version());
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Estimate foreground boundary, disparity and occlusions for a stereo pair");
  run->add_option("--config", ra.config, "JSON run configuration");
  run->add_option("--left", ra.left, "Left image (PNG or PGM)");
  run->add_option("--right", ra.right, "Right image (PNG or PGM)");
  run->add_option("--gt", ra.gt, "Ground-truth disparity (PFM) for metrics");
  run->add_option("--gt-boundary", ra.gt_boundary, "Ground-truth boundary mask (PNG)");
  run->add_option("--out", ra.out, "Output directory");
  run->add_option("--ellipse", ra.ellipse, "Initial ellipse cx,cy,rx,ry");
  run->add_option("--max-iters", ra.max_iters, "Iteration cap");
  run->add_option("--seed", ra.seed, "Seed recorded in the manifest");
  run->add_option("--d-max", ra.d_max, "Maximum disparity");
  run->add_option("--dt", ra.dt, "Descent step");
  run->add_option("--eps", ra.eps, "Heaviside/Dirac width (px)");
  run->add_option("--mu", ra.mu, "Boundary-length weight");
  run->add_option("--alpha1", ra.alpha1, "Weight of the occlusion boundary cost");
  run->add_option("--alpha2", ra.alpha2, "Weight of the intensity-edge boundary cost");
  run->add_option("--alpha3", ra.alpha3, "Constant length penalty");
  run->add_option("--beta", ra.beta, "Disparity regularizer weight (default 0.4/d_max)");
  run->add_option("--phi-tol", ra.phi_tol, "Sign-flip fraction counted as no change");
  run->add_option("--median-k", ra.median_k, "Median window (odd)");
  run->add_option("--reinit-every", ra.reinit_every, "Reinitialization period");
  run->add_option("--levels", ra.levels, "Patch hierarchy levels");
  run->add_option("--patch-base", ra.patch_base, "Side of the smallest non-pixel patch");
  run->add_option("--eps-b", ra.eps_b, "Boundary cost offset");
  run->add_option("--b-cap", ra.b_cap, "Boundary cost ceiling");
  run->add_option("--sigma-g", ra.sigma_g, "Gaussian derivative scale (px)");
  run->add_flag("--no-viz", ra.no_viz, "Skip PNG visualizations");
  run->add_flag("--no-trace", ra.no_trace, "Skip trace.csv");
  run->add_flag("--quiet", ra.quiet, "No progress output");

  std::string spec_path, synth_out = "scene";
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-layer scene with ground truth");
  synth->add_option("--spec", spec_path, "Scene JSON (defaults: 256x256 disk, d 20 over 4)");
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--seed", synth_seed, "Texture seed override");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score a disparity/occlusion estimate against ground truth");
  eval->add_option("--pred", ea.pred, "Predicted disparity (PFM)")->required();
  eval->add_option("--pred-occ", ea.pred_occ, "Predicted occlusion mask (default: occlusion.png beside --pred)");
  eval->add_option("--gt", ea.gt, "Ground-truth disparity (PFM)")->required();
  eval->add_option("--gt-occ", ea.gt_occ, "Ground-truth occlusion mask (default: derived from --gt)");
  eval->add_option("--boundary", ea.boundary, "Ground-truth boundary mask (default: derived from --gt)");
  eval->add_option("--radius", ea.radius, "Half width of the evaluation band (px)");
  eval->add_option("--name", ea.name, "Row label in metrics.csv");
  eval->add_option("--out", ea.out, "Directory for metrics.csv");

  std::string viz_dir, viz_left;
  auto* viz = app.add_subcommand("viz", "Re-render the images of a finished run");
  viz->add_option("--dir", viz_dir, "Run output directory")->required();
  viz->add_option("--left", viz_left, "Left image for the contour overlay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*run) return cmd_run(ra);
    if (*synth) return cmd_synth(spec_path, synth_out, synth_seed);
    if (*eval) return cmd_eval(ea);
    if (*viz) return cmd_viz(viz_dir, viz_left);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
