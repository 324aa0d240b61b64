#include "occstereo/run_io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

namespace occstereo {

std::string library_version() { return OCCSTEREO_VERSION; }

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::InvalidArgument, what); }

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad(std::string("config key '") + key + "' has the wrong type");
  }
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) bad(std::string(what) + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) bad(std::string("unknown ") + what + " key '" + k + "'");
  }
}

}  // namespace

RunConfig RunConfig::from_json(const Json& j) {
  static const std::set<std::string> keys = {
      "left",     "right",         "gt",           "gt_boundary", "out",    "d_max",      "dt",
      "eps",      "mu",            "alpha1",       "alpha2",      "alpha3", "beta",       "max_iters",
      "reinit_every", "median_k",  "phi_tol",      "converge_window", "levels", "patch_base", "stride_ratio",
      "eps_b",    "b_cap",         "sigma_g",      "ray_step",    "seed",   "ellipse",    "viz",
      "trace"};
  check_keys(j, keys, "config");
  RunConfig c;
  SolverConfig& s = c.solver;
  if (j.contains("left")) c.left = get<std::string>(j, "left");
  if (j.contains("right")) c.right = get<std::string>(j, "right");
  if (j.contains("gt")) c.gt = get<std::string>(j, "gt");
  if (j.contains("gt_boundary")) c.gt_boundary = get<std::string>(j, "gt_boundary");
  if (j.contains("out")) c.out = get<std::string>(j, "out");
  if (j.contains("d_max")) c.d_max = get<int>(j, "d_max");
  if (j.contains("dt")) s.dt = get<double>(j, "dt");
  if (j.contains("eps")) s.eps = get<double>(j, "eps");
  if (j.contains("mu")) s.mu = get<double>(j, "mu");
  if (j.contains("alpha1")) s.alphas.alpha1 = get<double>(j, "alpha1");
  if (j.contains("alpha2")) s.alphas.alpha2 = get<double>(j, "alpha2");
  if (j.contains("alpha3")) s.alphas.alpha3 = get<double>(j, "alpha3");
  if (j.contains("beta") && !j.at("beta").is_null()) s.beta = get<double>(j, "beta");
  if (j.contains("max_iters")) s.max_iters = get<int>(j, "max_iters");
  if (j.contains("reinit_every")) s.reinit_every = get<int>(j, "reinit_every");
  if (j.contains("median_k")) s.median_k = get<int>(j, "median_k");
  if (j.contains("phi_tol")) s.phi_tol = get<double>(j, "phi_tol");
  if (j.contains("converge_window")) s.converge_window = get<int>(j, "converge_window");
  if (j.contains("levels")) s.hierarchy.levels = get<int>(j, "levels");
  if (j.contains("patch_base")) s.hierarchy.base = get<int>(j, "patch_base");
  if (j.contains("stride_ratio")) s.hierarchy.stride_ratio = get<double>(j, "stride_ratio");
  if (j.contains("eps_b")) s.boundary.eps_b = get<double>(j, "eps_b");
  if (j.contains("b_cap")) s.boundary.b_cap = get<double>(j, "b_cap");
  if (j.contains("sigma_g")) s.boundary.sigma_g = get<double>(j, "sigma_g");
  if (j.contains("ray_step")) s.ray_step = get<double>(j, "ray_step");
  if (j.contains("seed")) c.seed = s.rng_seed = get<std::uint64_t>(j, "seed");
  if (j.contains("viz")) c.viz = get<bool>(j, "viz");
  if (j.contains("trace")) c.trace = get<bool>(j, "trace");
  if (j.contains("ellipse")) {
    const auto e = get<std::vector<double>>(j, "ellipse");
    if (e.size() != 4) bad("config key 'ellipse' must hold [cx, cy, rx, ry]");
    c.ellipse = {e[0], e[1], e[2], e[3]};
    c.ellipse_set = true;
  }
  c.validate();
  return c;
}

Json RunConfig::to_json() const {
  Json j;
  j["left"] = left.string();
  j["right"] = right.string();
  if (!gt.empty()) j["gt"] = gt.string();
  if (!gt_boundary.empty()) j["gt_boundary"] = gt_boundary.string();
  j["out"] = out.string();
  j["d_max"] = d_max;
  j["dt"] = solver.dt;
  j["eps"] = solver.eps;
  j["mu"] = solver.mu;
  j["alpha1"] = solver.alphas.alpha1;
  j["alpha2"] = solver.alphas.alpha2;
  j["alpha3"] = solver.alphas.alpha3;
  j["beta"] = solver.beta ? Json(*solver.beta) : Json(nullptr);
  j["max_iters"] = solver.max_iters;
  j["reinit_every"] = solver.reinit_every;
  j["median_k"] = solver.median_k;
  j["phi_tol"] = solver.phi_tol;
  j["converge_window"] = solver.converge_window;
  j["levels"] = solver.hierarchy.levels;
  j["patch_base"] = solver.hierarchy.base;
  j["stride_ratio"] = solver.hierarchy.stride_ratio;
  j["eps_b"] = solver.boundary.eps_b;
  j["b_cap"] = solver.boundary.b_cap;
  j["sigma_g"] = solver.boundary.sigma_g;
  j["ray_step"] = solver.ray_step;
  j["seed"] = seed;
  if (ellipse_set) j["ellipse"] = {ellipse.cx, ellipse.cy, ellipse.rx, ellipse.ry};
  j["viz"] = viz;
  j["trace"] = trace;
  return j;
}

void RunConfig::validate() const {
  if (d_max < 1) bad("d_max must be >= 1");
  if (ellipse_set && !(ellipse.rx > 0.0 && ellipse.ry > 0.0)) bad("ellipse radii must be positive");
  solver.validate();
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::InvalidArgument, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

RunConfig load_run_config(const fs::path& path) { return RunConfig::from_json(read_json(path)); }

EllipseSpec parse_ellipse(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      bad("ellipse must be 'cx,cy,rx,ry', got '" + text + "'");
    }
  }
  if (v.size() != 4) bad("ellipse must be 'cx,cy,rx,ry', got '" + text + "'");
  if (!(v[2] > 0.0 && v[3] > 0.0)) bad("ellipse radii must be positive");
  return {v[0], v[1], v[2], v[3]};
}

Json to_json(const GlobalShape& s) { return Json(std::vector<double>(s.coeffs.begin(), s.coeffs.end())); }

GlobalShape shape_from_json(const Json& j) {
  GlobalShape s;
  if (j.is_number()) return GlobalShape::constant(j.get<double>());
  std::vector<double> c;
  try {
    c = j.get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    bad("shape must be a number or 6 coefficients");
  }
  if (c.size() != kShapeTerms) bad("shape must have 6 coefficients");
  std::copy(c.begin(), c.end(), s.coeffs.begin());
  return s;
}

SceneSpec scene_spec_from_json(const Json& j) {
  check_keys(j,
             {"width", "height", "d_max", "region", "cx", "cy", "rx", "ry", "fg", "bg", "seed", "texture",
              "noise_level", "texture_scale", "allow_degenerate"},
             "scene");
  SceneSpec s;
  if (j.contains("width")) s.width = get<int>(j, "width");
  if (j.contains("height")) s.height = get<int>(j, "height");
  if (j.contains("d_max")) s.d_max = get<int>(j, "d_max");
  if (j.contains("region")) s.region = region_kind_from_string(get<std::string>(j, "region"));
  if (j.contains("cx")) s.cx = get<double>(j, "cx");
  if (j.contains("cy")) s.cy = get<double>(j, "cy");
  if (j.contains("rx")) s.rx = get<double>(j, "rx");
  if (j.contains("ry")) s.ry = get<double>(j, "ry");
  if (j.contains("fg")) s.fg = shape_from_json(j.at("fg"));
  if (j.contains("bg")) s.bg = shape_from_json(j.at("bg"));
  if (j.contains("seed")) s.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("texture")) s.texture = texture_kind_from_string(get<std::string>(j, "texture"));
  if (j.contains("noise_level")) s.noise_level = get<double>(j, "noise_level");
  if (j.contains("texture_scale")) s.texture_scale = get<double>(j, "texture_scale");
  if (j.contains("allow_degenerate")) s.allow_degenerate = get<bool>(j, "allow_degenerate");
  if (!(s.noise_level >= 0.0 && s.noise_level <= 1.0)) bad("noise_level must lie in [0, 1]");
  return s;
}

Json to_json(const SceneSpec& s) {
  Json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["d_max"] = s.d_max;
  j["region"] = to_string(s.region);
  j["cx"] = s.cx;
  j["cy"] = s.cy;
  j["rx"] = s.rx;
  j["ry"] = s.ry;
  j["fg"] = to_json(s.fg);
  j["bg"] = to_json(s.bg);
  j["seed"] = s.seed;
  j["texture"] = to_string(s.texture);
  j["noise_level"] = s.noise_level;
  j["texture_scale"] = s.texture_scale;
  j["allow_degenerate"] = s.allow_degenerate;
  return j;
}

Json to_json(const TraceRecord& r) {
  Json j;
  j["iteration"] = r.iteration;
  j["energy"] = {{"total", r.energy.total()},
                 {"foreground", r.energy.foreground},
                 {"background", r.energy.background},
                 {"boundary", r.energy.boundary}};
  j["flip_fraction"] = r.flip_fraction;
  j["theta1"] = to_json(r.theta1);
  j["theta2"] = to_json(r.theta2);
  if (r.theta1_kept || r.theta2_kept) {
    j["warning"] = std::string("rank-deficient fit, kept previous ") +
                   (r.theta1_kept && r.theta2_kept ? "theta1 and theta2" : r.theta1_kept ? "theta1" : "theta2");
  }
  return j;
}

Json to_json(const MetricsReport& m) {
  return Json{{"precision", m.precision},
              {"recall", m.recall},
              {"f1", m.f1},
              {"bad4", m.bad4},
              {"band_pixels", m.band_pixels},
              {"visible_pixels", m.visible_pixels},
              {"precision_undefined", m.precision_undefined},
              {"recall_undefined", m.recall_undefined}};
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::IoError, "SHA-256 initialization failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

void write_trace_csv(const fs::path& path, const std::vector<TraceRecord>& trace) {
  std::ostringstream out;
  out << "iteration,energy,foreground,background,boundary,flip_fraction";
  for (int k = 0; k < kShapeTerms; ++k) out << ",theta1_" << k;
  for (int k = 0; k < kShapeTerms; ++k) out << ",theta2_" << k;
  out << ",shape_kept\n";
  for (const TraceRecord& r : trace) {
    out << r.iteration << ',' << fmt(r.energy.total()) << ',' << fmt(r.energy.foreground) << ','
        << fmt(r.energy.background) << ',' << fmt(r.energy.boundary) << ',' << fmt(r.flip_fraction);
    for (double c : r.theta1.coeffs) out << ',' << fmt(c);
    for (double c : r.theta2.coeffs) out << ',' << fmt(c);
    out << ',' << (r.theta1_kept ? 1 : 0) + (r.theta2_kept ? 2 : 0) << '\n';
  }
  write_text_atomic(path, out.str());
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "image,precision,recall,f1,bad4\n";
  for (const MetricsRow& r : rows) {
    out << r.image << ',' << fmt(r.report.precision) << ',' << fmt(r.report.recall) << ',' << fmt(r.report.f1)
        << ',' << fmt(r.report.bad4) << '\n';
  }
  write_text_atomic(path, out.str());
}

Json RunManifest::to_json() const {
  Json j;
  j["version"] = version;
  j["config"] = config;
  Json sums = Json::object();
  for (const auto& [role, sum] : checksums) sums[role] = sum;
  j["inputs"] = sums;
  j["converged"] = converged;
  j["iterations"] = trace.size();
  Json t = Json::array();
  for (const TraceRecord& r : trace) t.push_back(occstereo::to_json(r));
  j["trace"] = std::move(t);
  j["metrics"] = metrics ? occstereo::to_json(*metrics) : Json(nullptr);
  return j;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw Error(Errc::IoError, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::IoError, "cannot move '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

void write_manifest(const fs::path& path, const RunManifest& m) { write_text_atomic(path, m.to_json().dump(2) + "\n"); }

}  // namespace occstereo
