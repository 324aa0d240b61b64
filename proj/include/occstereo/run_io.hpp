#pragma once

// Run configuration (flat JSON), scene specs, CSV writers and the run manifest.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "occstereo/harness.hpp"
#include "occstereo/level_set.hpp"
#include "occstereo/solver.hpp"

namespace occstereo {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct RunConfig {
  fs::path left;
  fs::path right;
  fs::path gt;           // optional PFM ground truth
  fs::path gt_boundary;  // optional boundary mask PNG
  fs::path out = "out";
  int d_max = 32;
  SolverConfig solver{};
  EllipseSpec ellipse{};
  bool ellipse_set = false;
  bool viz = true;
  bool trace = true;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on unknown keys or out-of-range values.
  static RunConfig from_json(const Json& j);
  Json to_json() const;
  void validate() const;
};

RunConfig load_run_config(const fs::path& path);

/// "cx,cy,rx,ry".
EllipseSpec parse_ellipse(const std::string& text);

SceneSpec scene_spec_from_json(const Json& j);
Json to_json(const SceneSpec& s);

Json to_json(const GlobalShape& s);
GlobalShape shape_from_json(const Json& j);
Json to_json(const TraceRecord& r);
Json to_json(const MetricsReport& m);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

void write_trace_csv(const fs::path& path, const std::vector<TraceRecord>& trace);

struct MetricsRow {
  std::string image;
  MetricsReport report;
};

/// Header "image,precision,recall,f1,bad4".
void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows);

struct RunManifest {
  Json config;
  std::string version;
  std::map<std::string, std::string> checksums;  // role -> sha256
  std::vector<TraceRecord> trace;
  bool converged = false;
  std::optional<MetricsReport> metrics;

  Json to_json() const;
};

/// Writes through a temporary sibling and renames it into place.
void write_text_atomic(const fs::path& path, const std::string& text);
void write_manifest(const fs::path& path, const RunManifest& m);

Json read_json(const fs::path& path);

std::string library_version();

}  // namespace occstereo
