#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "occstereo/image_io.hpp"
#include "occstereo/run_io.hpp"

using namespace occstereo;
using namespace testing;

namespace {

fs::path tmp_dir(const std::string& name) {
  const fs::path p = fs::path(OCCSTEREO_TEST_TMP) / name;
  fs::create_directories(p);
  return p;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string float_bytes(float f, bool little) {
  auto u = std::bit_cast<std::uint32_t>(f);
  std::string s(4, '\0');
  for (int i = 0; i < 4; ++i) {
    const int shift = little ? 8 * i : 8 * (3 - i);
    s[i] = static_cast<char>((u >> shift) & 0xff);
  }
  return s;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("PNG luminance") {
  const fs::path dir = tmp_dir("png");
  RgbImage img(3, 1);
  img.set(0, 0, {0, 0, 0});
  img.set(1, 0, {255, 255, 255});
  img.set(2, 0, {255, 0, 0});
  save_png(dir / "rgb.png", img);
  const Field f = load_image(dir / "rgb.png");
  REQUIRE(f.width() == 3);
  CHECK(f(0, 0) == 0.0);
  CHECK(f(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f(2, 0) == doctest::Approx(0.2126).epsilon(1e-12));

  const Field g = random_field(17, 9, 5);
  save_png_gray16(dir / "g16.png", g);
  const Field back = load_image(dir / "g16.png");
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(back.data()[i] - g.data()[i]) <= 0.5 / 65535 + 1e-12);

  Mask m(5, 4);
  m(2, 1) = 1;
  save_mask_png(dir / "m.png", m);
  CHECK(load_mask(dir / "m.png") == m);
}

TEST_CASE("PGM ingestion") {
  const fs::path dir = tmp_dir("pgm");
  write_bytes(dir / "a.pgm", std::string("P5\n# comment\n3 1\n255\n") + '\0' + '\x80' + '\xff');
  const Field f = load_image(dir / "a.pgm");
  CHECK(f(0, 0) == 0.0);
  CHECK(f(1, 0) == doctest::Approx(128.0 / 255));
  CHECK(f(2, 0) == 1.0);
  write_bytes(dir / "b.pgm", "P2 2 1 10 5 10\n");
  const Field a = load_image(dir / "b.pgm");
  CHECK(a(0, 0) == 0.5);
  CHECK(a(1, 0) == 1.0);
  write_bytes(dir / "c.pgm", "P5\n4 4\n255\nab");
  CHECK(code_of([&] { load_image(dir / "c.pgm"); }) == Errc::CorruptFile);
  write_bytes(dir / "d.txt", "hello");
  CHECK(code_of([&] { load_image(dir / "d.txt"); }) == Errc::UnsupportedFormat);
  CHECK(code_of([&] { load_image(dir / "missing.png"); }) == Errc::IoError);
}

TEST_CASE("PFM byte order and row order") {
  const fs::path dir = tmp_dir("pfm");
  // 2×2, rows bottom-to-top: bottom row (y=1) holds 3, 4.
  for (bool little : {true, false}) {
    std::string s = little ? "Pf\n2 2\n-1.0\n" : "Pf\n2 2\n1.0\n";
    for (float v : {3.0f, 4.0f, 1.0f, 2.5f}) s += float_bytes(v, little);
    const fs::path p = dir / (little ? "le.pfm" : "be.pfm");
    write_bytes(p, s);
    const DisparityMap d = load_pfm(p);
    CHECK(d(0, 0) == 1.0);
    CHECK(d(1, 0) == 2.5);
    CHECK(d(0, 1) == 3.0);
    CHECK(d(1, 1) == 4.0);
  }
  write_bytes(dir / "color.pfm", "PF\n1 1\n-1.0\n" + std::string(12, '\0'));
  CHECK(code_of([&] { load_pfm(dir / "color.pfm"); }) == Errc::BadHeader);
  write_bytes(dir / "dims.pfm", "Pf\n0 1\n-1.0\n");
  CHECK(code_of([&] { load_pfm(dir / "dims.pfm"); }) == Errc::BadHeader);
  write_bytes(dir / "short.pfm", "Pf\n2 2\n-1.0\n" + std::string(12, '\0'));
  CHECK(code_of([&] { load_pfm(dir / "short.pfm"); }) == Errc::TruncatedPayload);
}

TEST_CASE("PFM round trip") {
  const fs::path dir = tmp_dir("pfm");
  DisparityMap d(7, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 7; ++x) d(x, y) = static_cast<float>(0.37 * x - 1.25 * y + 0.001 * x * y);
  }
  d(3, 2) = kHoleDisparity;
  d(4, 4) = std::nan("");
  save_pfm(dir / "rt.pfm", d);
  const DisparityMap back = load_pfm(dir / "rt.pfm");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (std::isfinite(d.data()[i])) {
      CHECK(back.data()[i] == d.data()[i]);
    } else {
      CHECK(back.data()[i] == kHoleDisparity);
    }
  }
}

TEST_CASE("run configuration JSON") {
  const RunConfig c = RunConfig::from_json(Json::parse(R"({"left": "l.png", "right": "r.png", "mu": 2.5,
      "median_k": 5, "ellipse": [10, 12, 5, 6], "b_cap": 20})"));
  CHECK(c.left == "l.png");
  CHECK(c.solver.mu == 2.5);
  CHECK(c.solver.median_k == 5);
  CHECK(c.solver.boundary.b_cap == 20.0);
  CHECK(c.ellipse_set);
  CHECK(c.ellipse.rx == 5.0);
  const RunConfig again = RunConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());

  CHECK(code_of([] { RunConfig::from_json(Json::parse(R"({"mu": 1, "muu": 2})")); }) == Errc::InvalidArgument);
  CHECK(code_of([] { RunConfig::from_json(Json::parse(R"({"solver": {"mu": 1}})")); }) == Errc::InvalidArgument);
  CHECK(code_of([] { RunConfig::from_json(Json::parse(R"({"median_k": 4})")); }) == Errc::InvalidArgument);

  const EllipseSpec e = parse_ellipse("1.5,2,3,4");
  CHECK(e.cx == 1.5);
  CHECK(e.ry == 4.0);
  CHECK_THROWS_AS(parse_ellipse("1,2,3"), Error);
  CHECK_THROWS_AS(parse_ellipse("1,2,x,4"), Error);
}

TEST_CASE("scene spec JSON") {
  SceneSpec s;
  s.fg = GlobalShape{{0.1, 0.2, 0.3, 0.4, 0.5, 22.0}};
  s.texture = TextureKind::Stripes;
  s.seed = 99;
  const SceneSpec back = scene_spec_from_json(to_json(s));
  CHECK(back.fg == s.fg);
  CHECK(back.texture == TextureKind::Stripes);
  CHECK(back.seed == 99);
  CHECK(shape_from_json(Json(7.0)) == GlobalShape::constant(7.0));
  CHECK_THROWS_AS(shape_from_json(Json::parse("[1, 2]")), Error);
}

TEST_CASE("SHA-256 checksums") {
  const fs::path dir = tmp_dir("sha");
  write_bytes(dir / "abc", "abc");
  CHECK(sha256_file(dir / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  write_bytes(dir / "empty", "");
  CHECK(sha256_file(dir / "empty") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  write_bytes(dir / "abd", "abd");
  CHECK(sha256_file(dir / "abd") != sha256_file(dir / "abc"));
}

TEST_CASE("manifest and CSV writers") {
  const fs::path dir = tmp_dir("manifest");
  RunManifest m;
  m.config = RunConfig{}.to_json();
  m.version = library_version();
  m.checksums["left"] = "00";
  TraceRecord r;
  r.iteration = 1;
  r.energy.foreground = 0.1;
  m.trace.push_back(r);
  write_manifest(dir / "a.json", m);
  write_manifest(dir / "b.json", m);
  CHECK(sha256_file(dir / "a.json") == sha256_file(dir / "b.json"));
  CHECK_FALSE(fs::exists(dir / "a.json.tmp"));
  const Json j = read_json(dir / "a.json");
  CHECK(j.at("iterations") == 1);
  CHECK(j.at("metrics").is_null());

  write_metrics_csv(dir / "metrics.csv", {{"scene", MetricsReport{}}});
  std::ifstream in(dir / "metrics.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "image,precision,recall,f1,bad4");

  write_trace_csv(dir / "trace.csv", m.trace);
  std::ifstream t(dir / "trace.csv");
  std::string line;
  int lines = 0;
  while (std::getline(t, line)) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("visualization colors") {
  DisparityMap d(3, 1);
  d(0, 0) = 8.0;
  d(1, 0) = 4.0;
  d(2, 0) = kHoleDisparity;
  Mask occ(3, 1);
  occ(1, 0) = 1;
  const RgbImage img = render_disparity(d, occ, 8.0);
  CHECK(img.at(0, 0) == turbo(1.0));
  CHECK(img.at(1, 0) == kOcclusionColor);
  CHECK(img.at(2, 0) == kHoleColor);
  CHECK(kOcclusionColor == Rgb{0, 0, 139});
  CHECK(turbo(2.0) == turbo(1.0));
  CHECK(turbo(-1.0) == turbo(0.0));
  CHECK(turbo(0.0) != turbo(1.0));

  const RgbImage s = render_scalar(Field(2, 1, std::nan("")), 0.0, 1.0);
  CHECK(s.at(0, 0) == Rgb{0, 0, 0});
}
