#include "occstereo/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <sstream>

#include "occstereo/run_io.hpp"

namespace occstereo {

namespace {

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

double luminance(double r, double g, double b) { return 0.2126 * r + 0.7152 * g + 0.0722 * b; }

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

Field load_png(const fs::path& path) {
  PngReader r;
  r.fp = std::fopen(path.c_str(), "rb");
  if (!r.fp) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw Error(Errc::IoError, "libpng initialization failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw Error(Errc::IoError, "libpng initialization failed");

  std::vector<std::uint8_t> buf;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  int depth = 0, channels = 0;
  if (setjmp(png_jmpbuf(r.png))) {
    throw Error(Errc::CorruptFile, "'" + path.string() + "' is not a readable PNG");
  }
  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);
  const int color = png_get_color_type(r.png, r.info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(r.png, r.info) < 8) png_set_expand_gray_1_2_4_to_8(r.png);
  if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
  png_set_strip_alpha(r.png);
  png_read_update_info(r.png, r.info);
  w = png_get_image_width(r.png, r.info);
  h = png_get_image_height(r.png, r.info);
  depth = png_get_bit_depth(r.png, r.info);
  channels = png_get_channels(r.png, r.info);
  const std::size_t stride = png_get_rowbytes(r.png, r.info);
  buf.resize(stride * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + y * stride;
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);

  if ((depth != 8 && depth != 16) || (channels != 1 && channels != 3)) {
    throw Error(Errc::UnsupportedFormat, "'" + path.string() + "' has an unsupported PNG layout");
  }
  Field out(static_cast<int>(w), static_cast<int>(h));
  const double scale = depth == 8 ? 255.0 : 65535.0;
  for (png_uint_32 y = 0; y < h; ++y) {
    const std::uint8_t* p = rows[y];
    for (png_uint_32 x = 0; x < w; ++x) {
      double c[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < channels; ++k) {
        const std::size_t i = (static_cast<std::size_t>(x) * channels + k) * (depth / 8);
        c[k] = (depth == 8 ? p[i] : (p[i] << 8 | p[i + 1])) / scale;
      }
      out(static_cast<int>(x), static_cast<int>(y)) = channels == 1 ? c[0] : luminance(c[0], c[1], c[2]);
    }
  }
  return out;
}

Field load_pgm(const fs::path& path, const std::vector<char>& bytes) {
  std::size_t pos = 2;
  auto next_token = [&]() -> long {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    long v = 0;
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000'000) throw Error(Errc::CorruptFile, "'" + path.string() + "': header value too large");
      ++pos;
    }
    if (pos == start) throw Error(Errc::CorruptFile, "'" + path.string() + "': malformed PGM header");
    return v;
  };
  const bool binary = bytes[1] == '5';
  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) {
    throw Error(Errc::CorruptFile, "'" + path.string() + "': invalid PGM dimensions or maxval");
  }
  Field out(static_cast<int>(w), static_cast<int>(h));
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bps = maxval < 256 ? 1 : 2;
    if (bytes.size() < pos + n * bps) throw Error(Errc::CorruptFile, "'" + path.string() + "': truncated PGM data");
    const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data() + pos);
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = bps == 1 ? p[i] : (p[2 * i] << 8 | p[2 * i + 1]);
      out.data()[i] = std::min(1.0, static_cast<double>(v) / maxval);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = std::min(1.0, static_cast<double>(next_token()) / maxval);
  }
  return out;
}

}  // namespace

Field load_image(const fs::path& path) {
  const std::vector<char> bytes = read_bytes(path);
  static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) return load_png(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2')) return load_pgm(path, bytes);
  throw Error(Errc::UnsupportedFormat, "'" + path.string() + "' is neither PNG nor grayscale PGM");
}

Mask load_mask(const fs::path& path) {
  const Field f = load_image(path);
  Mask m(f.width(), f.height());
  for (std::size_t i = 0; i < f.size(); ++i) m.data()[i] = f.data()[i] > 0.5;
  return m;
}

DisparityMap load_pfm(const fs::path& path) {
  const std::vector<char> bytes = read_bytes(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw Error(Errc::BadHeader, "'" + path.string() + "': incomplete PFM header");
    return std::string(bytes.data() + start, pos - start);
  };
  const std::string magic = token();
  if (magic != "Pf") {
    throw Error(Errc::BadHeader, "'" + path.string() + "': expected single-channel 'Pf', got '" + magic + "'");
  }
  long w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stol(token());
    h = std::stol(token());
    scale = std::stod(token());
  } catch (const std::logic_error&) {
    throw Error(Errc::BadHeader, "'" + path.string() + "': malformed PFM header");
  }
  if (w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20) || scale == 0.0 || !std::isfinite(scale)) {
    throw Error(Errc::BadHeader, "'" + path.string() + "': invalid PFM dimensions or scale");
  }
  if (pos >= bytes.size()) throw Error(Errc::TruncatedPayload, "'" + path.string() + "': no PFM payload");
  ++pos;  // single whitespace terminating the header
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos < n * 4) {
    throw Error(Errc::TruncatedPayload, "'" + path.string() + "': expected " + std::to_string(n * 4) +
                                            " payload bytes, found " + std::to_string(bytes.size() - pos));
  }
  const bool file_le = scale < 0.0;
  const bool host_le = std::endian::native == std::endian::little;
  DisparityMap d(static_cast<int>(w), static_cast<int>(h));
  const char* p = bytes.data() + pos;
  for (long row = 0; row < h; ++row) {
    const int y = static_cast<int>(h - 1 - row);
    for (long x = 0; x < w; ++x) {
      std::uint32_t u;
      std::memcpy(&u, p + (static_cast<std::size_t>(row) * w + x) * 4, 4);
      if (file_le != host_le) u = __builtin_bswap32(u);
      const float f = std::bit_cast<float>(u);
      d(static_cast<int>(x), y) = std::isfinite(f) ? static_cast<double>(f) : kHoleDisparity;
    }
  }
  return d;
}

void save_pfm(const fs::path& path, const DisparityMap& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  out << "Pf\n" << d.width() << ' ' << d.height() << "\n-1\n";
  std::vector<char> buf(static_cast<std::size_t>(d.width()) * 4);
  for (int y = d.height() - 1; y >= 0; --y) {
    for (int x = 0; x < d.width(); ++x) {
      const double v = d(x, y);
      const float f = std::isfinite(v) ? static_cast<float>(v) : std::numeric_limits<float>::infinity();
      std::uint32_t u = std::bit_cast<std::uint32_t>(f);
      if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
      std::memcpy(buf.data() + static_cast<std::size_t>(x) * 4, &u, 4);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw Error(Errc::IoError, "short write to '" + path.string() + "'");
}

Rgb RgbImage::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void RgbImage::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels[i] = c[0];
  pixels[i + 1] = c[1];
  pixels[i + 2] = c[2];
}

// Polynomial fit of the turbo colormap.
Rgb turbo(double t) {
  t = std::isfinite(t) ? std::clamp(t, 0.0, 1.0) : 0.0;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double r = 0.13572138 + 4.61539260 * t - 42.66032258 * t2 + 132.13108234 * t3 - 152.94239396 * t4 +
                   59.28637943 * t5;
  const double g = 0.09140261 + 2.19418839 * t + 4.84296658 * t2 - 14.18503333 * t3 + 4.27729857 * t4 +
                   2.82956604 * t5;
  const double b = 0.10667330 + 12.64194608 * t - 60.58204836 * t2 + 110.36276771 * t3 - 89.90310912 * t4 +
                   27.34824973 * t5;
  auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  return {q(r), q(g), q(b)};
}

namespace {

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_png(const fs::path& path, int w, int h, int color_type, int depth, std::vector<std::uint8_t>& data) {
  PngWriter wr;
  wr.fp = std::fopen(path.c_str(), "wb");
  if (!wr.fp) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!wr.png) throw Error(Errc::IoError, "libpng initialization failed");
  wr.info = png_create_info_struct(wr.png);
  if (!wr.info) throw Error(Errc::IoError, "libpng initialization failed");
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = static_cast<std::size_t>(w) * channels * (depth / 8);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[y] = data.data() + y * stride;
  if (setjmp(png_jmpbuf(wr.png))) throw Error(Errc::IoError, "failed writing '" + path.string() + "'");
  png_init_io(wr.png, wr.fp);
  png_set_IHDR(wr.png, wr.info, w, h, depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(wr.png, wr.info);
  png_write_image(wr.png, rows.data());
  png_write_end(wr.png, nullptr);
}

}  // namespace

void save_png(const fs::path& path, const RgbImage& img) {
  std::vector<std::uint8_t> data = img.pixels;
  write_png(path, img.width, img.height, PNG_COLOR_TYPE_RGB, 8, data);
}

void save_png_gray16(const fs::path& path, const Field& f) {
  std::vector<std::uint8_t> data(f.size() * 2);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = std::isfinite(f.data()[i]) ? std::clamp(f.data()[i], 0.0, 1.0) : 0.0;
    const auto u = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    data[2 * i] = static_cast<std::uint8_t>(u >> 8);
    data[2 * i + 1] = static_cast<std::uint8_t>(u & 0xff);
  }
  write_png(path, f.width(), f.height(), PNG_COLOR_TYPE_GRAY, 16, data);
}

void save_mask_png(const fs::path& path, const Mask& m) {
  std::vector<std::uint8_t> data(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) data[i] = m.data()[i] ? 255 : 0;
  write_png(path, m.width(), m.height(), PNG_COLOR_TYPE_GRAY, 8, data);
}

RgbImage render_disparity(const DisparityMap& d, const OcclusionMask& occ, double d_max) {
  require_same_shape(d, occ, "render_disparity");
  RgbImage img(d.width(), d.height());
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      if (occ(x, y)) {
        img.set(x, y, kOcclusionColor);
      } else if (!std::isfinite(d(x, y))) {
        img.set(x, y, kHoleColor);
      } else {
        img.set(x, y, turbo(d_max > 0.0 ? d(x, y) / d_max : 0.0));
      }
    }
  }
  return img;
}

RgbImage render_contour(const Field& image, const Field& phi) {
  require_same_shape(image, phi, "render_contour");
  RgbImage img = render_scalar(image, 0.0, 1.0);
  for (int y = 0; y < phi.height(); ++y) {
    for (int x = 0; x < phi.width(); ++x) {
      const bool f = is_foreground(phi(x, y));
      const bool edge = (x + 1 < phi.width() && is_foreground(phi(x + 1, y)) != f) ||
                        (y + 1 < phi.height() && is_foreground(phi(x, y + 1)) != f);
      if (edge && f) img.set(x, y, kContourColor);
      if (edge && !f) {
        // Mark the foreground side of the crossing.
        if (x + 1 < phi.width() && is_foreground(phi(x + 1, y))) img.set(x + 1, y, kContourColor);
        if (y + 1 < phi.height() && is_foreground(phi(x, y + 1))) img.set(x, y + 1, kContourColor);
      }
    }
  }
  return img;
}

RgbImage render_scalar(const Field& f, double lo, double hi) {
  RgbImage img(f.width(), f.height());
  const double span = hi > lo ? hi - lo : 1.0;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const double v = f(x, y);
      const auto g = std::isfinite(v) ? static_cast<std::uint8_t>(std::lround(std::clamp((v - lo) / span, 0.0, 1.0) * 255))
                                      : std::uint8_t{0};
      img.set(x, y, {g, g, g});
    }
  }
  return img;
}

void save_visualizations(const SolveResult& result, const Field& left, double d_max, const fs::path& dir,
                         const VizToggles& toggles) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  if (toggles.images) {
    save_png(dir / "disparity.png", render_disparity(result.disparity, result.occlusion, d_max));
    save_png(dir / "contour.png", render_contour(left, result.phi));
    if (!result.consensus.mean.empty()) {
      save_png(dir / "consensus_mean.png", render_scalar(result.consensus.mean, 0.0, d_max));
      Field precision(result.consensus.sigma.width(), result.consensus.sigma.height());
      double hi = 0.0;
      for (std::size_t i = 0; i < precision.size(); ++i) {
        const double s = result.consensus.sigma.data()[i];
        precision.data()[i] = std::isfinite(s) && s > 0.0 ? 1.0 / s : 0.0;
        hi = std::max(hi, precision.data()[i]);
      }
      save_png(dir / "consensus_precision.png", render_scalar(precision, 0.0, hi));
    }
  }
  if (toggles.trace) write_trace_csv(dir / "trace.csv", result.trace);
}

}  // namespace occstereo
