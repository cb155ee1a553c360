#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "jshield/binio.hpp"

namespace jshield {

// 8-bit raster, row-major, interleaved samples (HWC). channels is 1
// (grayscale) or 3 (RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c) : width(w), height(h), channels(c) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
      throw std::invalid_argument("image: bad geometry " + std::to_string(w) + "x" +
                                  std::to_string(h) + "x" + std::to_string(c));
    pixels.assign(static_cast<std::size_t>(w) * h * c, 0);
  }

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool same_geometry(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }

  std::string geometry_string() const {
    return std::to_string(width) + "x" + std::to_string(height) + "x" +
           std::to_string(channels);
  }
};

inline std::uint8_t clamp_u8(int v) {
  return static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
}

inline std::uint8_t clamp_u8(double v) {
  long r = std::lround(v);  // rounds half away from zero
  return static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

// --- binary PGM (P5) / PPM (P6), maxval 255 ------------------------------

namespace detail {

inline int pnm_read_int(const std::vector<std::uint8_t>& b, std::size_t& pos) {
  // skip whitespace and '#' comments
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  if (pos >= b.size() || !std::isdigit(b[pos]))
    throw std::runtime_error("pnm: expected integer at offset " + std::to_string(pos));
  int v = 0;
  while (pos < b.size() && std::isdigit(b[pos])) v = v * 10 + (b[pos++] - '0');
  return v;
}

}  // namespace detail

inline Image decode_pnm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw std::runtime_error("pnm: not a binary PGM/PPM (want P5 or P6)");
  const int channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const int w = detail::pnm_read_int(bytes, pos);
  const int h = detail::pnm_read_int(bytes, pos);
  const int maxval = detail::pnm_read_int(bytes, pos);
  if (maxval != 255) throw std::runtime_error("pnm: unsupported maxval " + std::to_string(maxval));
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw std::runtime_error("pnm: missing separator after header");
  ++pos;
  Image img(w, h, channels);
  if (bytes.size() - pos < img.pixels.size())
    throw std::runtime_error("pnm: truncated pixel data, expected " +
                             std::to_string(img.pixels.size()) + " bytes, got " +
                             std::to_string(bytes.size() - pos));
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
            bytes.begin() + static_cast<std::ptrdiff_t>(pos + img.pixels.size()),
            img.pixels.begin());
  return img;
}

inline std::vector<std::uint8_t> encode_pnm(const Image& img) {
  std::string header = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

inline Image read_pnm(const std::string& path) { return decode_pnm(read_file_bytes(path)); }

inline void write_pnm(const std::string& path, const Image& img) {
  write_file_bytes(path, encode_pnm(img));
}

// --- quality metrics ------------------------------------------------------

inline double mean_squared_error(const Image& a, const Image& b) {
  if (!a.same_geometry(b)) throw std::invalid_argument("mse: image geometry mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixels.size());
}

inline double psnr(const Image& a, const Image& b) {
  const double mse = mean_squared_error(a, b);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace jshield
