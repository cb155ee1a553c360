#pragma once

// Baseline sequential JFIF encoder/decoder.
//
// Encoder subset: 8-bit samples, grayscale or YCbCr 4:4:4 / 4:2:0,
// Annex-K standard Huffman tables, no restart markers. The decoder
// additionally accepts any baseline stream with embedded Huffman
// tables, 1..2 sampling factors, 16-bit quantization tables, and
// restart markers. Progressive and arithmetic-coded streams are
// rejected by marker name.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jshield/image.hpp"
#include "jshield/jpeg_bitio.hpp"
#include "jshield/jpeg_dct.hpp"
#include "jshield/jpeg_huffman.hpp"
#include "jshield/jpeg_tables.hpp"

namespace jshield {

enum class ChromaSubsampling { k444, k420 };

struct CodecConfig {
  int quality = 75;
  ChromaSubsampling chroma_subsampling = ChromaSubsampling::k420;
  int restart_interval = 0;  // the encoder does not emit restart markers
};

namespace detail {

// Full-range BT.601 (JFIF) color conversion constants.
inline constexpr double kYR = 0.299, kYG = 0.587, kYB = 0.114;
inline constexpr double kCbR = -0.168735892, kCbG = -0.331264108, kCbB = 0.5;
inline constexpr double kCrR = 0.5, kCrG = -0.418687589, kCrB = -0.081312411;
inline constexpr double kRCr = 1.402;
inline constexpr double kGCb = -0.344136286, kGCr = -0.714136286;
inline constexpr double kBCb = 1.772;

struct Plane {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  Plane() = default;
  Plane(int w, int h) : width(w), height(h), samples(static_cast<std::size_t>(w) * h) {}

  std::uint8_t at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return samples[static_cast<std::size_t>(y) * width + x];
  }
};

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

inline void append_u16be(std::vector<std::uint8_t>& out, unsigned v) {
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

inline void append_marker(std::vector<std::uint8_t>& out, std::uint8_t marker) {
  out.push_back(0xFF);
  out.push_back(marker);
}

inline std::string marker_name(std::uint8_t marker) {
  static const char* digits = "0123456789ABCDEF";
  return std::string("0xFF") + digits[marker >> 4] + digits[marker & 15];
}

// Splits an image into per-component planes: the image itself for
// grayscale, YCbCr planes (chroma box-downsampled for 4:2:0) for color.
inline std::vector<Plane> build_planes(const Image& img, ChromaSubsampling subsampling) {
  std::vector<Plane> planes;
  if (img.channels == 1) {
    Plane p(img.width, img.height);
    p.samples = img.pixels;
    planes.push_back(std::move(p));
    return planes;
  }

  Plane y(img.width, img.height), cb(img.width, img.height), cr(img.width, img.height);
  for (int py = 0; py < img.height; ++py) {
    for (int px = 0; px < img.width; ++px) {
      const double r = img.at(px, py, 0);
      const double g = img.at(px, py, 1);
      const double b = img.at(px, py, 2);
      const std::size_t i = static_cast<std::size_t>(py) * img.width + px;
      y.samples[i] = clamp_u8(kYR * r + kYG * g + kYB * b);
      cb.samples[i] = clamp_u8(kCbR * r + kCbG * g + kCbB * b + 128.0);
      cr.samples[i] = clamp_u8(kCrR * r + kCrG * g + kCrB * b + 128.0);
    }
  }

  if (subsampling == ChromaSubsampling::k420) {
    for (Plane* chroma : {&cb, &cr}) {
      Plane down(ceil_div(img.width, 2), ceil_div(img.height, 2));
      for (int dy = 0; dy < down.height; ++dy) {
        for (int dx = 0; dx < down.width; ++dx) {
          int sum = 0, count = 0;
          for (int oy = 0; oy < 2; ++oy) {
            for (int ox = 0; ox < 2; ++ox) {
              const int sx = dx * 2 + ox, sy = dy * 2 + oy;
              if (sx < img.width && sy < img.height) {
                sum += chroma->samples[static_cast<std::size_t>(sy) * img.width + sx];
                ++count;
              }
            }
          }
          down.samples[static_cast<std::size_t>(dy) * down.width + dx] =
              static_cast<std::uint8_t>((sum + count / 2) / count);
        }
      }
      *chroma = std::move(down);
    }
  }
  planes.push_back(std::move(y));
  planes.push_back(std::move(cb));
  planes.push_back(std::move(cr));
  return planes;
}

// Extracts the 8x8 block at block coordinates (bx, by), replicating
// edge samples past the plane boundary, level-shifts, transforms, and
// quantizes it.
inline void encode_block_samples(const Plane& plane, int bx, int by,
                                 const std::array<std::uint16_t, 64>& qt, int out[64]) {
  double shifted[64];
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      shifted[y * 8 + x] = static_cast<double>(plane.at_clamped(bx * 8 + x, by * 8 + y)) - 128.0;
    }
  }
  double coeffs[64];
  fdct8x8(shifted, coeffs);
  for (int i = 0; i < 64; ++i) {
    out[i] = static_cast<int>(std::lround(coeffs[i] / qt[i]));
  }
}

}  // namespace detail

inline std::vector<std::uint8_t> jpeg_encode(const Image& img, const CodecConfig& cfg = {}) {
  if (img.width <= 0 || img.height <= 0) {
    throw std::invalid_argument("cannot encode zero-dimension image (" +
                                std::to_string(img.width) + "x" + std::to_string(img.height) +
                                ")");
  }
  if (cfg.restart_interval != 0) {
    throw std::invalid_argument("encoder does not support restart markers (interval " +
                                std::to_string(cfg.restart_interval) + ")");
  }
  const QuantTables tables = quality_to_tables(cfg.quality);
  const bool gray = img.channels == 1;
  const bool subsampled = !gray && cfg.chroma_subsampling == ChromaSubsampling::k420;

  // Per-component horizontal/vertical sampling factors.
  const int comp_count = gray ? 1 : 3;
  const int luma_h = subsampled ? 2 : 1;
  const int luma_v = subsampled ? 2 : 1;

  std::vector<detail::Plane> planes = detail::build_planes(img, cfg.chroma_subsampling);

  std::vector<std::uint8_t> out;
  detail::append_marker(out, 0xD8);  // SOI

  detail::append_marker(out, 0xE0);  // APP0 / JFIF
  detail::append_u16be(out, 16);
  const std::uint8_t jfif[14] = {'J', 'F', 'I', 'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0};
  out.insert(out.end(), jfif, jfif + 14);

  auto write_dqt = [&](int id, const std::array<std::uint16_t, 64>& qt) {
    detail::append_marker(out, 0xDB);
    detail::append_u16be(out, 67);
    out.push_back(static_cast<std::uint8_t>(id));  // 8-bit precision
    for (int i = 0; i < 64; ++i) {
      out.push_back(static_cast<std::uint8_t>(qt[kZigzag[i]]));
    }
  };
  write_dqt(0, tables.luma);
  if (!gray) write_dqt(1, tables.chroma);

  detail::append_marker(out, 0xC0);  // SOF0
  detail::append_u16be(out, static_cast<unsigned>(8 + 3 * comp_count));
  out.push_back(8);  // sample precision
  detail::append_u16be(out, static_cast<unsigned>(img.height));
  detail::append_u16be(out, static_cast<unsigned>(img.width));
  out.push_back(static_cast<std::uint8_t>(comp_count));
  out.push_back(1);
  out.push_back(static_cast<std::uint8_t>((luma_h << 4) | luma_v));
  out.push_back(0);
  if (!gray) {
    for (int id = 2; id <= 3; ++id) {
      out.push_back(static_cast<std::uint8_t>(id));
      out.push_back(0x11);
      out.push_back(1);
    }
  }

  auto write_dht = [&](int table_class, int id, const std::uint8_t bits[16],
                       const std::uint8_t* values, std::size_t count) {
    detail::append_marker(out, 0xC4);
    detail::append_u16be(out, static_cast<unsigned>(19 + count));
    out.push_back(static_cast<std::uint8_t>((table_class << 4) | id));
    out.insert(out.end(), bits, bits + 16);
    out.insert(out.end(), values, values + count);
  };
  write_dht(0, 0, kDcLumaBits, kDcLumaValues, sizeof(kDcLumaValues));
  write_dht(1, 0, kAcLumaBits, kAcLumaValues, sizeof(kAcLumaValues));
  if (!gray) {
    write_dht(0, 1, kDcChromaBits, kDcChromaValues, sizeof(kDcChromaValues));
    write_dht(1, 1, kAcChromaBits, kAcChromaValues, sizeof(kAcChromaValues));
  }

  detail::append_marker(out, 0xDA);  // SOS
  detail::append_u16be(out, static_cast<unsigned>(6 + 2 * comp_count));
  out.push_back(static_cast<std::uint8_t>(comp_count));
  out.push_back(1);
  out.push_back(0x00);
  if (!gray) {
    out.push_back(2);
    out.push_back(0x11);
    out.push_back(3);
    out.push_back(0x11);
  }
  out.push_back(0);
  out.push_back(63);
  out.push_back(0);

  const HuffmanEncoder dc_luma(kDcLumaBits, kDcLumaValues);
  const HuffmanEncoder ac_luma(kAcLumaBits, kAcLumaValues);
  const HuffmanEncoder dc_chroma(kDcChromaBits, kDcChromaValues);
  const HuffmanEncoder ac_chroma(kAcChromaBits, kAcChromaValues);

  const int mcu_w = 8 * luma_h;
  const int mcu_h = 8 * luma_v;
  const int mcus_x = detail::ceil_div(img.width, mcu_w);
  const int mcus_y = detail::ceil_div(img.height, mcu_h);

  BitWriter writer(out);
  int dc_pred[3] = {0, 0, 0};
  int block[64];
  for (int my = 0; my < mcus_y; ++my) {
    for (int mx = 0; mx < mcus_x; ++mx) {
      for (int c = 0; c < comp_count; ++c) {
        const bool is_luma = c == 0;
        const int h = is_luma ? luma_h : 1;
        const int v = is_luma ? luma_v : 1;
        const auto& qt = is_luma ? tables.luma : tables.chroma;
        const HuffmanEncoder& dc = is_luma ? dc_luma : dc_chroma;
        const HuffmanEncoder& ac = is_luma ? ac_luma : ac_chroma;
        for (int by = 0; by < v; ++by) {
          for (int bx = 0; bx < h; ++bx) {
            detail::encode_block_samples(planes[c], mx * h + bx, my * v + by, qt, block);
            huffman_encode_block(writer, block, dc_pred[c], dc, ac);
          }
        }
      }
    }
  }
  writer.align_with_ones();
  detail::append_marker(out, 0xD9);  // EOI
  return out;
}

namespace detail {

struct DecodeComponent {
  int id = 0;
  int h = 1, v = 1;
  int quant_id = 0;
  int dc_id = 0, ac_id = 0;
  Plane plane;       // padded to whole MCUs
  int dc_pred = 0;
};

struct SegmentReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;

  std::uint8_t u8(const char* what) {
    if (pos >= size) {
      throw std::runtime_error(std::string("truncated stream: expected ") + what +
                               " at byte offset " + std::to_string(pos));
    }
    return data[pos++];
  }

  unsigned u16be(const char* what) {
    const unsigned hi = u8(what);
    const unsigned lo = u8(what);
    return (hi << 8) | lo;
  }
};

}  // namespace detail

inline Image jpeg_decode(const std::vector<std::uint8_t>& bytes) {
  using detail::DecodeComponent;
  detail::SegmentReader in{bytes.data(), bytes.size()};

  if (bytes.size() < 2 || bytes[0] != 0xFF || bytes[1] != 0xD8) {
    throw std::runtime_error("not a JPEG stream: missing SOI marker at byte offset 0");
  }
  in.pos = 2;

  std::array<std::array<std::uint16_t, 64>, 4> quant{};
  std::array<bool, 4> quant_defined{};
  std::array<HuffmanDecoder, 4> dc_tables, ac_tables;
  std::vector<DecodeComponent> comps;
  int width = 0, height = 0;
  int h_max = 1, v_max = 1;
  int restart_interval = 0;
  bool have_frame = false, have_scan = false;

  while (true) {
    // Markers may be preceded by fill bytes (0xFF).
    std::uint8_t b = in.u8("marker");
    if (b != 0xFF) {
      throw std::runtime_error("corrupt stream: expected marker at byte offset " +
                               std::to_string(in.pos - 1));
    }
    std::uint8_t marker = in.u8("marker");
    while (marker == 0xFF) marker = in.u8("marker");

    if (marker == 0xD9) {  // EOI
      if (!have_scan) {
        throw std::runtime_error("truncated stream: EOI before any scan at byte offset " +
                                 std::to_string(in.pos - 2));
      }
      break;
    }
    if (marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) continue;

    const std::size_t seg_start = in.pos;
    const unsigned seg_len = in.u16be("segment length");
    if (seg_len < 2) {
      throw std::runtime_error("corrupt stream: segment length " + std::to_string(seg_len) +
                               " at byte offset " + std::to_string(seg_start));
    }
    const std::size_t seg_end = seg_start + seg_len;
    if (seg_end > in.size) {
      throw std::runtime_error("truncated stream: segment extends to byte offset " +
                               std::to_string(seg_end) + " but stream has " +
                               std::to_string(in.size) + " bytes");
    }

    if (marker == 0xC2) {
      throw std::runtime_error("unsupported: progressive JPEG (marker 0xFFC2)");
    }
    if (marker == 0xC9 || marker == 0xCA || marker == 0xCB || marker == 0xCD ||
        marker == 0xCE || marker == 0xCF) {
      throw std::runtime_error("unsupported: arithmetic-coded JPEG (marker " +
                               detail::marker_name(marker) + ")");
    }
    if (marker == 0xC3 || marker == 0xC5 || marker == 0xC6 || marker == 0xC7) {
      throw std::runtime_error("unsupported: non-baseline JPEG mode (marker " +
                               detail::marker_name(marker) + ")");
    }

    if (marker == 0xC0 || marker == 0xC1) {  // SOF0 / SOF1
      if (have_frame) {
        throw std::runtime_error("corrupt stream: multiple frame headers at byte offset " +
                                 std::to_string(in.pos - 4));
      }
      const int precision = in.u8("precision");
      if (precision != 8) {
        throw std::runtime_error("unsupported: sample precision " + std::to_string(precision));
      }
      height = static_cast<int>(in.u16be("height"));
      width = static_cast<int>(in.u16be("width"));
      if (width <= 0 || height <= 0) {
        throw std::runtime_error("corrupt stream: frame dimensions " + std::to_string(width) +
                                 "x" + std::to_string(height));
      }
      const int n = in.u8("component count");
      if (n != 1 && n != 3) {
        throw std::runtime_error("unsupported: component count " + std::to_string(n));
      }
      for (int c = 0; c < n; ++c) {
        DecodeComponent comp;
        comp.id = in.u8("component id");
        const int hv = in.u8("sampling factors");
        comp.h = hv >> 4;
        comp.v = hv & 15;
        comp.quant_id = in.u8("quantization table id");
        if (comp.h < 1 || comp.h > 2 || comp.v < 1 || comp.v > 2) {
          throw std::runtime_error("unsupported: sampling factors " + std::to_string(comp.h) +
                                   "x" + std::to_string(comp.v) + " for component " +
                                   std::to_string(comp.id));
        }
        if (comp.quant_id > 3) {
          throw std::runtime_error("corrupt stream: quantization table id " +
                                   std::to_string(comp.quant_id));
        }
        h_max = std::max(h_max, comp.h);
        v_max = std::max(v_max, comp.v);
        comps.push_back(comp);
      }
      have_frame = true;
      in.pos = seg_end;
      continue;
    }

    if (marker == 0xDB) {  // DQT
      while (in.pos < seg_end) {
        const int pq_tq = in.u8("quantization table header");
        const int precision = pq_tq >> 4;
        const int id = pq_tq & 15;
        if (id > 3 || precision > 1) {
          throw std::runtime_error("corrupt stream: quantization table header at byte offset " +
                                   std::to_string(in.pos - 1));
        }
        for (int i = 0; i < 64; ++i) {
          const unsigned v = precision == 0 ? in.u8("quantization entry")
                                            : in.u16be("quantization entry");
          quant[id][static_cast<std::size_t>(kZigzag[i])] = static_cast<std::uint16_t>(v);
        }
        quant_defined[id] = true;
      }
      in.pos = seg_end;
      continue;
    }

    if (marker == 0xC4) {  // DHT
      while (in.pos < seg_end) {
        const int tc_th = in.u8("Huffman table header");
        const int table_class = tc_th >> 4;
        const int id = tc_th & 15;
        if (table_class > 1 || id > 3) {
          throw std::runtime_error("corrupt stream: Huffman table header at byte offset " +
                                   std::to_string(in.pos - 1));
        }
        std::uint8_t bits[16];
        std::size_t count = 0;
        for (int i = 0; i < 16; ++i) {
          bits[i] = in.u8("Huffman code counts");
          count += bits[i];
        }
        if (in.pos + count > seg_end) {
          throw std::runtime_error("truncated stream: Huffman values at byte offset " +
                                   std::to_string(in.pos));
        }
        HuffmanDecoder table(bits, in.data + in.pos, count);
        in.pos += count;
        (table_class == 0 ? dc_tables : ac_tables)[id] = std::move(table);
      }
      in.pos = seg_end;
      continue;
    }

    if (marker == 0xDD) {  // DRI
      restart_interval = static_cast<int>(in.u16be("restart interval"));
      in.pos = seg_end;
      continue;
    }

    if (marker == 0xDA) {  // SOS
      if (!have_frame) {
        throw std::runtime_error("corrupt stream: scan before frame header at byte offset " +
                                 std::to_string(seg_start - 2));
      }
      if (have_scan) {
        throw std::runtime_error("unsupported: multiple scans at byte offset " +
                                 std::to_string(seg_start - 2));
      }
      const int n = in.u8("scan component count");
      if (n != static_cast<int>(comps.size())) {
        throw std::runtime_error("unsupported: scan covers " + std::to_string(n) + " of " +
                                 std::to_string(comps.size()) + " components");
      }
      for (int c = 0; c < n; ++c) {
        const int id = in.u8("scan component id");
        const int td_ta = in.u8("scan table ids");
        bool found = false;
        for (auto& comp : comps) {
          if (comp.id == id) {
            comp.dc_id = td_ta >> 4;
            comp.ac_id = td_ta & 15;
            if (comp.dc_id > 3 || comp.ac_id > 3 || dc_tables[comp.dc_id].empty() ||
                ac_tables[comp.ac_id].empty()) {
              throw std::runtime_error("corrupt stream: scan references undefined Huffman "
                                       "table for component " +
                                       std::to_string(id));
            }
            found = true;
            break;
          }
        }
        if (!found) {
          throw std::runtime_error("corrupt stream: scan component id " + std::to_string(id) +
                                   " not present in frame");
        }
      }
      in.pos = seg_end;  // skip spectral selection bytes

      const int mcus_x = detail::ceil_div(width, 8 * h_max);
      const int mcus_y = detail::ceil_div(height, 8 * v_max);
      for (auto& comp : comps) {
        if (!quant_defined[comp.quant_id]) {
          throw std::runtime_error("corrupt stream: component " + std::to_string(comp.id) +
                                   " references undefined quantization table " +
                                   std::to_string(comp.quant_id));
        }
        comp.plane = detail::Plane(mcus_x * comp.h * 8, mcus_y * comp.v * 8);
      }

      BitReader reader(in.data + in.pos, in.size - in.pos, in.pos);
      int block[64];
      double coeffs[64], samples[64];
      int mcus_until_restart = restart_interval;
      int next_restart_index = 0;
      for (int my = 0; my < mcus_y; ++my) {
        for (int mx = 0; mx < mcus_x; ++mx) {
          if (restart_interval > 0 && mcus_until_restart == 0) {
            const int index = reader.consume_restart_marker();
            if (index != next_restart_index) {
              throw std::runtime_error("corrupt scan: restart marker out of sequence at "
                                       "byte offset " +
                                       std::to_string(reader.stream_offset()));
            }
            next_restart_index = (next_restart_index + 1) & 7;
            mcus_until_restart = restart_interval;
            for (auto& comp : comps) comp.dc_pred = 0;
          }
          for (auto& comp : comps) {
            for (int by = 0; by < comp.v; ++by) {
              for (int bx = 0; bx < comp.h; ++bx) {
                huffman_decode_block(reader, block, comp.dc_pred, dc_tables[comp.dc_id],
                                     ac_tables[comp.ac_id]);
                const auto& qt = quant[comp.quant_id];
                for (int i = 0; i < 64; ++i) coeffs[i] = static_cast<double>(block[i]) * qt[i];
                idct8x8(coeffs, samples);
                const int x0 = (mx * comp.h + bx) * 8;
                const int y0 = (my * comp.v + by) * 8;
                for (int y = 0; y < 8; ++y) {
                  std::uint8_t* row =
                      comp.plane.samples.data() +
                      static_cast<std::size_t>(y0 + y) * comp.plane.width + x0;
                  for (int x = 0; x < 8; ++x) row[x] = clamp_u8(samples[y * 8 + x] + 128.0);
                }
              }
            }
          }
          if (restart_interval > 0) --mcus_until_restart;
        }
      }
      in.pos = reader.stream_offset();
      have_scan = true;
      continue;
    }

    // APPn, COM, DNL, and anything else with a length: skip.
    in.pos = seg_end;
  }

  // Assemble the image, upsampling subsampled components by replication.
  Image img(width, height, static_cast<int>(comps.size()));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (comps.size() == 1) {
        img.pixels[static_cast<std::size_t>(y) * width + x] =
            comps[0].plane.at_clamped(x, y);
      } else {
        double ycc[3];
        for (std::size_t c = 0; c < 3; ++c) {
          const auto& comp = comps[c];
          ycc[c] = comp.plane.at_clamped(x * comp.h / h_max, y * comp.v / v_max);
        }
        const double luma = ycc[0], cb = ycc[1] - 128.0, cr = ycc[2] - 128.0;
        std::uint8_t* px = img.pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
        px[0] = clamp_u8(luma + detail::kRCr * cr);
        px[1] = clamp_u8(luma + detail::kGCb * cb + detail::kGCr * cr);
        px[2] = clamp_u8(luma + detail::kBCb * cb);
      }
    }
  }
  return img;
}

// The paper's JPG[x] operator: one encode/decode round trip.
inline Image jpg_project(const Image& img, const CodecConfig& cfg = {}) {
  return jpeg_decode(jpeg_encode(img, cfg));
}

// Mean squared DCT coefficient of the luma difference (a - b), one
// entry per zigzag frequency bin, averaged over all full 8x8 tiles.
struct DctProfile {
  std::array<double, 64> energy{};
};

inline DctProfile dct_profile(const Image& a, const Image& b) {
  if (!a.same_geometry(b)) {
    throw std::invalid_argument("dct_profile: image geometries differ (" + a.geometry_string() +
                                " vs " + b.geometry_string() + ")");
  }
  const int tiles_x = a.width / 8;
  const int tiles_y = a.height / 8;
  if (tiles_x == 0 || tiles_y == 0) {
    throw std::invalid_argument("dct_profile: images must be at least 8x8, got " +
                                a.geometry_string());
  }

  auto luma_at = [](const Image& img, int x, int y) -> double {
    if (img.channels == 1) return img.at(x, y, 0);
    return detail::kYR * img.at(x, y, 0) + detail::kYG * img.at(x, y, 1) +
           detail::kYB * img.at(x, y, 2);
  };

  DctProfile profile;
  double diff[64], coeffs[64];
  for (int ty = 0; ty < tiles_y; ++ty) {
    for (int tx = 0; tx < tiles_x; ++tx) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          const int px = tx * 8 + x, py = ty * 8 + y;
          diff[y * 8 + x] = luma_at(a, px, py) - luma_at(b, px, py);
        }
      }
      fdct8x8(diff, coeffs);
      for (int i = 0; i < 64; ++i) {
        profile.energy[static_cast<std::size_t>(kZigzagInv[i])] += coeffs[i] * coeffs[i];
      }
    }
  }
  const double tile_count = static_cast<double>(tiles_x) * tiles_y;
  for (double& e : profile.energy) e /= tile_count;
  return profile;
}

}  // namespace jshield
