#pragma once

// Built-in codec invariant checks, runnable from the CLI. Each check is
// self-contained and reports pass/fail plus a short diagnostic, so a
// misbehaving build can be triaged without a debugger.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "jshield/image.hpp"
#include "jshield/jpeg_bitio.hpp"
#include "jshield/jpeg_codec.hpp"
#include "jshield/jpeg_dct.hpp"
#include "jshield/jpeg_huffman.hpp"
#include "jshield/jpeg_tables.hpp"
#include "jshield/rng.hpp"

namespace jshield {

struct SelfTestResult {
  std::string name;
  bool passed = false;
  std::string detail;  // short diagnostic, useful on failure
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// The zigzag scan order and its inverse must be mutually inverse
// permutations of 0..63.
inline SelfTestResult selftest_zigzag() {
  SelfTestResult r{"zigzag-inverse", true, ""};
  bool seen[64] = {};
  for (int k = 0; k < 64; ++k) {
    const int n = kZigzag[k];
    if (n < 0 || n > 63 || seen[n]) {
      r.passed = false;
      r.detail = "kZigzag is not a permutation at index " + std::to_string(k);
      return r;
    }
    seen[n] = true;
  }
  for (int k = 0; k < 64; ++k) {
    if (kZigzagInv[kZigzag[k]] != k) {
      r.passed = false;
      r.detail = "inverse fails forward->back at index " + std::to_string(k);
      return r;
    }
    if (kZigzag[kZigzagInv[k]] != k) {
      r.passed = false;
      r.detail = "inverse fails back->forward at index " + std::to_string(k);
      return r;
    }
  }
  r.detail = "64 indices verified in both directions";
  return r;
}

// The separable fast paths must agree with the O(64^2) textbook definition
// of the 2-D DCT-II / DCT-III pair to within 1e-6 on random sample blocks.
inline SelfTestResult selftest_dct() {
  SelfTestResult r{"dct-oracle", true, ""};
  const double pi = std::acos(-1.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  auto scale = [&](int u) { return u == 0 ? inv_sqrt2 : 1.0; };

  SplitMix64 rng(0x5e1f7e57u);  // fixed so failures are reproducible
  const int kBlocks = 256;
  double worst = 0.0;
  for (int b = 0; b < kBlocks; ++b) {
    double block[64];
    for (double& v : block) v = rng.next_symmetric(128.0);

    // Definitional forward transform.
    double want_f[64];
    for (int u = 0; u < 8; ++u) {
      for (int v = 0; v < 8; ++v) {
        double acc = 0.0;
        for (int y = 0; y < 8; ++y) {
          for (int x = 0; x < 8; ++x) {
            acc += block[y * 8 + x] * std::cos((2 * y + 1) * u * pi / 16.0) *
                   std::cos((2 * x + 1) * v * pi / 16.0);
          }
        }
        want_f[u * 8 + v] = 0.25 * scale(u) * scale(v) * acc;
      }
    }
    double got_f[64];
    fdct8x8(block, got_f);
    for (int i = 0; i < 64; ++i) worst = std::max(worst, std::abs(got_f[i] - want_f[i]));

    // Definitional inverse applied to the forward result must recover the
    // block, and must agree with idct8x8.
    double got_i[64];
    idct8x8(got_f, got_i);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        double acc = 0.0;
        for (int u = 0; u < 8; ++u) {
          for (int v = 0; v < 8; ++v) {
            acc += scale(u) * scale(v) * want_f[u * 8 + v] *
                   std::cos((2 * y + 1) * u * pi / 16.0) *
                   std::cos((2 * x + 1) * v * pi / 16.0);
          }
        }
        acc *= 0.25;
        worst = std::max(worst, std::abs(got_i[y * 8 + x] - acc));
        worst = std::max(worst, std::abs(got_i[y * 8 + x] - block[y * 8 + x]));
      }
    }
  }
  r.passed = worst < 1e-6;
  r.detail = "max |error| " + format_double(worst) + " over " + std::to_string(kBlocks) +
             " random blocks (tolerance 1e-6)";
  return r;
}

// Entropy coding must be exactly invertible: encode a scan of random
// admissible quantized blocks, decode it, and require bit-exact recovery.
inline SelfTestResult selftest_entropy() {
  SelfTestResult r{"entropy-roundtrip", true, ""};
  const int kBlocks = 1000;

  const HuffmanEncoder enc_dc(kDcLumaBits, kDcLumaValues);
  const HuffmanEncoder enc_ac(kAcLumaBits, kAcLumaValues);
  const HuffmanDecoder dec_dc(kDcLumaBits, kDcLumaValues, sizeof kDcLumaValues);
  const HuffmanDecoder dec_ac(kAcLumaBits, kAcLumaValues, sizeof kAcLumaValues);

  SplitMix64 rng(0xe17209a7u);
  std::vector<std::array<int, 64>> blocks(kBlocks);
  for (int b = 0; b < kBlocks; ++b) {
    auto& blk = blocks[b];
    blk.fill(0);
    // Baseline admissibility: |DC| <= 1023 keeps every DC difference in
    // the 11-bit category range; AC values need |v| <= 1023 (10 bits).
    blk[0] = static_cast<int>(rng.below(2047)) - 1023;
    if (b == 0) continue;  // all-zero AC: immediate EOB
    if (b == 1) {          // single trailing coefficient: maximal ZRL runs
      blk[kZigzag[63]] = 1023;
      continue;
    }
    if (b == 2) {  // fully dense block at extreme magnitudes
      for (int k = 1; k < 64; ++k) blk[kZigzag[k]] = (k % 2 != 0) ? 1023 : -1023;
      continue;
    }
    const std::uint64_t density = rng.below(64);  // expected nonzero count
    for (int k = 1; k < 64; ++k) {
      if (rng.below(64) < density) {
        int v = static_cast<int>(rng.below(2046)) - 1023;  // [-1023, 1022]
        if (v >= 0) ++v;                                   // skip zero -> [-1023, 1023]
        blk[kZigzag[k]] = v;
      }
    }
  }

  std::vector<std::uint8_t> scan;
  BitWriter writer(scan);
  int dc_pred = 0;
  for (const auto& blk : blocks) huffman_encode_block(writer, blk.data(), dc_pred, enc_dc, enc_ac);
  writer.align_with_ones();

  BitReader reader(scan.data(), scan.size(), 0);
  dc_pred = 0;
  for (int b = 0; b < kBlocks; ++b) {
    int got[64];
    huffman_decode_block(reader, got, dc_pred, dec_dc, dec_ac);
    for (int i = 0; i < 64; ++i) {
      if (got[i] != blocks[b][i]) {
        r.passed = false;
        r.detail = "block " + std::to_string(b) + " coefficient " + std::to_string(i) +
                   ": wrote " + std::to_string(blocks[b][i]) + ", read back " +
                   std::to_string(got[i]);
        return r;
      }
    }
  }
  r.detail = std::to_string(kBlocks) + " blocks (" + std::to_string(scan.size()) +
             " scan bytes) recovered exactly";
  return r;
}

inline Image selftest_pattern(int w, int h, int channels) {
  Image img(w, h, channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        img.at(x, y, c) = static_cast<std::uint8_t>((x * 7 + y * 13 + c * 41) & 0xFF);
      }
    }
  }
  return img;
}

// A decoded image must always have the geometry of the encoder input,
// whatever padding the MCU grid required internally.
inline SelfTestResult selftest_dimensions() {
  SelfTestResult r{"dimension-preservation", true, ""};
  int checked = 0;
  auto check = [&](const Image& src, const CodecConfig& cfg) {
    const Image back = jpeg_decode(jpeg_encode(src, cfg));
    ++checked;
    if (!back.same_geometry(src)) {
      r.passed = false;
      r.detail = "input " + src.geometry_string() + " decoded as " + back.geometry_string();
      return false;
    }
    return true;
  };

  CodecConfig gray_cfg;
  for (int w = 1; w <= 64 && r.passed; ++w) {
    for (int h = 1; h <= 64 && r.passed; ++h) {
      check(selftest_pattern(w, h, 1), gray_cfg);
    }
  }
  // Color: sample sizes around the 8/16-pixel MCU boundaries, under both
  // subsampling modes.
  const int sizes[] = {1, 2, 3, 7, 8, 9, 15, 16, 17, 31, 32, 33, 63, 64};
  for (int w : sizes) {
    for (int h : sizes) {
      if (!r.passed) break;
      for (ChromaSubsampling cs : {ChromaSubsampling::k444, ChromaSubsampling::k420}) {
        CodecConfig cfg;
        cfg.chroma_subsampling = cs;
        if (!check(selftest_pattern(w, h, 3), cfg)) break;
      }
    }
  }
  if (r.passed) {
    r.detail = std::to_string(checked) + " geometries preserved (grayscale 1..64 square grid, " +
               "color sampled under 4:4:4 and 4:2:0)";
  }
  return r;
}

// Reconstruction error must not increase with quality: on every fixture,
// MSE(q90) <= MSE(q75) <= MSE(q40).
inline SelfTestResult selftest_quality_monotone(const std::string& images_dir) {
  SelfTestResult r{"quality-monotonicity", true, ""};
  const char* names[] = {"camera_128.pgm", "astronaut_100x76.ppm", "astronaut_61x45.ppm",
                         "pinned16.ppm"};
  std::string detail;
  for (const char* name : names) {
    const Image src = read_pnm(images_dir + "/" + name);
    double mse[3];  // q90, q75, q40
    const int qualities[3] = {90, 75, 40};
    for (int i = 0; i < 3; ++i) {
      CodecConfig cfg;
      cfg.quality = qualities[i];
      mse[i] = mean_squared_error(src, jpg_project(src, cfg));
    }
    if (!detail.empty()) detail += "; ";
    detail += std::string(name) + " q90/q75/q40 MSE " + format_double(mse[0]) + "/" +
              format_double(mse[1]) + "/" + format_double(mse[2]);
    if (!(mse[0] <= mse[1] && mse[1] <= mse[2])) {
      r.passed = false;
      r.detail = "MSE not monotone in quality: " + detail;
      return r;
    }
  }
  r.detail = detail;
  return r;
}

}  // namespace detail

// Runs every codec invariant check. `images_dir` must hold the pinned
// fixture images (camera_128.pgm, astronaut_100x76.ppm, astronaut_61x45.ppm,
// pinned16.ppm). A check that throws is reported as failed, not propagated.
inline std::vector<SelfTestResult> run_codec_selftests(const std::string& images_dir) {
  std::vector<SelfTestResult> results;
  auto run = [&](const std::string& name, auto&& fn) {
    try {
      results.push_back(fn());
    } catch (const std::exception& e) {
      results.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };
  run("zigzag-inverse", [] { return detail::selftest_zigzag(); });
  run("dct-oracle", [] { return detail::selftest_dct(); });
  run("entropy-roundtrip", [] { return detail::selftest_entropy(); });
  run("dimension-preservation", [] { return detail::selftest_dimensions(); });
  run("quality-monotonicity",
      [&] { return detail::selftest_quality_monotone(images_dir); });
  return results;
}

}  // namespace jshield
