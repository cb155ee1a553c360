#pragma once

// 8x8 forward and inverse DCT-II used by the JPEG codec.
//
// The orthonormal basis matrix M[u][x] = 0.5 * c(u) * cos((2x+1)u*pi/16)
// (c(0) = 1/sqrt(2), else 1) is frozen as decimal literals rather than
// computed with std::cos at runtime, so every build quantizes the exact
// same coefficient values and encoded streams are byte-identical across
// platforms. Transforms are separable: F = M f M^T, f = M^T F M.

namespace jshield {

inline constexpr double kDctBasis[8][8] = {
    {+0.35355339059327373, +0.35355339059327373, +0.35355339059327373,
     +0.35355339059327373, +0.35355339059327373, +0.35355339059327373,
     +0.35355339059327373, +0.35355339059327373},
    {+0.49039264020161522, +0.41573480615127262, +0.27778511650980114,
     +0.09754516100806417, -0.09754516100806410, -0.27778511650980098,
     -0.41573480615127267, -0.49039264020161522},
    {+0.46193976625564337, +0.19134171618254492, -0.19134171618254486,
     -0.46193976625564337, -0.46193976625564342, -0.19134171618254517,
     +0.19134171618254500, +0.46193976625564326},
    {+0.41573480615127262, -0.09754516100806410, -0.49039264020161522,
     -0.27778511650980109, +0.27778511650980092, +0.49039264020161522,
     +0.09754516100806439, -0.41573480615127256},
    {+0.35355339059327379, -0.35355339059327373, -0.35355339059327384,
     +0.35355339059327368, +0.35355339059327384, -0.35355339059327334,
     -0.35355339059327356, +0.35355339059327329},
    {+0.27778511650980114, -0.49039264020161522, +0.09754516100806415,
     +0.41573480615127273, -0.41573480615127256, -0.09754516100806401,
     +0.49039264020161533, -0.27778511650980076},
    {+0.19134171618254492, -0.46193976625564342, +0.46193976625564326,
     -0.19134171618254495, -0.19134171618254528, +0.46193976625564337,
     -0.46193976625564320, +0.19134171618254478},
    {+0.09754516100806417, -0.27778511650980109, +0.41573480615127273,
     -0.49039264020161533, +0.49039264020161522, -0.41573480615127251,
     +0.27778511650980076, -0.09754516100806429},
};

// in: level-shifted samples, row-major (in[y*8+x]).
// out: coefficients, row-major with vertical frequency as the row
// (out[u*8+v]); the DC term lands at out[0].
inline void fdct8x8(const double in[64], double out[64]) {
  double tmp[64];
  for (int u = 0; u < 8; ++u) {
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += kDctBasis[u][y] * in[y * 8 + x];
      tmp[u * 8 + x] = acc;
    }
  }
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += tmp[u * 8 + x] * kDctBasis[v][x];
      out[u * 8 + v] = acc;
    }
  }
}

// Inverse of fdct8x8; reconstructs level-shifted samples.
inline void idct8x8(const double in[64], double out[64]) {
  double tmp[64];
  for (int y = 0; y < 8; ++y) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += kDctBasis[u][y] * in[u * 8 + v];
      tmp[y * 8 + v] = acc;
    }
  }
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += tmp[y * 8 + v] * kDctBasis[v][x];
      out[y * 8 + x] = acc;
    }
  }
}

}  // namespace jshield
