#pragma once

#include <cmath>
#include <stdexcept>

#include "jshield/image.hpp"
#include "jshield/tensor.hpp"

namespace jshield {

// Evaluation-time geometry and standardization. resize_min_dim/crop_size
// of 0 mean "leave alone" (native-geometry datasets).
struct PreprocessConfig {
  int resize_min_dim = 0;
  int crop_size = 0;
  bool standardize = true;
};

inline void validate_preprocess_config(const PreprocessConfig& cfg) {
  if (cfg.resize_min_dim < 0)
    throw std::invalid_argument("preprocess: resize_min_dim must be >= 0, got " +
                                std::to_string(cfg.resize_min_dim));
  if (cfg.crop_size < 0)
    throw std::invalid_argument("preprocess: crop_size must be >= 0, got " +
                                std::to_string(cfg.crop_size));
  if (cfg.resize_min_dim > 0 && cfg.crop_size > cfg.resize_min_dim) {
    throw std::invalid_argument("preprocess: crop_size " + std::to_string(cfg.crop_size) +
                                " exceeds resize_min_dim " + std::to_string(cfg.resize_min_dim));
  }
}

// Bilinear resample to an explicit target size, half-pixel-center
// convention, edge clamped.
inline Image resize_bilinear(const Image& img, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("resize: non-positive target size");
  Image out(out_w, out_h, img.channels);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    if (fy < 0) fy = 0;
    if (fy > img.height - 1) fy = img.height - 1;
    const int y0 = static_cast<int>(fy);
    const int y1 = y0 + 1 < img.height ? y0 + 1 : y0;
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      if (fx < 0) fx = 0;
      if (fx > img.width - 1) fx = img.width - 1;
      const int x0 = static_cast<int>(fx);
      const int x1 = x0 + 1 < img.width ? x0 + 1 : x0;
      const double wx = fx - x0;
      for (int c = 0; c < img.channels; ++c) {
        const double v = (1 - wy) * ((1 - wx) * img.at(x0, y0, c) + wx * img.at(x1, y0, c)) +
                         wy * ((1 - wx) * img.at(x0, y1, c) + wx * img.at(x1, y1, c));
        out.at(x, y, c) = clamp_u8(v);
      }
    }
  }
  return out;
}

// Scale so the smaller dimension equals min_dim, preserving aspect ratio;
// the other dimension rounds half up.
inline Image resize_min_dimension(const Image& img, int min_dim) {
  if (img.width <= img.height) {
    const int out_h =
        static_cast<int>(std::floor(static_cast<double>(img.height) * min_dim / img.width + 0.5));
    return resize_bilinear(img, min_dim, out_h);
  }
  const int out_w =
      static_cast<int>(std::floor(static_cast<double>(img.width) * min_dim / img.height + 0.5));
  return resize_bilinear(img, out_w, min_dim);
}

inline Image center_crop(const Image& img, int crop) {
  if (crop > img.width || crop > img.height) {
    throw std::invalid_argument("center_crop: image " + std::to_string(img.width) + "x" +
                                std::to_string(img.height) + " smaller than crop " +
                                std::to_string(crop));
  }
  const int ox = (img.width - crop) / 2;
  const int oy = (img.height - crop) / 2;
  Image out(crop, crop, img.channels);
  for (int y = 0; y < crop; ++y)
    for (int x = 0; x < crop; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(ox + x, oy + y, c);
  return out;
}

// Interleaved 8-bit image -> planar CHW standardized tensor:
// value = (pixel/255 - mean) / scale.
template <class T = float>
StdTensorT<T> standardize(const Image& img, double mean, double scale) {
  if (!(scale > 0)) throw std::invalid_argument("standardize: scale must be positive");
  StdTensorT<T> out;
  out.mean = mean;
  out.scale = scale;
  out.values = TensorT<T>({img.channels, img.height, img.width});
  std::size_t i = 0;
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.values.data[i++] =
            static_cast<T>((static_cast<double>(img.at(x, y, c)) / 255.0 - mean) / scale);
  return out;
}

// Pixel-geometry part of preprocess (resize + crop, no standardization);
// the attack and codec transforms operate on this 8-bit image.
inline Image preprocess_geometry(const Image& img, const PreprocessConfig& cfg) {
  validate_preprocess_config(cfg);
  Image cur = img;
  if (cfg.resize_min_dim > 0) cur = resize_min_dimension(cur, cfg.resize_min_dim);
  if (cfg.crop_size > 0) cur = center_crop(cur, cfg.crop_size);
  return cur;
}

template <class T = float>
StdTensorT<T> preprocess(const Image& img, const PreprocessConfig& cfg, double mean,
                         double scale) {
  Image cur = preprocess_geometry(img, cfg);
  if (!cfg.standardize) {
    mean = 0.0;
    scale = 1.0;
  }
  return standardize<T>(cur, mean, scale);
}

}  // namespace jshield
