#pragma once

// Fast Gradient Sign attack and its two counter-transformations:
// compression of the attacked image, and "compression noise" — the
// compression delta re-applied under a random permutation, which keeps
// every permutation-invariant statistic of the delta while destroying
// its spatial structure.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jshield/autodiff.hpp"
#include "jshield/image.hpp"
#include "jshield/jpeg_codec.hpp"
#include "jshield/model.hpp"
#include "jshield/preprocess.hpp"
#include "jshield/rng.hpp"

namespace jshield {

struct AttackSpec {
  int epsilon = 1;    // perturbation magnitude in 0..255 pixel units
  bool clamp = true;  // clamp the perturbed pixels back into 0..255
};

// Signed per-pixel difference with the same geometry as an Image.
struct Perturbation {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::int16_t> delta;

  bool matches(const Image& img) const {
    return width == img.width && height == img.height && channels == img.channels;
  }
};

// Identifies the deterministic permutation stream for one image.
struct PermSeed {
  std::uint64_t global_seed = 0;
  std::uint64_t image_index = 0;
};

// Optional details reported by fgsm.
struct FgsmInfo {
  int label = 0;          // clean top class the attack ascends against
  bool tie_warning = false;  // clean top class was not unique
};

// One step of gradient-sign ascent on the training loss, evaluated at
// the model's own top label for the clean image. The gradient is taken
// with respect to the standardized input; standardization is a positive
// affine map, so the pixel-space gradient has the same sign pattern and
// the perturbation can be applied directly to 8-bit pixels:
// pixel' = clamp(pixel + epsilon * sign(grad), 0, 255), sign(0) = 0.
template <class T>
Image fgsm(const ModelWeightsT<T>& weights, const Image& img, const AttackSpec& spec,
           FgsmInfo* info = nullptr) {
  if (spec.epsilon < 0) {
    throw std::invalid_argument("fgsm: epsilon must be non-negative, got " +
                                std::to_string(spec.epsilon));
  }
  const auto& arch = weights.arch;
  if (img.channels != arch.in_channels || img.height != arch.in_height ||
      img.width != arch.in_width) {
    throw std::invalid_argument("fgsm: image geometry " + img.geometry_string() +
                                " does not match model input " +
                                std::to_string(arch.in_width) + "x" +
                                std::to_string(arch.in_height) + "x" +
                                std::to_string(arch.in_channels));
  }

  const StdTensorT<T> x = standardize<T>(img, weights.std_mean, weights.std_scale);
  const Prediction clean = predict(weights, x);
  if (info != nullptr) {
    info->label = clean.top_class;
    info->tie_warning = clean.tie_flag;
  }

  const auto [loss, grads] = loss_and_gradients(weights, x, clean.top_class);
  (void)loss;

  Image out = img;
  // input_grad is planar CHW; the image is interleaved HWC.
  std::size_t i = 0;
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x_pos = 0; x_pos < img.width; ++x_pos, ++i) {
        const double g = static_cast<double>(grads.input_grad.data[i]);
        const int sign = g > 0 ? 1 : (g < 0 ? -1 : 0);
        const int v = static_cast<int>(img.at(x_pos, y, c)) + spec.epsilon * sign;
        if (spec.clamp) {
          out.at(x_pos, y, c) = clamp_u8(v);
        } else {
          if (v < 0 || v > 255) {
            throw std::invalid_argument("fgsm: perturbed pixel " + std::to_string(v) +
                                        " leaves 0..255 and clamping is disabled");
          }
          out.at(x_pos, y, c) = static_cast<std::uint8_t>(v);
        }
      }
    }
  }
  return out;
}

// The compression delta JPG[x] - x, in exact integer arithmetic.
inline Perturbation jpg_delta(const Image& img, const CodecConfig& cfg = {}) {
  const Image projected = jpg_project(img, cfg);
  Perturbation p;
  p.width = img.width;
  p.height = img.height;
  p.channels = img.channels;
  p.delta.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    p.delta[i] = static_cast<std::int16_t>(static_cast<int>(projected.pixels[i]) -
                                           static_cast<int>(img.pixels[i]));
  }
  return p;
}

// Applies the Fisher-Yates permutation determined by (global_seed,
// image_index) to the flattened delta across all pixel-channel slots.
inline Perturbation permute_delta(const Perturbation& p, const PermSeed& seed) {
  SplitMix64 rng(mix_seed(seed.global_seed, seed.image_index));
  Perturbation out = p;
  shuffle_in_place(out.delta, rng);
  return out;
}

// img + delta, clamped to 0..255.
inline Image apply_delta_clamped(const Image& img, const Perturbation& p) {
  if (!p.matches(img)) {
    throw std::invalid_argument("apply_delta: perturbation shape " + std::to_string(p.width) +
                                "x" + std::to_string(p.height) + "x" +
                                std::to_string(p.channels) + " does not match image " +
                                img.geometry_string());
  }
  Image out = img;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    out.pixels[i] = clamp_u8(static_cast<int>(img.pixels[i]) + static_cast<int>(p.delta[i]));
  }
  return out;
}

// The permuted-compression-noise control: img + P * (JPG[img] - img).
inline Image jpg_noise(const Image& img_adv, const CodecConfig& cfg, const PermSeed& seed) {
  return apply_delta_clamped(img_adv, permute_delta(jpg_delta(img_adv, cfg), seed));
}

}  // namespace jshield
