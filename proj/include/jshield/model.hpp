#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "jshield/arch.hpp"
#include "jshield/autodiff.hpp"
#include "jshield/binio.hpp"
#include "jshield/dataset.hpp"
#include "jshield/preprocess.hpp"
#include "jshield/rng.hpp"

namespace jshield {

// Full class-probability vector. top_class is the smallest index
// attaining the maximum; tie_flag reports a non-unique maximum.
struct Prediction {
  std::vector<double> probs;
  int top_class = 0;
  double top_prob = 0.0;
  bool tie_flag = false;
};

template <class T>
Prediction predict(const ModelWeightsT<T>& weights, const StdTensorT<T>& x) {
  auto [logits, tape] = forward(weights, x);
  (void)tape;
  Prediction pred;
  pred.probs = ops::softmax(logits);
  for (std::size_t i = 1; i < pred.probs.size(); ++i)
    if (pred.probs[i] > pred.probs[pred.top_class]) pred.top_class = static_cast<int>(i);
  pred.top_prob = pred.probs[pred.top_class];
  for (std::size_t i = 0; i < pred.probs.size(); ++i) {
    if (static_cast<int>(i) != pred.top_class && pred.probs[i] >= pred.top_prob - 1e-9) {
      pred.tie_flag = true;
      break;
    }
  }
  return pred;
}

// --- reference architectures ----------------------------------------------

// conv(8,3x3) relu pool2 conv(16,3x3) relu pool2 dense(10); the smallest
// stack that cleanly separates desk-scale digit data.
inline ArchitectureSpec mnist_arch() {
  ArchitectureSpec a;
  a.in_channels = 1;
  a.in_height = 28;
  a.in_width = 28;
  a.layers = {ConvLayer{8, 3, 1, Padding::kSame},  ReluLayer{}, PoolLayer{2, 2},
              ConvLayer{16, 3, 1, Padding::kSame}, ReluLayer{}, PoolLayer{2, 2},
              DenseLayer{10}};
  return a;
}

inline ArchitectureSpec cifar10_arch() {
  ArchitectureSpec a;
  a.in_channels = 3;
  a.in_height = 32;
  a.in_width = 32;
  a.layers = {ConvLayer{8, 3, 1, Padding::kSame},  ReluLayer{}, PoolLayer{2, 2},
              ConvLayer{16, 3, 1, Padding::kSame}, ReluLayer{}, PoolLayer{2, 2},
              DenseLayer{10}};
  return a;
}

// --- training ---------------------------------------------------------------

struct TrainConfig {
  int epochs = 12;
  int batch_size = 32;
  double learning_rate = 0.02;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct TrainResult {
  ModelWeights weights;
  double final_train_loss = 0.0;
  double validation_accuracy = -1.0;  // -1 when no validation set given
  std::vector<double> epoch_losses;   // mean loss per epoch
};

// Dataset-global standardization constants over [0,1]-scaled pixels.
inline std::pair<double, double> compute_std_stats(const Dataset& data) {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (const Image& img : data.images) {
    for (std::uint8_t p : img.pixels) {
      const double v = p / 255.0;
      sum += v;
      sum_sq += v * v;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(sum_sq / static_cast<double>(n) - mean * mean, 0.0);
  const double scale = std::max(std::sqrt(var), 1e-6);
  return {mean, scale};
}

// He-style uniform init, sampled from our own generator so a seed fully
// determines the weights on any platform.
inline ModelWeights init_weights(const ArchitectureSpec& arch, std::uint64_t seed) {
  ModelWeights w = zero_weights<float>(arch);
  SplitMix64 rng(mix_seed(seed, 0x494e4954));  // "INIT"
  for (TensorT<float>& p : w.params) {
    if (p.shape.size() == 1) continue;  // biases stay zero
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < p.shape.size(); ++d) fan_in *= static_cast<std::size_t>(p.shape[d]);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (float& v : p.data) v = static_cast<float>(rng.next_symmetric(bound));
  }
  return w;
}

template <class T>
double dataset_accuracy(const ModelWeightsT<T>& weights, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = standardize<T>(data.images[i], weights.std_mean, weights.std_scale);
    if (predict(weights, x).top_class == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// Plain minibatch SGD with optional momentum, deterministic shuffling
// from the seed, single-threaded. Aborts on a non-finite loss.
inline TrainResult train(const ArchitectureSpec& arch, const Dataset& data,
                         const TrainConfig& cfg, const Dataset* validation = nullptr) {
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (cfg.learning_rate < 0) throw std::invalid_argument("train: negative learning rate");
  if (class_count(arch) < data.class_count)
    throw std::invalid_argument("train: architecture has fewer classes than dataset");

  TrainResult result;
  result.weights = init_weights(arch, cfg.seed);
  auto [mean, scale] = compute_std_stats(data);
  result.weights.std_mean = mean;
  result.weights.std_scale = scale;
  for (int c = 0; c < class_count(arch); ++c) result.weights.class_names.push_back(std::to_string(c));

  std::vector<StdTensor> inputs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    inputs[i] = standardize<float>(data.images[i], mean, scale);

  std::vector<TensorT<float>> velocity;
  if (cfg.momentum != 0.0)
    for (const auto& p : result.weights.params) velocity.emplace_back(p.shape);

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 shuffle_rng(mix_seed(cfg.seed, 0x53485546));  // "SHUF"

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_in_place(order, shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);

      std::vector<std::vector<double>> grad_acc(result.weights.params.size());
      for (std::size_t p = 0; p < grad_acc.size(); ++p)
        grad_acc[p].assign(result.weights.params[p].numel(), 0.0);

      for (std::size_t bi = start; bi < end; ++bi) {
        const std::size_t idx = order[bi];
        auto [loss, grads] = loss_and_gradients(result.weights, inputs[idx], data.labels[idx]);
        if (!std::isfinite(loss)) {
          throw std::runtime_error("train: diverged (non-finite loss) at epoch " +
                                   std::to_string(epoch) + ", step " +
                                   std::to_string(start / cfg.batch_size));
        }
        epoch_loss += loss;
        for (std::size_t p = 0; p < grad_acc.size(); ++p)
          for (std::size_t k = 0; k < grad_acc[p].size(); ++k)
            grad_acc[p][k] += static_cast<double>(grads.param_grads[p].data[k]);
      }

      for (std::size_t p = 0; p < result.weights.params.size(); ++p) {
        float* w = result.weights.params[p].data.data();
        for (std::size_t k = 0; k < grad_acc[p].size(); ++k) {
          const double g = grad_acc[p][k] * inv_batch;
          double step = cfg.learning_rate * g;
          if (cfg.momentum != 0.0) {
            double v = cfg.momentum * static_cast<double>(velocity[p].data[k]) + step;
            velocity[p].data[k] = static_cast<float>(v);
            step = v;
          }
          w[k] = static_cast<float>(static_cast<double>(w[k]) - step);
        }
      }
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(data.size()));
  }

  result.final_train_loss = result.epoch_losses.empty() ? 0.0 : result.epoch_losses.back();
  if (validation) result.validation_accuracy = dataset_accuracy(result.weights, *validation);
  return result;
}

// --- weight persistence -----------------------------------------------------
//
// File layout (all integers little-endian):
//   "JSHD"  u32 version
//   arch    u32 in_c, in_h, in_w; u32 n_layers; per layer u8 kind + fields
//   stats   f64 mean, f64 scale
//   names   u32 count, length-prefixed strings
//   params  u32 count; per tensor: u32 ndim, u32 dims..., f32 data
//   u32 crc32 over everything before it

namespace detail {

constexpr char kWeightsMagic[4] = {'J', 'S', 'H', 'D'};
constexpr std::uint32_t kWeightsVersion = 1;

inline void write_arch(ByteWriter& w, const ArchitectureSpec& arch) {
  w.u32(static_cast<std::uint32_t>(arch.in_channels));
  w.u32(static_cast<std::uint32_t>(arch.in_height));
  w.u32(static_cast<std::uint32_t>(arch.in_width));
  w.u32(static_cast<std::uint32_t>(arch.layers.size()));
  for (const LayerDesc& l : arch.layers) {
    if (const auto* conv = std::get_if<ConvLayer>(&l)) {
      w.u8(0);
      w.u32(static_cast<std::uint32_t>(conv->out_channels));
      w.u32(static_cast<std::uint32_t>(conv->kernel));
      w.u32(static_cast<std::uint32_t>(conv->stride));
      w.u8(conv->padding == Padding::kSame ? 1 : 0);
    } else if (const auto* pool = std::get_if<PoolLayer>(&l)) {
      w.u8(1);
      w.u32(static_cast<std::uint32_t>(pool->size));
      w.u32(static_cast<std::uint32_t>(pool->stride));
    } else if (std::holds_alternative<ReluLayer>(l)) {
      w.u8(2);
    } else {
      w.u8(3);
      w.u32(static_cast<std::uint32_t>(std::get<DenseLayer>(l).out_features));
    }
  }
}

inline ArchitectureSpec read_arch(ByteReader& r) {
  ArchitectureSpec arch;
  arch.in_channels = static_cast<int>(r.u32());
  arch.in_height = static_cast<int>(r.u32());
  arch.in_width = static_cast<int>(r.u32());
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    switch (r.u8()) {
      case 0: {
        ConvLayer c;
        c.out_channels = static_cast<int>(r.u32());
        c.kernel = static_cast<int>(r.u32());
        c.stride = static_cast<int>(r.u32());
        c.padding = r.u8() ? Padding::kSame : Padding::kValid;
        arch.layers.emplace_back(c);
        break;
      }
      case 1: {
        PoolLayer p;
        p.size = static_cast<int>(r.u32());
        p.stride = static_cast<int>(r.u32());
        arch.layers.emplace_back(p);
        break;
      }
      case 2: arch.layers.emplace_back(ReluLayer{}); break;
      case 3: arch.layers.emplace_back(DenseLayer{static_cast<int>(r.u32())}); break;
      default:
        throw std::runtime_error("weights: unknown layer kind at offset " +
                                 std::to_string(r.offset() - 1));
    }
  }
  return arch;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_weights(const ModelWeights& weights) {
  ByteWriter w;
  w.raw(detail::kWeightsMagic, 4);
  w.u32(detail::kWeightsVersion);
  detail::write_arch(w, weights.arch);
  w.f64(weights.std_mean);
  w.f64(weights.std_scale);
  w.u32(static_cast<std::uint32_t>(weights.class_names.size()));
  for (const std::string& name : weights.class_names) w.str(name);
  w.u32(static_cast<std::uint32_t>(weights.params.size()));
  for (const TensorT<float>& p : weights.params) {
    w.u32(static_cast<std::uint32_t>(p.shape.size()));
    for (int d : p.shape) w.u32(static_cast<std::uint32_t>(d));
    for (float v : p.data) w.f32(v);
  }
  w.u32(crc32(w.bytes));
  return w.bytes;
}

inline ModelWeights deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, detail::kWeightsMagic, 4) != 0) {
    throw std::runtime_error("weights: magic mismatch at offset 0 (want \"JSHD\")");
  }
  const std::uint32_t version = r.u32();
  if (version != detail::kWeightsVersion) {
    throw std::runtime_error("weights: unsupported version " + std::to_string(version) +
                             " (supported: " + std::to_string(detail::kWeightsVersion) + ")");
  }
  ModelWeights weights;
  weights.arch = detail::read_arch(r);
  weights.std_mean = r.f64();
  weights.std_scale = r.f64();
  const std::uint32_t n_names = r.u32();
  for (std::uint32_t i = 0; i < n_names; ++i) weights.class_names.push_back(r.str());
  const std::uint32_t n_params = r.u32();
  for (std::uint32_t i = 0; i < n_params; ++i) {
    const std::uint32_t ndim = r.u32();
    std::vector<int> shape(ndim);
    for (std::uint32_t d = 0; d < ndim; ++d) shape[d] = static_cast<int>(r.u32());
    TensorT<float> t(shape);
    for (float& v : t.data) v = r.f32();
    weights.params.push_back(std::move(t));
  }
  const std::size_t crc_offset = r.offset();
  const std::uint32_t stored_crc = r.u32();
  const std::uint32_t actual_crc = crc32(bytes.data(), crc_offset);
  if (stored_crc != actual_crc) {
    throw std::runtime_error("weights: CRC mismatch at offset " + std::to_string(crc_offset));
  }
  if (!(weights.std_scale > 0)) throw std::runtime_error("weights: non-positive std scale");
  const auto expected_shapes = parameter_shapes(weights.arch);
  if (expected_shapes.size() != weights.params.size())
    throw std::runtime_error("weights: parameter count does not match architecture");
  for (std::size_t i = 0; i < expected_shapes.size(); ++i) {
    if (weights.params[i].shape != expected_shapes[i])
      throw std::runtime_error("weights: parameter " + std::to_string(i) + " has shape " +
                               shape_string(weights.params[i].shape) + ", architecture wants " +
                               shape_string(expected_shapes[i]));
  }
  return weights;
}

inline void save_weights(const ModelWeights& weights, const std::string& path) {
  write_file_bytes(path, serialize_weights(weights));
}

inline ModelWeights load_weights(const std::string& path) {
  return deserialize_weights(read_file_bytes(path));
}

}  // namespace jshield
