#pragma once

#include <string>
#include <variant>
#include <vector>

#include "jshield/ops.hpp"
#include "jshield/tensor.hpp"

namespace jshield {

struct ConvLayer {
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  Padding padding = Padding::kSame;
};

struct PoolLayer {
  int size = 2;
  int stride = 2;
};

struct ReluLayer {};

struct DenseLayer {
  int out_features = 0;
};

using LayerDesc = std::variant<ConvLayer, PoolLayer, ReluLayer, DenseLayer>;

// Sequential CNN description: input geometry plus an ordered layer list.
// The last layer must be Dense; its width is the class count.
struct ArchitectureSpec {
  int in_channels = 1;
  int in_height = 0;
  int in_width = 0;
  std::vector<LayerDesc> layers;
};

namespace detail {

inline const char* layer_name(const LayerDesc& l) {
  if (std::holds_alternative<ConvLayer>(l)) return "conv2d";
  if (std::holds_alternative<PoolLayer>(l)) return "maxpool2d";
  if (std::holds_alternative<ReluLayer>(l)) return "relu";
  return "dense";
}

}  // namespace detail

// Output shape of every layer in order, validating that consecutive
// layers compose. Shapes are [C,H,W] until the first Dense, then [N].
inline std::vector<std::vector<int>> infer_shapes(const ArchitectureSpec& arch) {
  std::vector<std::vector<int>> shapes;
  std::vector<int> cur = {arch.in_channels, arch.in_height, arch.in_width};
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerDesc& l = arch.layers[i];
    if (const auto* conv = std::get_if<ConvLayer>(&l)) {
      if (cur.size() != 3)
        throw std::invalid_argument("layer " + std::to_string(i) + " (conv2d): needs CHW input");
      auto g = ops::conv_geometry(cur[1], cur[2], conv->kernel, conv->stride, conv->padding);
      cur = {conv->out_channels, g.out_h, g.out_w};
    } else if (const auto* pool = std::get_if<PoolLayer>(&l)) {
      if (cur.size() != 3)
        throw std::invalid_argument("layer " + std::to_string(i) + " (maxpool2d): needs CHW input");
      if (cur[1] < pool->size || cur[2] < pool->size)
        throw std::invalid_argument("layer " + std::to_string(i) + " (maxpool2d): input " +
                                    shape_string(cur) + " smaller than window");
      cur = {cur[0], (cur[1] - pool->size) / pool->stride + 1,
             (cur[2] - pool->size) / pool->stride + 1};
    } else if (std::holds_alternative<ReluLayer>(l)) {
      // shape preserved
    } else {
      const auto& dense = std::get<DenseLayer>(l);
      int in = 1;
      for (int d : cur) in *= d;
      (void)in;
      cur = {dense.out_features};
    }
    shapes.push_back(cur);
  }
  if (shapes.empty() || shapes.back().size() != 1)
    throw std::invalid_argument("architecture must end in a dense layer");
  return shapes;
}

inline int class_count(const ArchitectureSpec& arch) { return infer_shapes(arch).back()[0]; }

// Parameter tensor shapes in tape order: for each conv/dense layer a
// weight tensor followed by a bias tensor.
inline std::vector<std::vector<int>> parameter_shapes(const ArchitectureSpec& arch) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur = {arch.in_channels, arch.in_height, arch.in_width};
  for (const LayerDesc& l : arch.layers) {
    if (const auto* conv = std::get_if<ConvLayer>(&l)) {
      out.push_back({conv->out_channels, cur[0], conv->kernel, conv->kernel});
      out.push_back({conv->out_channels});
      auto g = ops::conv_geometry(cur[1], cur[2], conv->kernel, conv->stride, conv->padding);
      cur = {conv->out_channels, g.out_h, g.out_w};
    } else if (const auto* pool = std::get_if<PoolLayer>(&l)) {
      cur = {cur[0], (cur[1] - pool->size) / pool->stride + 1,
             (cur[2] - pool->size) / pool->stride + 1};
    } else if (std::holds_alternative<DenseLayer>(l)) {
      const auto& dense = std::get<DenseLayer>(l);
      int in = 1;
      for (int d : cur) in *= d;
      out.push_back({dense.out_features, in});
      out.push_back({dense.out_features});
      cur = {dense.out_features};
    }
  }
  return out;
}

// Trained network: architecture, ordered parameter tensors (weight, bias
// per parametric layer), the dataset-global standardization constants,
// and class labels.
template <class T>
struct ModelWeightsT {
  ArchitectureSpec arch;
  std::vector<TensorT<T>> params;
  double std_mean = 0.0;
  double std_scale = 1.0;
  std::vector<std::string> class_names;

  template <class U>
  ModelWeightsT<U> cast() const {
    ModelWeightsT<U> out;
    out.arch = arch;
    out.params.reserve(params.size());
    for (const auto& p : params) out.params.push_back(p.template cast<U>());
    out.std_mean = std_mean;
    out.std_scale = std_scale;
    out.class_names = class_names;
    return out;
  }
};

using ModelWeights = ModelWeightsT<float>;

// Zero-initialized parameter set matching the architecture.
template <class T = float>
ModelWeightsT<T> zero_weights(const ArchitectureSpec& arch) {
  ModelWeightsT<T> w;
  w.arch = arch;
  for (const auto& s : parameter_shapes(arch)) w.params.emplace_back(s);
  return w;
}

}  // namespace jshield
