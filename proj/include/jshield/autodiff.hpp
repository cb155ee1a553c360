#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "jshield/arch.hpp"
#include "jshield/ops.hpp"
#include "jshield/tensor.hpp"

namespace jshield {

// Execution record of one forward pass. Each entry keeps the layer input
// (the pre-activation, for relu) plus maxpool argmax routes. A tape is
// single-use: replaying it backward visits each op exactly once in
// reverse execution order.
template <class T>
struct TapeT {
  struct Entry {
    TensorT<T> input;                 // layer input as seen in forward
    std::vector<std::int32_t> argmax; // maxpool only
  };
  std::vector<Entry> entries;
  bool consumed = false;
};

using Tape = TapeT<float>;

template <class T>
struct GradientT {
  TensorT<T> input_grad;
  std::vector<TensorT<T>> param_grads;  // matches ModelWeightsT::params order
};

using Gradient = GradientT<float>;

// Forward pass through the sequential net. Returns logits and the tape
// needed for one backward pass. Deterministic: identical inputs give
// bit-identical logits.
template <class T>
std::pair<TensorT<T>, TapeT<T>> forward(const ModelWeightsT<T>& weights,
                                        const StdTensorT<T>& x) {
  const ArchitectureSpec& arch = weights.arch;
  const std::vector<int> expected = {arch.in_channels, arch.in_height, arch.in_width};
  if (x.values.shape != expected) {
    throw std::invalid_argument("forward: input shape " + shape_string(x.values.shape) +
                                " does not match architecture input " + shape_string(expected));
  }

  TapeT<T> tape;
  TensorT<T> cur = x.values;
  std::size_t param_idx = 0;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerDesc& l = arch.layers[i];
    typename TapeT<T>::Entry entry;
    entry.input = cur;
    if (const auto* conv = std::get_if<ConvLayer>(&l)) {
      const TensorT<T>& w = weights.params.at(param_idx);
      const TensorT<T>& b = weights.params.at(param_idx + 1);
      if (w.shape[1] != cur.shape[0]) {
        throw std::invalid_argument("layer " + std::to_string(i) + " (conv2d): weight expects " +
                                    std::to_string(w.shape[1]) + " channels, input has " +
                                    std::to_string(cur.shape[0]));
      }
      cur = ops::conv2d_forward(cur, w, b, conv->stride, conv->padding);
      param_idx += 2;
    } else if (const auto* pool = std::get_if<PoolLayer>(&l)) {
      cur = ops::maxpool2d_forward(cur, pool->size, pool->stride, entry.argmax);
    } else if (std::holds_alternative<ReluLayer>(l)) {
      cur = ops::relu_forward(cur);
    } else {
      const TensorT<T>& w = weights.params.at(param_idx);
      const TensorT<T>& b = weights.params.at(param_idx + 1);
      if (static_cast<std::size_t>(w.shape[1]) != cur.numel()) {
        throw std::invalid_argument("layer " + std::to_string(i) + " (dense): weight expects " +
                                    std::to_string(w.shape[1]) + " inputs, got " +
                                    std::to_string(cur.numel()));
      }
      // Keep the unflattened input: the backward pass shapes its input
      // gradient from it, so upstream layers see the original CHW shape.
      entry.input = cur;
      cur = ops::dense_forward(cur, w, b);
      param_idx += 2;
    }
    tape.entries.push_back(std::move(entry));
  }
  return {std::move(cur), std::move(tape)};
}

// Reverse pass from d(loss)/d(logits) down to the input and every
// parameter. Consumes the tape.
template <class T>
GradientT<T> backward(const ModelWeightsT<T>& weights, TapeT<T>& tape,
                      const TensorT<T>& dlogits) {
  if (tape.consumed) throw std::logic_error("backward: tape already consumed");
  tape.consumed = true;

  const ArchitectureSpec& arch = weights.arch;
  GradientT<T> grads;
  grads.param_grads.resize(weights.params.size());

  // Param index of the last parametric layer before layer i, walked backward.
  std::size_t param_idx = weights.params.size();
  TensorT<T> dcur = dlogits;
  for (std::size_t ri = arch.layers.size(); ri-- > 0;) {
    const LayerDesc& l = arch.layers[ri];
    typename TapeT<T>::Entry& entry = tape.entries[ri];
    if (const auto* conv = std::get_if<ConvLayer>(&l)) {
      param_idx -= 2;
      TensorT<T> dx, dw, db;
      ops::conv2d_backward(entry.input, weights.params[param_idx], dcur, conv->stride,
                           conv->padding, dx, dw, db);
      grads.param_grads[param_idx] = std::move(dw);
      grads.param_grads[param_idx + 1] = std::move(db);
      dcur = std::move(dx);
    } else if (std::holds_alternative<PoolLayer>(l)) {
      dcur = ops::maxpool2d_backward(dcur, entry.argmax, entry.input.shape);
    } else if (std::holds_alternative<ReluLayer>(l)) {
      dcur = ops::relu_backward(dcur, entry.input);
    } else {
      param_idx -= 2;
      TensorT<T> dx, dw, db;
      ops::dense_backward(entry.input, weights.params[param_idx], dcur, dx, dw, db);
      grads.param_grads[param_idx] = std::move(dw);
      grads.param_grads[param_idx + 1] = std::move(db);
      dcur = std::move(dx);
    }
  }
  dcur.shape = {arch.in_channels, arch.in_height, arch.in_width};
  grads.input_grad = std::move(dcur);
  return grads;
}

// Softmax cross-entropy loss -log p(y|x) and its gradients with respect
// to the input and all parameters.
template <class T>
std::pair<double, GradientT<T>> loss_and_gradients(const ModelWeightsT<T>& weights,
                                                   const StdTensorT<T>& x, int y) {
  const int classes = class_count(weights.arch);
  if (y < 0 || y >= classes) {
    throw std::invalid_argument("loss_and_gradients: label " + std::to_string(y) +
                                " outside [0, " + std::to_string(classes) + ")");
  }
  auto [logits, tape] = forward(weights, x);
  TensorT<T> dlogits;
  const double loss = ops::softmax_cross_entropy(logits, y, &dlogits);
  return {loss, backward(weights, tape, dlogits)};
}

// Central finite differences (f(x+h e_i) - f(x-h e_i)) / 2h per
// coordinate; the verification oracle for reverse-mode gradients.
// F is any callable TensorT<T> -> double.
template <class T, class F>
TensorT<T> finite_diff_gradient(F&& f, const TensorT<T>& x, double h) {
  if (!(h > 0)) throw std::invalid_argument("finite_diff_gradient: h must be positive");
  TensorT<T> grad(x.shape);
  TensorT<T> probe = x;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const T orig = probe.data[i];
    probe.data[i] = static_cast<T>(static_cast<double>(orig) + h);
    const double fp = f(probe);
    probe.data[i] = static_cast<T>(static_cast<double>(orig) - h);
    const double fm = f(probe);
    probe.data[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::runtime_error("finite_diff_gradient: non-finite value at coordinate " +
                               std::to_string(i));
    }
    grad.data[i] = static_cast<T>((fp - fm) / (2.0 * h));
  }
  return grad;
}

}  // namespace jshield
