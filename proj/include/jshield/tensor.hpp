#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace jshield {

// Dense row-major tensor. Element type is a template parameter: the
// production network runs on float storage, tests instantiate double to
// compare reverse-mode gradients against finite differences at full
// precision. Reductions always accumulate in double regardless of T.
template <class T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;

  TensorT() = default;

  explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), T(0));
  }

  TensorT(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != numel_of(shape)) {
      throw std::invalid_argument("tensor: data length " + std::to_string(data.size()) +
                                  " does not match shape product " +
                                  std::to_string(numel_of(shape)));
    }
  }

  static std::size_t numel_of(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) {
      if (d <= 0) throw std::invalid_argument("tensor: non-positive dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t numel() const { return data.size(); }

  bool same_shape(const TensorT& other) const { return shape == other.shape; }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <class U>
  TensorT<U> cast() const {
    TensorT<U> out;
    out.shape = shape;
    out.data.reserve(data.size());
    for (T v : data) out.data.push_back(static_cast<U>(v));
    return out;
  }
};

using Tensor = TensorT<float>;

inline std::string shape_string(const std::vector<int>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

// Standardized network input plus the affine map that produced it from
// 8-bit pixels: std_value = (pixel/255 - mean) / scale. Keeping (mean,
// scale) alongside the values lets gradient signs be carried back to
// pixel space (the map is positive, so signs are unchanged).
template <class T>
struct StdTensorT {
  TensorT<T> values;
  double mean = 0.0;
  double scale = 1.0;
};

using StdTensor = StdTensorT<float>;

}  // namespace jshield
