#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "jshield/tensor.hpp"

namespace jshield {

enum class Padding { kValid, kSame };

namespace ops {

struct ConvGeometry {
  int out_h = 0, out_w = 0;
  int pad_top = 0, pad_left = 0;
};

inline ConvGeometry conv_geometry(int h, int w, int kernel, int stride, Padding padding) {
  ConvGeometry g;
  if (padding == Padding::kValid) {
    if (h < kernel || w < kernel) {
      throw std::invalid_argument("conv2d: input " + std::to_string(h) + "x" + std::to_string(w) +
                                  " smaller than kernel " + std::to_string(kernel));
    }
    g.out_h = (h - kernel) / stride + 1;
    g.out_w = (w - kernel) / stride + 1;
  } else {
    g.out_h = (h + stride - 1) / stride;
    g.out_w = (w + stride - 1) / stride;
    int pad_h = std::max((g.out_h - 1) * stride + kernel - h, 0);
    int pad_w = std::max((g.out_w - 1) * stride + kernel - w, 0);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
  }
  return g;
}

// x: [C,H,W], weight: [OC,C,K,K], bias: [OC] -> y: [OC,OH,OW].
// Inner products accumulate in double, storage stays in T.
template <class T>
TensorT<T> conv2d_forward(const TensorT<T>& x, const TensorT<T>& weight, const TensorT<T>& bias,
                          int stride, Padding padding) {
  const int c = x.shape[0], h = x.shape[1], w = x.shape[2];
  const int oc = weight.shape[0], k = weight.shape[2];
  const ConvGeometry g = conv_geometry(h, w, k, stride, padding);

  TensorT<T> y({oc, g.out_h, g.out_w});
  for (int o = 0; o < oc; ++o) {
    const T* wt = &weight.data[static_cast<std::size_t>(o) * c * k * k];
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox) {
        double acc = static_cast<double>(bias.data[o]);
        const int y0 = oy * stride - g.pad_top;
        const int x0 = ox * stride - g.pad_left;
        for (int ic = 0; ic < c; ++ic) {
          const T* xp = &x.data[static_cast<std::size_t>(ic) * h * w];
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y0 + ky;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = x0 + kx;
              if (ix < 0 || ix >= w) continue;
              acc += static_cast<double>(xp[iy * w + ix]) *
                     static_cast<double>(wt[(ic * k + ky) * k + kx]);
            }
          }
        }
        y.data[(static_cast<std::size_t>(o) * g.out_h + oy) * g.out_w + ox] = static_cast<T>(acc);
      }
    }
  }
  return y;
}

template <class T>
void conv2d_backward(const TensorT<T>& x, const TensorT<T>& weight, const TensorT<T>& dy,
                     int stride, Padding padding, TensorT<T>& dx, TensorT<T>& dweight,
                     TensorT<T>& dbias) {
  const int c = x.shape[0], h = x.shape[1], w = x.shape[2];
  const int oc = weight.shape[0], k = weight.shape[2];
  const ConvGeometry g = conv_geometry(h, w, k, stride, padding);

  std::vector<double> dx_acc(x.numel(), 0.0);
  std::vector<double> dw_acc(weight.numel(), 0.0);
  std::vector<double> db_acc(static_cast<std::size_t>(oc), 0.0);

  for (int o = 0; o < oc; ++o) {
    const T* wt = &weight.data[static_cast<std::size_t>(o) * c * k * k];
    double* dwt = &dw_acc[static_cast<std::size_t>(o) * c * k * k];
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox) {
        const double grad =
            dy.data[(static_cast<std::size_t>(o) * g.out_h + oy) * g.out_w + ox];
        db_acc[o] += grad;
        const int y0 = oy * stride - g.pad_top;
        const int x0 = ox * stride - g.pad_left;
        for (int ic = 0; ic < c; ++ic) {
          const T* xp = &x.data[static_cast<std::size_t>(ic) * h * w];
          double* dxp = &dx_acc[static_cast<std::size_t>(ic) * h * w];
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y0 + ky;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = x0 + kx;
              if (ix < 0 || ix >= w) continue;
              dxp[iy * w + ix] += grad * static_cast<double>(wt[(ic * k + ky) * k + kx]);
              dwt[(ic * k + ky) * k + kx] += grad * static_cast<double>(xp[iy * w + ix]);
            }
          }
        }
      }
    }
  }

  dx = TensorT<T>(x.shape);
  for (std::size_t i = 0; i < dx_acc.size(); ++i) dx.data[i] = static_cast<T>(dx_acc[i]);
  dweight = TensorT<T>(weight.shape);
  for (std::size_t i = 0; i < dw_acc.size(); ++i) dweight.data[i] = static_cast<T>(dw_acc[i]);
  dbias = TensorT<T>({oc});
  for (std::size_t i = 0; i < db_acc.size(); ++i) dbias.data[i] = static_cast<T>(db_acc[i]);
}

// Max pooling over non-overlapping (or strided) windows fully inside the
// plane. Ties break to the first maximal index in row-major order so the
// backward pass has one well-defined route. argmax holds, per output
// element, the flat index of the chosen input sample within its plane.
template <class T>
TensorT<T> maxpool2d_forward(const TensorT<T>& x, int size, int stride,
                             std::vector<std::int32_t>& argmax) {
  const int c = x.shape[0], h = x.shape[1], w = x.shape[2];
  if (h < size || w < size) {
    throw std::invalid_argument("maxpool2d: input " + std::to_string(h) + "x" +
                                std::to_string(w) + " smaller than window " +
                                std::to_string(size));
  }
  const int oh = (h - size) / stride + 1;
  const int ow = (w - size) / stride + 1;

  TensorT<T> y({c, oh, ow});
  argmax.assign(y.numel(), 0);
  for (int ic = 0; ic < c; ++ic) {
    const T* xp = &x.data[static_cast<std::size_t>(ic) * h * w];
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        int best_idx = (oy * stride) * w + (ox * stride);
        T best = xp[best_idx];
        for (int ky = 0; ky < size; ++ky) {
          for (int kx = 0; kx < size; ++kx) {
            const int idx = (oy * stride + ky) * w + (ox * stride + kx);
            if (xp[idx] > best) {
              best = xp[idx];
              best_idx = idx;
            }
          }
        }
        const std::size_t out_idx = (static_cast<std::size_t>(ic) * oh + oy) * ow + ox;
        y.data[out_idx] = best;
        argmax[out_idx] = best_idx;
      }
    }
  }
  return y;
}

template <class T>
TensorT<T> maxpool2d_backward(const TensorT<T>& dy, const std::vector<std::int32_t>& argmax,
                              const std::vector<int>& x_shape) {
  if (dy.shape.size() != 3 || x_shape.size() != 3) {
    throw std::invalid_argument("maxpool2d_backward: gradient shape " +
                                shape_string(dy.shape) + " and input shape " +
                                shape_string(x_shape) + " must both be CHW");
  }
  const int c = x_shape[0], h = x_shape[1], w = x_shape[2];
  const int oh = dy.shape[1], ow = dy.shape[2];
  TensorT<T> dx(x_shape);
  std::vector<double> acc(dx.numel(), 0.0);
  for (int ic = 0; ic < c; ++ic) {
    for (int i = 0; i < oh * ow; ++i) {
      const std::size_t out_idx = static_cast<std::size_t>(ic) * oh * ow + i;
      acc[static_cast<std::size_t>(ic) * h * w + argmax[out_idx]] +=
          static_cast<double>(dy.data[out_idx]);
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) dx.data[i] = static_cast<T>(acc[i]);
  return dx;
}

template <class T>
TensorT<T> relu_forward(const TensorT<T>& x) {
  TensorT<T> y(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
  return y;
}

// Gradient passes only where the pre-activation was strictly positive.
template <class T>
TensorT<T> relu_backward(const TensorT<T>& dy, const TensorT<T>& x_pre) {
  TensorT<T> dx(x_pre.shape);
  for (std::size_t i = 0; i < dx.numel(); ++i)
    dx.data[i] = x_pre.data[i] > T(0) ? dy.data[i] : T(0);
  return dx;
}

// x flattened to [IN], weight: [OUT,IN], bias: [OUT] -> y: [OUT].
template <class T>
TensorT<T> dense_forward(const TensorT<T>& x, const TensorT<T>& weight, const TensorT<T>& bias) {
  const int out = weight.shape[0], in = weight.shape[1];
  TensorT<T> y({out});
  for (int o = 0; o < out; ++o) {
    double acc = static_cast<double>(bias.data[o]);
    const T* wt = &weight.data[static_cast<std::size_t>(o) * in];
    for (int i = 0; i < in; ++i)
      acc += static_cast<double>(wt[i]) * static_cast<double>(x.data[i]);
    y.data[o] = static_cast<T>(acc);
  }
  return y;
}

template <class T>
void dense_backward(const TensorT<T>& x, const TensorT<T>& weight, const TensorT<T>& dy,
                    TensorT<T>& dx, TensorT<T>& dweight, TensorT<T>& dbias) {
  const int out = weight.shape[0], in = weight.shape[1];
  dx = TensorT<T>(x.shape);
  dweight = TensorT<T>(weight.shape);
  dbias = TensorT<T>({out});
  std::vector<double> dx_acc(static_cast<std::size_t>(in), 0.0);
  for (int o = 0; o < out; ++o) {
    const double grad = static_cast<double>(dy.data[o]);
    dbias.data[o] = static_cast<T>(grad);
    const T* wt = &weight.data[static_cast<std::size_t>(o) * in];
    T* dwt = &dweight.data[static_cast<std::size_t>(o) * in];
    for (int i = 0; i < in; ++i) {
      dx_acc[i] += grad * static_cast<double>(wt[i]);
      dwt[i] = static_cast<T>(grad * static_cast<double>(x.data[i]));
    }
  }
  for (int i = 0; i < in; ++i) dx.data[i] = static_cast<T>(dx_acc[i]);
}

// Numerically stable softmax probabilities, computed in double.
template <class T>
std::vector<double> softmax(const TensorT<T>& logits) {
  double m = -std::numeric_limits<double>::infinity();
  for (T v : logits.data) m = std::max(m, static_cast<double>(v));
  double sum = 0.0;
  std::vector<double> p(logits.numel());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(static_cast<double>(logits.data[i]) - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

// Softmax cross-entropy: loss = -log p[y]; dlogits = softmax - onehot.
template <class T>
double softmax_cross_entropy(const TensorT<T>& logits, int y, TensorT<T>* dlogits = nullptr) {
  const std::size_t n = logits.numel();
  double m = -std::numeric_limits<double>::infinity();
  for (T v : logits.data) m = std::max(m, static_cast<double>(v));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::exp(static_cast<double>(logits.data[i]) - m);
  const double lse = m + std::log(sum);
  const double loss = lse - static_cast<double>(logits.data[static_cast<std::size_t>(y)]);
  if (dlogits) {
    *dlogits = TensorT<T>(logits.shape);
    for (std::size_t i = 0; i < n; ++i) {
      double p = std::exp(static_cast<double>(logits.data[i]) - lse);
      dlogits->data[i] = static_cast<T>(p - (static_cast<int>(i) == y ? 1.0 : 0.0));
    }
  }
  return loss;
}

}  // namespace ops
}  // namespace jshield
