#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "semmask/tensor.hpp"

namespace semmask::nn {

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int pad = 0;
  int dilation = 1;

  int out_size(int in) const { return (in + 2 * pad - dilation * (kernel - 1) - 1) / stride + 1; }
};

// Unfolds one C x H x W image into a (C*k*k) x (Ho*Wo) column matrix.
template <typename T>
void im2col(const T* img, int channels, int height, int width, const ConvGeometry& g, T* cols) {
  const int ho = g.out_size(height), wo = g.out_size(width);
  const int k = g.kernel;
  for (int c = 0; c < channels; ++c) {
    const T* plane = img + std::size_t(c) * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = cols + (std::size_t(c) * k * k + ky * k + kx) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky * g.dilation;
          T* dst = row + std::size_t(oy) * wo;
          if (iy < 0 || iy >= height) {
            std::fill(dst, dst + wo, T(0));
            continue;
          }
          const T* src = plane + std::size_t(iy) * width;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx * g.dilation;
            dst[ox] = (ix >= 0 && ix < width) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates columns back into the image.
template <typename T>
void col2im(const T* cols, int channels, int height, int width, const ConvGeometry& g, T* img) {
  const int ho = g.out_size(height), wo = g.out_size(width);
  const int k = g.kernel;
  for (int c = 0; c < channels; ++c) {
    T* plane = img + std::size_t(c) * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = cols + (std::size_t(c) * k * k + ky * k + kx) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky * g.dilation;
          if (iy < 0 || iy >= height) continue;
          const T* src = row + std::size_t(oy) * wo;
          T* dst = plane + std::size_t(iy) * width;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx * g.dilation;
            if (ix >= 0 && ix < width) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

// Adaptive average pooling bin boundaries: [floor(i*n/p), ceil((i+1)*n/p)).
inline int adaptive_start(int i, int in, int out) { return (i * in) / out; }
inline int adaptive_end(int i, int in, int out) { return ((i + 1) * in + out - 1) / out; }

template <typename T>
Tensor<T> adaptive_avg_pool(const Tensor<T>& x, int out_h, int out_w) {
  Tensor<T> y(Shape{x.n(), x.c(), out_h, out_w});
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      const T* src = x.plane(n, c);
      T* dst = y.plane(n, c);
      for (int oy = 0; oy < out_h; ++oy) {
        const int y0 = adaptive_start(oy, x.h(), out_h), y1 = adaptive_end(oy, x.h(), out_h);
        for (int ox = 0; ox < out_w; ++ox) {
          const int x0 = adaptive_start(ox, x.w(), out_w), x1 = adaptive_end(ox, x.w(), out_w);
          T acc = 0;
          for (int iy = y0; iy < y1; ++iy)
            for (int ix = x0; ix < x1; ++ix) acc += src[iy * x.w() + ix];
          dst[oy * out_w + ox] = acc / T((y1 - y0) * (x1 - x0));
        }
      }
    }
  return y;
}

template <typename T>
Tensor<T> adaptive_avg_pool_backward(const Tensor<T>& grad_out, const Shape& in_shape) {
  Tensor<T> gx(in_shape);
  const int out_h = grad_out.h(), out_w = grad_out.w();
  for (int n = 0; n < in_shape.n; ++n)
    for (int c = 0; c < in_shape.c; ++c) {
      const T* g = grad_out.plane(n, c);
      T* dst = gx.plane(n, c);
      for (int oy = 0; oy < out_h; ++oy) {
        const int y0 = adaptive_start(oy, in_shape.h, out_h), y1 = adaptive_end(oy, in_shape.h, out_h);
        for (int ox = 0; ox < out_w; ++ox) {
          const int x0 = adaptive_start(ox, in_shape.w, out_w), x1 = adaptive_end(ox, in_shape.w, out_w);
          const T v = g[oy * out_w + ox] / T((y1 - y0) * (x1 - x0));
          for (int iy = y0; iy < y1; ++iy)
            for (int ix = x0; ix < x1; ++ix) dst[iy * in_shape.w + ix] += v;
        }
      }
    }
  return gx;
}

// Bilinear interpolation with half-pixel centres (align_corners = false).
struct LerpTap {
  int i0, i1;
  double w1;
};

inline std::vector<LerpTap> lerp_taps(int in, int out) {
  std::vector<LerpTap> taps(out);
  const double scale = double(in) / double(out);
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    if (src < 0) src = 0;
    int i0 = std::min(int(std::floor(src)), in - 1);
    int i1 = std::min(i0 + 1, in - 1);
    taps[o] = {i0, i1, src - i0};
  }
  return taps;
}

template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, int out_h, int out_w) {
  const auto ty = lerp_taps(x.h(), out_h), tx = lerp_taps(x.w(), out_w);
  Tensor<T> y(Shape{x.n(), x.c(), out_h, out_w});
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      const T* src = x.plane(n, c);
      T* dst = y.plane(n, c);
      for (int oy = 0; oy < out_h; ++oy) {
        const T wy = T(ty[oy].w1);
        const T* r0 = src + ty[oy].i0 * x.w();
        const T* r1 = src + ty[oy].i1 * x.w();
        for (int ox = 0; ox < out_w; ++ox) {
          const T wx = T(tx[ox].w1);
          const T top = r0[tx[ox].i0] * (1 - wx) + r0[tx[ox].i1] * wx;
          const T bot = r1[tx[ox].i0] * (1 - wx) + r1[tx[ox].i1] * wx;
          dst[oy * out_w + ox] = top * (1 - wy) + bot * wy;
        }
      }
    }
  return y;
}

template <typename T>
Tensor<T> resize_bilinear_backward(const Tensor<T>& grad_out, const Shape& in_shape) {
  const int out_h = grad_out.h(), out_w = grad_out.w();
  const auto ty = lerp_taps(in_shape.h, out_h), tx = lerp_taps(in_shape.w, out_w);
  Tensor<T> gx(in_shape);
  for (int n = 0; n < in_shape.n; ++n)
    for (int c = 0; c < in_shape.c; ++c) {
      const T* g = grad_out.plane(n, c);
      T* dst = gx.plane(n, c);
      for (int oy = 0; oy < out_h; ++oy) {
        const T wy = T(ty[oy].w1);
        T* r0 = dst + ty[oy].i0 * in_shape.w;
        T* r1 = dst + ty[oy].i1 * in_shape.w;
        for (int ox = 0; ox < out_w; ++ox) {
          const T wx = T(tx[ox].w1);
          const T v = g[oy * out_w + ox];
          r0[tx[ox].i0] += v * (1 - wy) * (1 - wx);
          r0[tx[ox].i1] += v * (1 - wy) * wx;
          r1[tx[ox].i0] += v * wy * (1 - wx);
          r1[tx[ox].i1] += v * wy * wx;
        }
      }
    }
  return gx;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return y;
}

// Gradient of ReLU given its output.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& out) {
  Tensor<T> g(out.shape());
  for (std::size_t i = 0; i < out.size(); ++i) g[i] = out[i] > T(0) ? grad_out[i] : T(0);
  return g;
}

}  // namespace semmask::nn
