#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "semmask/tensor.hpp"

namespace semmask::nn {

// Probability floor applied before taking logarithms.
inline constexpr double kProbFloor = 1e-12;

// Softmax over the channel axis of an (N, K, H, W) tensor.
template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& logits) {
  Tensor<T> p(logits.shape());
  const int k = logits.c();
  const std::size_t plane = logits.shape().plane();
  for (int n = 0; n < logits.n(); ++n)
    for (std::size_t i = 0; i < plane; ++i) {
      T mx = logits.plane(n, 0)[i];
      for (int c = 1; c < k; ++c) mx = std::max(mx, logits.plane(n, c)[i]);
      T z = 0;
      for (int c = 0; c < k; ++c) z += (p.plane(n, c)[i] = std::exp(logits.plane(n, c)[i] - mx));
      for (int c = 0; c < k; ++c) p.plane(n, c)[i] /= z;
    }
  return p;
}

template <typename T>
struct LossAndGrad {
  double loss = 0.0;
  Tensor<T> grad;  // d loss / d logits
};

// Mean cross-entropy of softmax(logits) against integer targets, one target
// per (n, y, x) position. Targets are laid out (N, H, W) row-major.
template <typename T>
LossAndGrad<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> targets) {
  const std::size_t plane = logits.shape().plane();
  require(targets.size() == std::size_t(logits.n()) * plane, Errc::shape_mismatch,
          "cross_entropy: " + std::to_string(targets.size()) + " targets for logits " + logits.shape().str());
  LossAndGrad<T> out;
  out.grad = softmax_channels(logits);
  const double count = double(targets.size());
  double total = 0;
  for (int n = 0; n < logits.n(); ++n)
    for (std::size_t i = 0; i < plane; ++i) {
      const int t = targets[std::size_t(n) * plane + i];
      require(t >= 0 && t < logits.c(), Errc::invalid_argument, "cross_entropy: target out of range");
      total -= std::log(std::max(double(out.grad.plane(n, t)[i]), kProbFloor));
      out.grad.plane(n, t)[i] -= T(1);
    }
  for (auto& g : out.grad.vec()) g = T(g / count);
  out.loss = total / count;
  return out;
}

}  // namespace semmask::nn
