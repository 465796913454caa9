#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "semmask/nn/layers.hpp"

namespace semmask::testing {

template <typename T>
Tensor<T> random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<T> t(s);
  for (auto& v : t.vec()) v = T(rng.uniform(lo, hi));
  return t;
}

template <typename T>
double dot(const Tensor<T>& a, const Tensor<T>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * double(b[i]);
  return s;
}

inline double rel_error(double a, double b, double floor = 1e-7) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

struct GradCheck {
  double max_rel = 0.0;
  std::string worst;
  int checked = 0;
};

// Compares the gradients already stored in `m` against central differences of
// `loss` for up to `per_param` evenly spaced entries of every trainable tensor.
inline GradCheck check_param_grads(nn::Module<double>& m, const std::function<double()>& loss, int per_param = 5,
                                   double h = 1e-6) {
  GradCheck r;
  for (auto& [name, p] : m.named_params()) {
    if (p->buffer || !p->trainable) continue;
    const std::size_t n = p->value.size();
    const std::size_t stride = std::max<std::size_t>(1, n / std::size_t(per_param));
    for (std::size_t i = 0; i < n; i += stride) {
      const double keep = p->value[i];
      p->value[i] = keep + h;
      const double up = loss();
      p->value[i] = keep - h;
      const double down = loss();
      p->value[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double e = rel_error(p->grad[i], numeric);
      ++r.checked;
      if (e > r.max_rel) {
        r.max_rel = e;
        r.worst = name + "[" + std::to_string(i) + "] analytic " + std::to_string(p->grad[i]) + " numeric " +
                  std::to_string(numeric);
      }
    }
  }
  return r;
}

inline GradCheck check_input_grad(Tensor<double>& x, const Tensor<double>& analytic,
                                  const std::function<double()>& loss, int samples = 12, double h = 1e-6) {
  GradCheck r;
  const std::size_t stride = std::max<std::size_t>(1, x.size() / std::size_t(samples));
  for (std::size_t i = 0; i < x.size(); i += stride) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = loss();
    x[i] = keep - h;
    const double down = loss();
    x[i] = keep;
    const double e = rel_error(analytic[i], (up - down) / (2 * h));
    ++r.checked;
    if (e > r.max_rel) {
      r.max_rel = e;
      r.worst = "input[" + std::to_string(i) + "]";
    }
  }
  return r;
}

}  // namespace semmask::testing
