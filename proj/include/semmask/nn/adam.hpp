#pragma once

#include <cmath>
#include <vector>

#include "semmask/nn/layers.hpp"

namespace semmask::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam(std::vector<Param<T>*> params, AdamOptions opt) : params_(std::move(params)), opt_(opt) {
    for (auto* p : params_) {
      m_.emplace_back(p->value.size(), 0.0);
      v_.emplace_back(p->value.size(), 0.0);
    }
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(opt_.beta1, double(t_));
    const double c2 = 1.0 - std::pow(opt_.beta2, double(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& p = *params_[k];
      if (!p.trainable) continue;
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad[i];
        m[i] = opt_.beta1 * m[i] + (1 - opt_.beta1) * g;
        v[i] = opt_.beta2 * v[i] + (1 - opt_.beta2) * g * g;
        p.value[i] -= T(opt_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + opt_.eps));
      }
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->grad.zero();
  }

  long steps() const { return t_; }
  void set_lr(double lr) { opt_.lr = lr; }

 private:
  std::vector<Param<T>*> params_;
  AdamOptions opt_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

}  // namespace semmask::nn
