#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "semmask/nn/ops.hpp"
#include "semmask/random.hpp"
#include "semmask/tensor.hpp"

namespace semmask::nn {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <typename T>
struct Param {
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable = true;
  // Buffers (running statistics) are checkpointed but never optimised or counted.
  bool buffer = false;

  Param() = default;
  explicit Param(Shape s, bool is_buffer = false)
      : value(s), grad(is_buffer ? Shape{} : s), trainable(!is_buffer), buffer(is_buffer) {}
};

template <typename T>
using ParamList = std::vector<std::pair<std::string, Param<T>*>>;

template <typename T>
class Module {
 public:
  Module() = default;
  Module(const Module&) = default;
  Module(Module&&) noexcept = default;
  Module& operator=(const Module&) = default;
  Module& operator=(Module&&) noexcept = default;
  virtual ~Module() = default;

  // Appends every parameter and buffer under `prefix`.
  virtual void collect(ParamList<T>& out, const std::string& prefix) = 0;
  virtual void set_training(bool) {}

  ParamList<T> named_params() {
    ParamList<T> out;
    collect(out, "");
    return out;
  }

  std::vector<Param<T>*> trainable_params() {
    std::vector<Param<T>*> out;
    for (auto& [name, p] : named_params())
      if (p->trainable && !p->buffer) out.push_back(p);
    return out;
  }

  void zero_grad() {
    for (auto& [name, p] : named_params())
      if (!p->buffer) p->grad.zero();
  }

  void set_trainable(bool on) {
    for (auto& [name, p] : named_params())
      if (!p->buffer) p->trainable = on;
  }
};

inline std::string join(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

template <typename T>
void uniform_init(Tensor<T>& t, double bound, Rng& rng) {
  for (auto& v : t.vec()) v = T(rng.uniform(-bound, bound));
}

template <typename T>
class Conv2d : public Module<T> {
 public:
  Conv2d() = default;
  Conv2d(int in, int out, ConvGeometry g, Rng& rng, bool bias = true)
      : in_(in), out_(out), geom_(g), has_bias_(bias),
        weight_(Shape{out, in, g.kernel, g.kernel}), bias_(Shape{bias ? out : 0, 1, 1, 1}) {
    const double fan_in = double(in) * g.kernel * g.kernel;
    uniform_init(weight_.value, std::sqrt(6.0 / fan_in), rng);
    if (bias) uniform_init(bias_.value, 1.0 / std::sqrt(fan_in), rng);
  }

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  const ConvGeometry& geometry() const { return geom_; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

  void collect(ParamList<T>& out, const std::string& prefix) override {
    out.emplace_back(join(prefix, "weight"), &weight_);
    if (has_bias_) out.emplace_back(join(prefix, "bias"), &bias_);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    require(x.c() == in_, Errc::shape_mismatch,
            "conv2d: expected " + std::to_string(in_) + " input channels, got " + x.shape().str());
    in_shape_ = x.shape();
    const int ho = geom_.out_size(x.h()), wo = geom_.out_size(x.w());
    require(ho > 0 && wo > 0, Errc::shape_mismatch, "conv2d: input too small " + x.shape().str());
    const int kk = in_ * geom_.kernel * geom_.kernel;
    const std::size_t per_cols = std::size_t(kk) * ho * wo;
    cols_.assign(pointwise() ? 0 : per_cols * x.n(), T(0));
    if (pointwise()) input_ = x;
    Tensor<T> y(Shape{x.n(), out_, ho, wo});
    ConstMatMap<T> w(weight_.value.data(), out_, kk);
    for (int n = 0; n < x.n(); ++n) {
      const T* c = pointwise() ? x.sample(n) : cols_.data() + per_cols * n;
      if (!pointwise()) im2col(x.sample(n), in_, x.h(), x.w(), geom_, cols_.data() + per_cols * n);
      MatMap<T> out(y.sample(n), out_, ho * wo);
      out.noalias() = w * ConstMatMap<T>(c, kk, ho * wo);
      if (has_bias_)
        for (int o = 0; o < out_; ++o) out.row(o).array() += bias_.value[o];
    }
    return y;
  }

  // Accumulates parameter gradients; returns the input gradient unless
  // `need_input_grad` is false (then an empty tensor).
  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad = true) {
    const int ho = grad_out.h(), wo = grad_out.w();
    const int kk = in_ * geom_.kernel * geom_.kernel;
    const std::size_t per_cols = std::size_t(kk) * ho * wo;
    ConstMatMap<T> w(weight_.value.data(), out_, kk);
    MatMap<T> gw(weight_.grad.data(), out_, kk);
    Tensor<T> gx;
    if (need_input_grad) gx = Tensor<T>(in_shape_);
    std::vector<T> gcols(need_input_grad && !pointwise() ? per_cols : 0);
    for (int n = 0; n < grad_out.n(); ++n) {
      ConstMatMap<T> g(grad_out.sample(n), out_, ho * wo);
      const T* c = pointwise() ? input_.sample(n) : cols_.data() + per_cols * n;
      if (weight_.trainable) gw.noalias() += g * ConstMatMap<T>(c, kk, ho * wo).transpose();
      if (has_bias_ && bias_.trainable)
        for (int o = 0; o < out_; ++o) bias_.grad[o] += g.row(o).sum();
      if (!need_input_grad) continue;
      if (pointwise()) {
        MatMap<T>(gx.sample(n), kk, ho * wo).noalias() = w.transpose() * g;
      } else {
        MatMap<T>(gcols.data(), kk, ho * wo).noalias() = w.transpose() * g;
        col2im(gcols.data(), in_, in_shape_.h, in_shape_.w, geom_, gx.sample(n));
      }
    }
    return gx;
  }

 private:
  bool pointwise() const { return geom_.kernel == 1 && geom_.stride == 1 && geom_.pad == 0; }

  int in_ = 0, out_ = 0;
  ConvGeometry geom_{};
  bool has_bias_ = true;
  Param<T> weight_, bias_;
  Shape in_shape_{};
  std::vector<T> cols_;
  Tensor<T> input_;
};

// Transposed convolution; weight layout (in, out, k, k).
template <typename T>
class ConvTranspose2d : public Module<T> {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(int in, int out, ConvGeometry g, Rng& rng)
      : in_(in), out_(out), geom_(g), weight_(Shape{in, out, g.kernel, g.kernel}), bias_(Shape{out, 1, 1, 1}) {
    const double fan_in = double(out) * g.kernel * g.kernel;
    uniform_init(weight_.value, std::sqrt(6.0 / fan_in), rng);
    uniform_init(bias_.value, 1.0 / std::sqrt(fan_in), rng);
  }

  int out_size(int in) const { return (in - 1) * geom_.stride - 2 * geom_.pad + geom_.kernel; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

  void collect(ParamList<T>& out, const std::string& prefix) override {
    out.emplace_back(join(prefix, "weight"), &weight_);
    out.emplace_back(join(prefix, "bias"), &bias_);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    require(x.c() == in_, Errc::shape_mismatch,
            "conv_transpose2d: expected " + std::to_string(in_) + " input channels, got " + x.shape().str());
    input_ = x;
    const int ho = out_size(x.h()), wo = out_size(x.w());
    const int kk = out_ * geom_.kernel * geom_.kernel;
    const int hw = x.h() * x.w();
    Tensor<T> y(Shape{x.n(), out_, ho, wo});
    std::vector<T> cols(std::size_t(kk) * hw);
    ConstMatMap<T> w(weight_.value.data(), in_, kk);
    for (int n = 0; n < x.n(); ++n) {
      MatMap<T>(cols.data(), kk, hw).noalias() = w.transpose() * ConstMatMap<T>(x.sample(n), in_, hw);
      col2im(cols.data(), out_, ho, wo, geom_, y.sample(n));
      for (int o = 0; o < out_; ++o) {
        T* p = y.plane(n, o);
        for (int i = 0; i < ho * wo; ++i) p[i] += bias_.value[o];
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad = true) {
    const int hin = input_.h(), win = input_.w(), hw = hin * win;
    const int kk = out_ * geom_.kernel * geom_.kernel;
    std::vector<T> cols(std::size_t(kk) * hw);
    ConstMatMap<T> w(weight_.value.data(), in_, kk);
    MatMap<T> gw(weight_.grad.data(), in_, kk);
    Tensor<T> gx;
    if (need_input_grad) gx = Tensor<T>(input_.shape());
    for (int n = 0; n < grad_out.n(); ++n) {
      im2col(grad_out.sample(n), out_, grad_out.h(), grad_out.w(), geom_, cols.data());
      ConstMatMap<T> gc(cols.data(), kk, hw);
      if (weight_.trainable) gw.noalias() += ConstMatMap<T>(input_.sample(n), in_, hw) * gc.transpose();
      if (bias_.trainable)
        for (int o = 0; o < out_; ++o) {
          const T* p = grad_out.plane(n, o);
          T acc = 0;
          for (std::size_t i = 0; i < grad_out.shape().plane(); ++i) acc += p[i];
          bias_.grad[o] += acc;
        }
      if (need_input_grad) MatMap<T>(gx.sample(n), in_, hw).noalias() = w * gc;
    }
    return gx;
  }

 private:
  int in_ = 0, out_ = 0;
  ConvGeometry geom_{};
  Param<T> weight_, bias_;
  Tensor<T> input_;
};

template <typename T>
class BatchNorm2d : public Module<T> {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels, double momentum = 0.1, double eps = 1e-5)
      : channels_(channels), momentum_(momentum), eps_(eps),
        gamma_(Shape{channels, 1, 1, 1}), beta_(Shape{channels, 1, 1, 1}),
        running_mean_(Shape{channels, 1, 1, 1}, true), running_var_(Shape{channels, 1, 1, 1}, true) {
    gamma_.value.fill(T(1));
    running_var_.value.fill(T(1));
  }

  void collect(ParamList<T>& out, const std::string& prefix) override {
    out.emplace_back(join(prefix, "gamma"), &gamma_);
    out.emplace_back(join(prefix, "beta"), &beta_);
    out.emplace_back(join(prefix, "running_mean"), &running_mean_);
    out.emplace_back(join(prefix, "running_var"), &running_var_);
  }
  void set_training(bool on) override { training_ = on; }

  Tensor<T> forward(const Tensor<T>& x) {
    require(x.c() == channels_, Errc::shape_mismatch, "batchnorm: channel mismatch " + x.shape().str());
    const std::size_t plane = x.shape().plane();
    const double count = double(x.n()) * plane;
    xhat_ = Tensor<T>(x.shape());
    inv_std_.assign(channels_, T(0));
    Tensor<T> y(x.shape());
    for (int c = 0; c < channels_; ++c) {
      double mean, var;
      if (training_) {
        double s = 0, ss = 0;
        for (int n = 0; n < x.n(); ++n) {
          const T* p = x.plane(n, c);
          for (std::size_t i = 0; i < plane; ++i) s += p[i];
        }
        mean = s / count;
        for (int n = 0; n < x.n(); ++n) {
          const T* p = x.plane(n, c);
          for (std::size_t i = 0; i < plane; ++i) ss += (p[i] - mean) * (p[i] - mean);
        }
        var = ss / count;
        const double unbiased = count > 1 ? ss / (count - 1) : var;
        running_mean_.value[c] = T((1 - momentum_) * running_mean_.value[c] + momentum_ * mean);
        running_var_.value[c] = T((1 - momentum_) * running_var_.value[c] + momentum_ * unbiased);
      } else {
        mean = running_mean_.value[c];
        var = running_var_.value[c];
      }
      const T inv = T(1.0 / std::sqrt(var + eps_));
      inv_std_[c] = inv;
      const T g = gamma_.value[c], b = beta_.value[c], m = T(mean);
      for (int n = 0; n < x.n(); ++n) {
        const T* p = x.plane(n, c);
        T* xh = xhat_.plane(n, c);
        T* q = y.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) {
          xh[i] = (p[i] - m) * inv;
          q[i] = g * xh[i] + b;
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    const Shape s = grad_out.shape();
    const std::size_t plane = s.plane();
    const T count = T(double(s.n) * plane);
    Tensor<T> gx(s);
    for (int c = 0; c < channels_; ++c) {
      T sum_g = 0, sum_gx = 0;
      for (int n = 0; n < s.n; ++n) {
        const T* g = grad_out.plane(n, c);
        const T* xh = xhat_.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) {
          sum_g += g[i];
          sum_gx += g[i] * xh[i];
        }
      }
      if (gamma_.trainable) gamma_.grad[c] += sum_gx;
      if (beta_.trainable) beta_.grad[c] += sum_g;
      const T gamma = gamma_.value[c], inv = inv_std_[c];
      for (int n = 0; n < s.n; ++n) {
        const T* g = grad_out.plane(n, c);
        const T* xh = xhat_.plane(n, c);
        T* d = gx.plane(n, c);
        if (training_) {
          for (std::size_t i = 0; i < plane; ++i)
            d[i] = gamma * inv / count * (count * g[i] - sum_g - xh[i] * sum_gx);
        } else {
          for (std::size_t i = 0; i < plane; ++i) d[i] = gamma * inv * g[i];
        }
      }
    }
    return gx;
  }

 private:
  int channels_ = 0;
  double momentum_ = 0.1, eps_ = 1e-5;
  bool training_ = true;
  Param<T> gamma_, beta_, running_mean_, running_var_;
  Tensor<T> xhat_;
  std::vector<T> inv_std_;
};

// Fully connected layer on (N, in, 1, 1) tensors.
template <typename T>
class Linear : public Module<T> {
 public:
  Linear() = default;
  Linear(int in, int out, Rng& rng) : in_(in), out_(out), weight_(Shape{out, in, 1, 1}), bias_(Shape{out, 1, 1, 1}) {
    uniform_init(weight_.value, std::sqrt(6.0 / in), rng);
    uniform_init(bias_.value, 1.0 / std::sqrt(double(in)), rng);
  }

  int in_features() const { return in_; }
  int out_features() const { return out_; }

  void collect(ParamList<T>& out, const std::string& prefix) override {
    out.emplace_back(join(prefix, "weight"), &weight_);
    out.emplace_back(join(prefix, "bias"), &bias_);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    require(x.size() == std::size_t(x.n()) * in_, Errc::shape_mismatch,
            "linear: expected " + std::to_string(in_) + " features, got " + x.shape().str());
    input_ = x;
    Tensor<T> y(Shape{x.n(), out_, 1, 1});
    MatMap<T> out(y.data(), x.n(), out_);
    out.noalias() = ConstMatMap<T>(x.data(), x.n(), in_) * ConstMatMap<T>(weight_.value.data(), out_, in_).transpose();
    out.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias_.value.data(), out_);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    const int n = grad_out.n();
    ConstMatMap<T> g(grad_out.data(), n, out_);
    if (weight_.trainable)
      MatMap<T>(weight_.grad.data(), out_, in_).noalias() += g.transpose() * ConstMatMap<T>(input_.data(), n, in_);
    if (bias_.trainable)
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias_.grad.data(), out_) += g.colwise().sum();
    Tensor<T> gx(input_.shape());
    MatMap<T>(gx.data(), n, in_).noalias() = g * ConstMatMap<T>(weight_.value.data(), out_, in_);
    return gx;
  }

 private:
  int in_ = 0, out_ = 0;
  Param<T> weight_, bias_;
  Tensor<T> input_;
};

// Inverted dropout; identity outside training.
template <typename T>
class Dropout : public Module<T> {
 public:
  Dropout() = default;
  Dropout(double p, std::uint64_t seed) : p_(p), rng_(seed, 0xd0) {
    require(p >= 0.0 && p < 1.0, Errc::invalid_argument, "dropout: rate must lie in [0, 1)");
  }

  void collect(ParamList<T>&, const std::string&) override {}
  void set_training(bool on) override { training_ = on; }
  void reseed(std::uint64_t seed) { rng_.reseed(seed, 0xd0); }
  double rate() const { return p_; }

  Tensor<T> forward(const Tensor<T>& x) {
    active_ = training_ && p_ > 0.0;
    if (!active_) return x;
    keep_ = Tensor<T>(x.shape());
    const T scale = T(1.0 / (1.0 - p_));
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
      keep_[i] = rng_.bernoulli(p_) ? T(0) : scale;
      y[i] = x[i] * keep_[i];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    if (!active_) return grad_out;
    Tensor<T> g(grad_out.shape());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_out[i] * keep_[i];
    return g;
  }

 private:
  double p_ = 0.0;
  bool training_ = true, active_ = false;
  Rng rng_{0};
  Tensor<T> keep_;
};

// Token embedding table whose forward pass averages the rows of each token list.
template <typename T>
class MeanEmbedding : public Module<T> {
 public:
  MeanEmbedding() = default;
  MeanEmbedding(int vocab, int dim, Rng& rng) : vocab_(vocab), dim_(dim), table_(Shape{vocab, dim, 1, 1}) {
    for (auto& v : table_.value.vec()) v = T(rng.normal(0.0, 1.0));
  }

  int dim() const { return dim_; }

  void collect(ParamList<T>& out, const std::string& prefix) override { out.emplace_back(join(prefix, "table"), &table_); }

  Tensor<T> forward(const std::vector<std::vector<int>>& tokens) {
    tokens_ = tokens;
    Tensor<T> y(Shape{int(tokens.size()), dim_, 1, 1});
    for (std::size_t n = 0; n < tokens.size(); ++n) {
      require(!tokens[n].empty(), Errc::invalid_argument, "embedding: empty token list");
      for (int t : tokens[n]) {
        require(t >= 0 && t < vocab_, Errc::invalid_argument, "embedding: token out of range");
        for (int d = 0; d < dim_; ++d) y.sample(int(n))[d] += table_.value[std::size_t(t) * dim_ + d];
      }
      for (int d = 0; d < dim_; ++d) y.sample(int(n))[d] /= T(tokens[n].size());
    }
    return y;
  }

  void backward(const Tensor<T>& grad_out) {
    if (!table_.trainable) return;
    for (std::size_t n = 0; n < tokens_.size(); ++n) {
      const T inv = T(1) / T(tokens_[n].size());
      for (int t : tokens_[n])
        for (int d = 0; d < dim_; ++d) table_.grad[std::size_t(t) * dim_ + d] += grad_out.sample(int(n))[d] * inv;
    }
  }

 private:
  int vocab_ = 0, dim_ = 0;
  Param<T> table_;
  std::vector<std::vector<int>> tokens_;
};

}  // namespace semmask::nn
