#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "semmask/error.hpp"

namespace semmask {

struct Shape {
  int n = 0, c = 0, h = 0, w = 0;

  std::size_t size() const { return std::size_t(n) * c * h * w; }
  std::size_t plane() const { return std::size_t(h) * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
  }
};

// Dense NCHW tensor. Vectors are stored as (N, C, 1, 1).
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape s, T fill = T(0)) : shape_(s), data_(s.size(), fill) {}
  Tensor(int n, int c, int h, int w, T fill = T(0)) : Tensor(Shape{n, c, h, w}, fill) {}

  const Shape& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator()(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  const T& operator()(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // One sample (C*H*W values) or one channel plane (H*W values).
  T* sample(int n) { return data_.data() + std::size_t(n) * shape_.c * shape_.plane(); }
  const T* sample(int n) const { return data_.data() + std::size_t(n) * shape_.c * shape_.plane(); }
  T* plane(int n, int c) { return sample(n) + std::size_t(c) * shape_.plane(); }
  const T* plane(int n, int c) const { return sample(n) + std::size_t(c) * shape_.plane(); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(T(0)); }

  void reshape(Shape s) {
    require(s.size() == data_.size(), Errc::shape_mismatch,
            "reshape " + shape_.str() + " -> " + s.str());
    shape_ = s;
  }

  Tensor& operator+=(const Tensor& o) {
    require(o.shape_ == shape_, Errc::shape_mismatch, "add " + shape_.str() + " vs " + o.shape_.str());
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const Tensor&) const = default;

 private:
  std::size_t index(int n, int c, int y, int x) const {
    return ((std::size_t(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  Shape shape_{};
  std::vector<T> data_;
};

template <typename T>
void require_shape(const Tensor<T>& t, const Shape& s, const std::string& where) {
  require(t.shape() == s, Errc::shape_mismatch, where + ": expected " + s.str() + ", got " + t.shape().str());
}

// Stacks single-sample tensors along N.
template <typename T>
Tensor<T> stack(std::span<const Tensor<T>* const> items) {
  require(!items.empty(), Errc::invalid_argument, "stack: no tensors");
  Shape s = items.front()->shape();
  Tensor<T> out(Shape{int(items.size()), s.c, s.h, s.w});
  std::size_t per = std::size_t(s.c) * s.plane();
  for (std::size_t i = 0; i < items.size(); ++i) {
    require(items[i]->n() == 1 && items[i]->size() == per, Errc::shape_mismatch, "stack: ragged inputs");
    std::copy(items[i]->data(), items[i]->data() + per, out.sample(int(i)));
  }
  return out;
}

template <typename T>
Tensor<T> slice_sample(const Tensor<T>& t, int n) {
  Tensor<T> out(Shape{1, t.c(), t.h(), t.w()});
  std::copy(t.sample(n), t.sample(n) + out.size(), out.data());
  return out;
}

// Channel concatenation of tensors with equal N, H, W.
template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>* const> parts) {
  require(!parts.empty(), Errc::invalid_argument, "concat: no tensors");
  const Shape s0 = parts.front()->shape();
  int channels = 0;
  for (auto* p : parts) {
    require(p->n() == s0.n && p->h() == s0.h && p->w() == s0.w, Errc::shape_mismatch,
            "concat: " + p->shape().str() + " vs " + s0.str());
    channels += p->c();
  }
  Tensor<T> out(Shape{s0.n, channels, s0.h, s0.w});
  for (int n = 0; n < s0.n; ++n) {
    T* dst = out.sample(n);
    for (auto* p : parts) {
      std::size_t len = std::size_t(p->c()) * s0.plane();
      std::copy(p->sample(n), p->sample(n) + len, dst);
      dst += len;
    }
  }
  return out;
}

// Inverse of concat_channels for gradients.
template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& t, std::span<const int> channels) {
  std::vector<Tensor<T>> out;
  out.reserve(channels.size());
  for (int c : channels) out.emplace_back(Shape{t.n(), c, t.h(), t.w()});
  for (int n = 0; n < t.n(); ++n) {
    const T* src = t.sample(n);
    for (auto& o : out) {
      std::size_t len = std::size_t(o.c()) * o.shape().plane();
      std::copy(src, src + len, o.sample(n));
      src += len;
    }
  }
  return out;
}

}  // namespace semmask
