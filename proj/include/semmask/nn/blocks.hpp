#pragma once

#include <memory>

#include "semmask/nn/layers.hpp"

namespace semmask::nn {

// conv-bn-relu, the stem used by every backbone here.
template <typename T>
class ConvBnRelu : public Module<T> {
 public:
  ConvBnRelu() = default;
  ConvBnRelu(int in, int out, ConvGeometry g, Rng& rng) : conv_(in, out, g, rng, false), bn_(out) {}

  void collect(ParamList<T>& out, const std::string& prefix) override {
    conv_.collect(out, join(prefix, "conv"));
    bn_.collect(out, join(prefix, "bn"));
  }
  void set_training(bool on) override { bn_.set_training(on); }

  Tensor<T> forward(const Tensor<T>& x) {
    conv_out_ = conv_.forward(x);
    out_ = relu(bn_.forward(conv_out_));
    return out_;
  }
  Tensor<T> backward(const Tensor<T>& g, bool need_input_grad = true) {
    return conv_.backward(bn_.backward(relu_backward(g, out_)), need_input_grad);
  }

  // Raw convolution output of the last forward pass (before normalisation).
  const Tensor<T>& conv_output() const { return conv_out_; }
  Conv2d<T>& conv() { return conv_; }

 private:
  Conv2d<T> conv_;
  BatchNorm2d<T> bn_;
  Tensor<T> conv_out_, out_;
};

// Two 3x3 convolutions with an identity or projected shortcut.
template <typename T>
class BasicBlock : public Module<T> {
 public:
  BasicBlock() = default;
  BasicBlock(int in, int out, int stride, int dilation, Rng& rng)
      : conv1_(in, out, ConvGeometry{3, stride, dilation, dilation}, rng, false), bn1_(out),
        conv2_(out, out, ConvGeometry{3, 1, dilation, dilation}, rng, false), bn2_(out),
        project_(stride != 1 || in != out) {
    if (project_) {
      proj_ = std::make_unique<Conv2d<T>>(in, out, ConvGeometry{1, stride, 0, 1}, rng, false);
      proj_bn_ = std::make_unique<BatchNorm2d<T>>(out);
    }
  }

  void collect(ParamList<T>& out, const std::string& prefix) override {
    conv1_.collect(out, join(prefix, "conv1"));
    bn1_.collect(out, join(prefix, "bn1"));
    conv2_.collect(out, join(prefix, "conv2"));
    bn2_.collect(out, join(prefix, "bn2"));
    if (project_) {
      proj_->collect(out, join(prefix, "proj"));
      proj_bn_->collect(out, join(prefix, "proj_bn"));
    }
  }
  void set_training(bool on) override {
    bn1_.set_training(on);
    bn2_.set_training(on);
    if (project_) proj_bn_->set_training(on);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    mid_ = relu(bn1_.forward(conv1_.forward(x)));
    Tensor<T> y = bn2_.forward(conv2_.forward(mid_));
    y += project_ ? proj_bn_->forward(proj_->forward(x)) : x;
    out_ = relu(y);
    return out_;
  }

  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad = true) {
    Tensor<T> g = relu_backward(grad_out, out_);
    Tensor<T> gmid = conv2_.backward(bn2_.backward(g));
    Tensor<T> gx = conv1_.backward(bn1_.backward(relu_backward(gmid, mid_)), need_input_grad);
    if (project_) {
      Tensor<T> gs = proj_->backward(proj_bn_->backward(g), need_input_grad);
      if (need_input_grad) gx += gs;
    } else if (need_input_grad) {
      gx += g;
    }
    return gx;
  }

 private:
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn1_;
  Conv2d<T> conv2_;
  BatchNorm2d<T> bn2_;
  bool project_ = false;
  std::unique_ptr<Conv2d<T>> proj_;
  std::unique_ptr<BatchNorm2d<T>> proj_bn_;
  Tensor<T> mid_, out_;
};

}  // namespace semmask::nn
