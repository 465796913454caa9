#pragma once

#include <memory>
#include <string>
#include <vector>

#include "semmask/data/palette.hpp"
#include "semmask/data/types.hpp"
#include "semmask/nn/blocks.hpp"
#include "semmask/nn/loss.hpp"

namespace semmask {

struct SegConfig {
  // Stem width, then one width per residual stage. The stem and the first
  // stages halve the resolution until output_stride is reached; later stages
  // run at stride 1 with dilation 2.
  std::vector<int> widths{16, 32, 64, 64};
  int output_stride = 8;
  int num_classes = 10;
  std::vector<int> bins{1, 2, 3, 6};
  int reduced_channels = 0;  // 0: feature channels / number of bins
  int head_channels = 32;
  bool adaptive_bins = true;

  int feature_channels() const { return widths.back(); }
  int strided_stages() const { return output_stride == 8 ? 2 : output_stride == 4 ? 1 : 0; }
  int reduced() const { return reduced_channels > 0 ? reduced_channels : std::max(1, feature_channels() / int(bins.size())); }
};

inline void validate(const SegConfig& c) {
  require(c.widths.size() >= 3, Errc::config, "segmentation needs at least three backbone widths");
  for (int w : c.widths) require(w > 0, Errc::config, "segmentation widths must be positive");
  require(c.num_classes >= 1, Errc::config, "segmentation needs at least one class");
  require(!c.bins.empty(), Errc::config, "pyramid bins must be nonempty");
  for (int b : c.bins) require(b > 0, Errc::config, "pyramid bins must be positive");
  require(c.output_stride == 2 || c.output_stride == 4 || c.output_stride == 8, Errc::config,
          "output_stride must be 2, 4 or 8");
  require(int(c.widths.size()) >= c.strided_stages() + 1, Errc::config, "too few widths for the output stride");
}

// Semantic segmentation output: logits, argmax labels and palette rendering.
template <typename T>
struct SemanticMask {
  Tensor<T> logits;  // (1, K, H, W); empty for masks built from labels
  LabelMap labels;
  Tensor<T> rgb;  // (1, 3, H, W) in [0, 1]
  int num_classes = 0;

  static SemanticMask from_labels(const LabelMap& labels, const Palette& palette) {
    return {Tensor<T>{}, labels, render_labels<T>(labels, palette), palette.size()};
  }
};

template <typename T>
LabelMap argmax_labels(const Tensor<T>& logits, int n = 0) {
  LabelMap out(logits.h(), logits.w());
  const std::size_t plane = logits.shape().plane();
  for (std::size_t i = 0; i < plane; ++i) {
    int best = 0;
    for (int k = 1; k < logits.c(); ++k)
      if (logits.plane(n, k)[i] > logits.plane(n, best)[i]) best = k;
    out.data[i] = std::uint8_t(best);
  }
  return out;
}

// Pooling to each bin size, 1x1 reduction, bilinear upsampling back to the
// feature size, and channel concatenation with the input features.
template <typename T>
class PyramidPooling : public nn::Module<T> {
 public:
  PyramidPooling() = default;
  PyramidPooling(int channels, std::vector<int> bins, int reduced, bool adaptive, Rng& rng)
      : channels_(channels), reduced_(reduced), bins_(std::move(bins)), adaptive_(adaptive) {
    for (std::size_t i = 0; i < bins_.size(); ++i)
      convs_.emplace_back(channels, reduced, nn::ConvGeometry{1, 1, 0, 1}, rng, true);
  }

  int out_channels() const { return channels_ + reduced_ * int(bins_.size()); }
  const std::vector<int>& bins() const { return bins_; }
  nn::Conv2d<T>& branch_conv(int i) { return convs_.at(i); }
  // Pooled map (before the 1x1 convolution) of branch i from the last forward.
  const Tensor<T>& pooled(int i) const { return pooled_.at(i); }
  // Upsampled map of branch i from the last forward.
  const Tensor<T>& branch(int i) const { return upsampled_.at(i); }

  void collect(nn::ParamList<T>& out, const std::string& prefix) override {
    for (std::size_t i = 0; i < convs_.size(); ++i)
      convs_[i].collect(out, nn::join(prefix, "bin" + std::to_string(bins_[i])));
  }

  Tensor<T> forward(const Tensor<T>& f) {
    require(f.size() > 0, Errc::invalid_argument, "pyramid pooling: empty feature map");
    in_shape_ = f.shape();
    pooled_.clear();
    reduced_out_.clear();
    upsampled_.clear();
    for (std::size_t i = 0; i < bins_.size(); ++i) {
      const int p = bins_[i];
      if (!adaptive_)
        require(p <= f.h() && p <= f.w() && f.h() % p == 0 && f.w() % p == 0, Errc::invalid_argument,
                "bin " + std::to_string(p) + " does not tile feature map " + f.shape().str());
      pooled_.push_back(nn::adaptive_avg_pool(f, p, p));
      reduced_out_.push_back(convs_[i].forward(pooled_.back()));
      upsampled_.push_back(nn::resize_bilinear(reduced_out_.back(), f.h(), f.w()));
    }
    std::vector<const Tensor<T>*> parts{&f};
    for (const auto& u : upsampled_) parts.push_back(&u);
    return concat_channels<T>(parts);
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    std::vector<int> chans{channels_};
    for (std::size_t i = 0; i < bins_.size(); ++i) chans.push_back(reduced_);
    auto grads = split_channels(grad_out, chans);
    Tensor<T> gf = std::move(grads[0]);
    for (std::size_t i = 0; i < bins_.size(); ++i) {
      Tensor<T> g = nn::resize_bilinear_backward(grads[i + 1], reduced_out_[i].shape());
      g = convs_[i].backward(g);
      gf += nn::adaptive_avg_pool_backward(g, in_shape_);
    }
    return gf;
  }

 private:
  int channels_ = 0, reduced_ = 0;
  std::vector<int> bins_;
  bool adaptive_ = true;
  std::vector<nn::Conv2d<T>> convs_;
  Shape in_shape_{};
  std::vector<Tensor<T>> pooled_, reduced_out_, upsampled_;
};

// Residual backbone at 1/output_stride resolution, pyramid pooling, conv head, and a
// bilinear upsample of the logits back to input resolution.
template <typename T>
class SegNet : public nn::Module<T> {
 public:
  SegNet() = default;
  SegNet(const SegConfig& cfg, Rng& rng) : cfg_(cfg) {
    validate(cfg);
    const auto& w = cfg.widths;
    stem_ = nn::ConvBnRelu<T>(3, w[0], nn::ConvGeometry{3, 2, 1, 1}, rng);
    for (std::size_t i = 1; i < w.size(); ++i) {
      const bool strided = int(i) <= cfg.strided_stages();
      blocks_.push_back(std::make_unique<nn::BasicBlock<T>>(w[i - 1], w[i], strided ? 2 : 1, strided ? 1 : 2, rng));
    }
    ppm_ = PyramidPooling<T>(cfg.feature_channels(), cfg.bins, cfg.reduced(), cfg.adaptive_bins, rng);
    head_ = nn::ConvBnRelu<T>(ppm_.out_channels(), cfg.head_channels, nn::ConvGeometry{3, 1, 1, 1}, rng);
    classifier_ = nn::Conv2d<T>(cfg.head_channels, cfg.num_classes, nn::ConvGeometry{1, 1, 0, 1}, rng, true);
  }

  const SegConfig& config() const { return cfg_; }
  PyramidPooling<T>& pyramid() { return ppm_; }

  void collect(nn::ParamList<T>& out, const std::string& prefix) override {
    stem_.collect(out, nn::join(prefix, "stem"));
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i]->collect(out, nn::join(prefix, "block" + std::to_string(i + 1)));
    ppm_.collect(out, nn::join(prefix, "ppm"));
    head_.collect(out, nn::join(prefix, "head"));
    classifier_.collect(out, nn::join(prefix, "classifier"));
  }
  void set_training(bool on) override {
    stem_.set_training(on);
    for (auto& b : blocks_) b->set_training(on);
    head_.set_training(on);
  }

  // (N, 3, H, W) -> (N, C, H/s, W/s) for output stride s.
  Tensor<T> extract_features(const Tensor<T>& image) {
    require(image.c() == 3, Errc::shape_mismatch, "segmentation expects 3-channel input, got " + image.shape().str());
    require(image.h() % 8 == 0 && image.w() % 8 == 0 && image.h() > 0 && image.w() > 0, Errc::shape_mismatch,
            "image size " + image.shape().str() + " is not divisible by 8");
    Tensor<T> f = stem_.forward(image);
    for (auto& b : blocks_) f = b->forward(f);
    return f;
  }

  // (N, 3, H, W) -> logits (N, K, H, W).
  Tensor<T> forward(const Tensor<T>& image) {
    in_h_ = image.h();
    in_w_ = image.w();
    Tensor<T> f = extract_features(image);
    Tensor<T> z = classifier_.forward(head_.forward(ppm_.forward(f)));
    small_shape_ = z.shape();
    return nn::resize_bilinear(z, in_h_, in_w_);
  }

  void backward(const Tensor<T>& grad_logits) {
    Tensor<T> g = nn::resize_bilinear_backward(grad_logits, small_shape_);
    g = ppm_.backward(head_.backward(classifier_.backward(g)));
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = (*it)->backward(g);
    stem_.backward(g, false);
  }

  SemanticMask<T> predict_mask(const Tensor<T>& image, const Palette& palette) {
    require(image.n() == 1, Errc::shape_mismatch, "predict_mask takes a single image");
    require(palette.size() == cfg_.num_classes, Errc::invalid_argument, "palette size differs from class count");
    set_training(false);
    SemanticMask<T> m;
    m.logits = forward(image);
    m.labels = argmax_labels(m.logits);
    m.rgb = render_labels<T>(m.labels, palette);
    m.num_classes = cfg_.num_classes;
    return m;
  }

 private:
  SegConfig cfg_;
  nn::ConvBnRelu<T> stem_;
  std::vector<std::unique_ptr<nn::BasicBlock<T>>> blocks_;
  PyramidPooling<T> ppm_;
  nn::ConvBnRelu<T> head_;
  nn::Conv2d<T> classifier_;
  int in_h_ = 0, in_w_ = 0;
  Shape small_shape_{};
};

}  // namespace semmask
