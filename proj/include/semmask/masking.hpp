#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "semmask/nn/layers.hpp"
#include "semmask/segmentation.hpp"

namespace semmask {

enum class MaskMode { soft, hard };
enum class GateActivation { gumbel_softmax, sigmoid };
// downsampled: predictor reads the semantic mask at 1/8 resolution and its
// three x2 layers restore full size. full_resolution: predictor reads the
// full mask and its x8 output is area-resized back down.
enum class MaskGeometry { downsampled, full_resolution };
// sampled: Gumbel noise drawn from the caller's generator. none: the noise-free
// mode of the distribution (keep iff logit >= 0).
enum class GateNoise { sampled, none };

struct MaskPredictorConfig {
  int in_channels = 3;
  std::vector<int> widths{64, 32, 16};
  int kernel = 4;
  int upsample = 2;
  MaskGeometry geometry = MaskGeometry::downsampled;
  GateActivation activation = GateActivation::gumbel_softmax;
  double tau_start = 1.0;
  double tau_end = 0.1;
  int anneal_steps = 0;  // 0: anneal over the whole run
  bool hard_eval = true;
  GateNoise eval_noise = GateNoise::none;

  int scale() const {
    int s = 1;
    for (std::size_t i = 0; i < widths.size(); ++i) s *= upsample;
    return s;
  }
};

inline void validate(const MaskPredictorConfig& c) {
  require(c.in_channels == 3, Errc::config, "mask predictor input must have 3 channels");
  require(!c.widths.empty(), Errc::config, "mask predictor needs at least one layer");
  for (int w : c.widths) require(w > 0, Errc::config, "mask predictor widths must be positive");
  require(c.upsample >= 1 && c.kernel >= c.upsample && (c.kernel - c.upsample) % 2 == 0, Errc::config,
          "kernel/upsample combination cannot produce an exact x" + std::to_string(c.upsample) + " resize");
  require(c.tau_start > 0 && c.tau_end > 0, Errc::config, "temperatures must be positive");
}

// Exponential temperature anneal from tau_start to tau_end over `steps`.
inline double temperature(const MaskPredictorConfig& c, long step, long steps) {
  if (steps <= 0) return c.tau_end;
  const double frac = std::min(1.0, double(step) / double(steps));
  return c.tau_start * std::pow(c.tau_end / c.tau_start, frac);
}

template <typename T>
struct BinaryMask {
  Tensor<T> values;  // (N, 1, H, W)
  MaskMode mode = MaskMode::soft;

  double density() const {
    double s = 0;
    for (auto v : values.vec()) s += v;
    return values.size() ? s / double(values.size()) : 0.0;
  }
};

// Two-class relaxed sampling over (logit, 0): keep probability
// sigmoid((logit + g_keep - g_drop) / tau). Hard mode emits the argmax with
// the soft Jacobian as its backward pass (straight-through).
template <typename T>
class BinaryGate {
 public:
  BinaryMask<T> forward(const Tensor<T>& logits, double tau, MaskMode mode, GateNoise noise, Rng& rng,
                        GateActivation act = GateActivation::gumbel_softmax) {
    require(tau > 0, Errc::invalid_argument, "temperature must be positive");
    tau_ = tau;
    act_ = act;
    soft_ = Tensor<T>(logits.shape());
    BinaryMask<T> out{Tensor<T>(logits.shape()), mode};
    for (std::size_t i = 0; i < logits.size(); ++i) {
      double z;
      if (act == GateActivation::sigmoid) {
        z = logits[i];
      } else {
        const double g = noise == GateNoise::sampled ? rng.gumbel() - rng.gumbel() : 0.0;
        z = (double(logits[i]) + g) / tau;
      }
      const double s = 1.0 / (1.0 + std::exp(-z));
      soft_[i] = T(s);
      out.values[i] = mode == MaskMode::soft ? T(s) : (z >= 0 ? T(1) : T(0));
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_mask) const {
    Tensor<T> g(grad_mask.shape());
    const T scale = act_ == GateActivation::sigmoid ? T(1) : T(1.0 / tau_);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_mask[i] * soft_[i] * (T(1) - soft_[i]) * scale;
    return g;
  }

  const Tensor<T>& soft() const { return soft_; }

 private:
  double tau_ = 1.0;
  GateActivation act_ = GateActivation::gumbel_softmax;
  Tensor<T> soft_;
};

template <typename T>
BinaryMask<T> gumbel_binary(const Tensor<T>& logits, double tau, MaskMode mode, Rng& rng,
                            GateNoise noise = GateNoise::sampled) {
  BinaryGate<T> gate;
  return gate.forward(logits, tau, mode, noise, rng);
}

// Predictor input: the rendered semantic mask, area-downsampled by the
// predictor's total upsampling factor under the default geometry.
template <typename T>
Tensor<T> predictor_input(const Tensor<T>& mask_rgb, const MaskPredictorConfig& cfg) {
  if (cfg.geometry == MaskGeometry::full_resolution) return mask_rgb;
  const int s = cfg.scale();
  require(mask_rgb.h() % s == 0 && mask_rgb.w() % s == 0, Errc::shape_mismatch,
          "semantic mask " + mask_rgb.shape().str() + " not divisible by " + std::to_string(s));
  return nn::adaptive_avg_pool(mask_rgb, mask_rgb.h() / s, mask_rgb.w() / s);
}

// Transposed-convolution + ReLU stack followed by a 1x1 convolution to one
// logit channel.
template <typename T>
class MaskPredictor : public nn::Module<T> {
 public:
  MaskPredictor() = default;
  MaskPredictor(const MaskPredictorConfig& cfg, Rng& rng) : cfg_(cfg) {
    validate(cfg);
    const nn::ConvGeometry g{cfg.kernel, cfg.upsample, (cfg.kernel - cfg.upsample) / 2, 1};
    int in = cfg.in_channels;
    for (int w : cfg.widths) {
      deconvs_.emplace_back(in, w, g, rng);
      in = w;
    }
    head_ = nn::Conv2d<T>(in, 1, nn::ConvGeometry{1, 1, 0, 1}, rng, true);
  }

  const MaskPredictorConfig& config() const { return cfg_; }
  nn::ConvTranspose2d<T>& layer(int i) { return deconvs_.at(i); }
  nn::Conv2d<T>& head() { return head_; }

  void collect(nn::ParamList<T>& out, const std::string& prefix) override {
    for (std::size_t i = 0; i < deconvs_.size(); ++i) deconvs_[i].collect(out, nn::join(prefix, "deconv" + std::to_string(i + 1)));
    head_.collect(out, nn::join(prefix, "head"));
  }

  // Predictor input (N, 3, h, w) -> keep logits at semantic-mask resolution.
  Tensor<T> forward(const Tensor<T>& x, int out_h, int out_w) {
    require(x.c() == cfg_.in_channels, Errc::shape_mismatch,
            "mask predictor expects " + std::to_string(cfg_.in_channels) + " channels, got " + x.shape().str());
    acts_.clear();
    Tensor<T> f = x;
    for (auto& d : deconvs_) {
      f = nn::relu(d.forward(f));
      acts_.push_back(f);
    }
    Tensor<T> z = head_.forward(f);
    raw_shape_ = z.shape();
    resized_ = z.h() != out_h || z.w() != out_w;
    if (resized_) {
      require(z.h() % out_h == 0 && z.w() % out_w == 0, Errc::shape_mismatch,
              "cannot area-resize " + z.shape().str() + " to " + std::to_string(out_h) + "x" + std::to_string(out_w));
      z = nn::adaptive_avg_pool(z, out_h, out_w);
    }
    return z;
  }

  void backward(const Tensor<T>& grad_logits) {
    Tensor<T> g = resized_ ? nn::adaptive_avg_pool_backward(grad_logits, raw_shape_) : grad_logits;
    g = head_.backward(g);
    for (int i = int(deconvs_.size()) - 1; i >= 0; --i) {
      g = nn::relu_backward(g, acts_[i]);
      g = deconvs_[i].backward(g, i > 0);
    }
  }

 private:
  MaskPredictorConfig cfg_;
  std::vector<nn::ConvTranspose2d<T>> deconvs_;
  nn::Conv2d<T> head_;
  std::vector<Tensor<T>> acts_;
  Shape raw_shape_{};
  bool resized_ = false;
};

template <typename T>
struct MaskedMask {
  Tensor<T> rgb;  // (1, 3, H, W): semantic rgb times the mask
  LabelMap labels;  // dropped pixels carry num_classes
  int num_classes = 0;

  // View as a semantic mask so masking can be re-applied.
  SemanticMask<T> as_mask() const { return {Tensor<T>{}, labels, rgb, num_classes}; }
};

// y = M (.) B with B broadcast over colour channels. Pixels with B = 0 (hard)
// or B < 0.5 (soft) get the reserved dropped label.
template <typename T>
MaskedMask<T> apply_mask(const SemanticMask<T>& m, const BinaryMask<T>& b) {
  const Tensor<T>& bv = b.values;
  require(bv.n() == 1 && bv.c() == 1 && bv.h() == m.labels.height && bv.w() == m.labels.width &&
              m.rgb.h() == bv.h() && m.rgb.w() == bv.w(),
          Errc::shape_mismatch, "apply_mask: mask " + bv.shape().str() + " vs semantic mask " + m.rgb.shape().str());
  MaskedMask<T> out{Tensor<T>(m.rgb.shape()), m.labels, m.num_classes};
  const std::size_t plane = bv.shape().plane();
  for (int c = 0; c < m.rgb.c(); ++c)
    for (std::size_t i = 0; i < plane; ++i) out.rgb.plane(0, c)[i] = m.rgb.plane(0, c)[i] * bv[i];
  for (std::size_t i = 0; i < plane; ++i) {
    const bool dropped = b.mode == MaskMode::hard ? bv[i] == T(0) : bv[i] < T(0.5);
    if (dropped) out.labels.data[i] = std::uint8_t(m.num_classes);
  }
  return out;
}

// Batched product for training: (N, 3, H, W) x (N, 1, H, W).
template <typename T>
Tensor<T> mask_product(const Tensor<T>& rgb, const Tensor<T>& mask) {
  require(rgb.n() == mask.n() && rgb.h() == mask.h() && rgb.w() == mask.w() && mask.c() == 1, Errc::shape_mismatch,
          "mask_product: " + rgb.shape().str() + " vs " + mask.shape().str());
  Tensor<T> y(rgb.shape());
  const std::size_t plane = rgb.shape().plane();
  for (int n = 0; n < rgb.n(); ++n)
    for (int c = 0; c < rgb.c(); ++c)
      for (std::size_t i = 0; i < plane; ++i) y.plane(n, c)[i] = rgb.plane(n, c)[i] * mask.plane(n, 0)[i];
  return y;
}

// d loss / d mask given d loss / d y for y = rgb (.) mask.
template <typename T>
Tensor<T> mask_product_backward(const Tensor<T>& grad_y, const Tensor<T>& rgb) {
  Tensor<T> g(Shape{rgb.n(), 1, rgb.h(), rgb.w()});
  const std::size_t plane = rgb.shape().plane();
  for (int n = 0; n < rgb.n(); ++n)
    for (int c = 0; c < rgb.c(); ++c)
      for (std::size_t i = 0; i < plane; ++i) g.plane(n, 0)[i] += grad_y.plane(n, c)[i] * rgb.plane(n, c)[i];
  return g;
}

}  // namespace semmask
