#pragma once

#include <algorithm>
#include <memory>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "semmask/data/oracles.hpp"
#include "semmask/nn/blocks.hpp"
#include "semmask/nn/loss.hpp"

namespace semmask {

// Ground-station model consuming the transmitted (masked) mask. Question ids
// are ignored by heads that do not answer questions.
template <typename T>
class DownstreamHead : public nn::Module<T> {
 public:
  // (N, 3, H, W) -> logits (N, outputs, 1, 1).
  virtual Tensor<T> forward(const Tensor<T>& y, std::span<const int> question_ids) = 0;
  // Accumulates parameter gradients and returns d loss / d y.
  virtual Tensor<T> backward(const Tensor<T>& grad_logits) = 0;
  virtual int num_outputs() const = 0;
  // Activations at the designated fidelity tap from the last forward pass.
  virtual const Tensor<T>& tap() const = 0;
  virtual std::string name() const = 0;
};

// Stem plus stride-2 residual stages, globally average pooled.
struct BackboneConfig {
  int stem_channels = 16;
  std::vector<int> widths{16, 32, 64};
  int stem_stride = 2;
};

template <typename T>
class PooledBackbone : public nn::Module<T> {
 public:
  PooledBackbone() = default;
  PooledBackbone(int in_channels, const BackboneConfig& cfg, Rng& rng)
      : stem_(in_channels, cfg.stem_channels, nn::ConvGeometry{3, cfg.stem_stride, 1, 1}, rng) {
    int in = cfg.stem_channels;
    for (int w : cfg.widths) {
      stages_.push_back(std::make_unique<nn::BasicBlock<T>>(in, w, 2, 1, rng));
      in = w;
    }
    out_channels_ = in;
  }

  int out_channels() const { return out_channels_; }
  const Tensor<T>& stem_conv_output() const { return stem_.conv_output(); }

  void collect(nn::ParamList<T>& out, const std::string& prefix) override {
    stem_.collect(out, nn::join(prefix, "stem"));
    for (std::size_t i = 0; i < stages_.size(); ++i) stages_[i]->collect(out, nn::join(prefix, "layer" + std::to_string(i + 1)));
  }
  void set_training(bool on) override {
    stem_.set_training(on);
    for (auto& s : stages_) s->set_training(on);
  }

  // (N, C, H, W) -> (N, out_channels, 1, 1).
  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> f = stem_.forward(x);
    for (auto& s : stages_) f = s->forward(f);
    pre_pool_ = f.shape();
    return nn::adaptive_avg_pool(f, 1, 1);
  }

  Tensor<T> backward(const Tensor<T>& grad) {
    Tensor<T> g = nn::adaptive_avg_pool_backward(grad, pre_pool_);
    for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) g = (*it)->backward(g);
    return stem_.backward(g, true);
  }

 private:
  nn::ConvBnRelu<T> stem_;
  std::vector<std::unique_ptr<nn::BasicBlock<T>>> stages_;
  int out_channels_ = 0;
  Shape pre_pool_{};
};

struct ClassifierConfig {
  int in_channels = 3;
  BackboneConfig backbone{};
  double dropout = 0.2;
  int num_classes = kNumDamageClasses;
};

inline void validate(const ClassifierConfig& c) {
  require(c.num_classes >= 2, Errc::config, "classifier needs at least two classes");
  require(c.backbone.stem_channels > 0 && !c.backbone.widths.empty(), Errc::config, "classifier backbone is empty");
  require(c.dropout >= 0 && c.dropout < 1, Errc::config, "dropout must lie in [0, 1)");
}

// Damage-extent classifier: conv-bn-relu stem, residual stages, global
// average pool, dropout and one fully connected layer.
template <typename T>
class DamageClassifier : public DownstreamHead<T> {
 public:
  DamageClassifier(const ClassifierConfig& cfg, Rng& rng) : cfg_(cfg) {
    validate(cfg);
    backbone_ = PooledBackbone<T>(cfg.in_channels, cfg.backbone, rng);
    dropout_ = nn::Dropout<T>(cfg.dropout, rng.engine()());
    fc_ = nn::Linear<T>(backbone_.out_channels(), cfg.num_classes, rng);
  }

  const ClassifierConfig& config() const { return cfg_; }
  int num_outputs() const override { return cfg_.num_classes; }
  std::string name() const override { return "classifier"; }
  const Tensor<T>& tap() const override { return backbone_.stem_conv_output(); }
  void reseed_dropout(std::uint64_t seed) { dropout_.reseed(seed); }

  void collect(nn::ParamList<T>& out, const std::string& prefix) override {
    backbone_.collect(out, nn::join(prefix, "backbone"));
    fc_.collect(out, nn::join(prefix, "fc"));
  }
  void set_training(bool on) override {
    backbone_.set_training(on);
    dropout_.set_training(on);
  }

  Tensor<T> forward(const Tensor<T>& y, std::span<const int> = {}) override {
    require(y.c() == cfg_.in_channels, Errc::shape_mismatch,
            "classifier expects " + std::to_string(cfg_.in_channels) + " channels, got " + y.shape().str());
    return fc_.forward(dropout_.forward(backbone_.forward(y)));
  }

  Tensor<T> backward(const Tensor<T>& grad_logits) override {
    return backbone_.backward(dropout_.backward(fc_.backward(grad_logits)));
  }

  // Class probabilities for one input at evaluation.
  std::vector<double> classify(const Tensor<T>& y) {
    this->set_training(false);
    Tensor<T> p = nn::softmax_channels(forward(y));
    return std::vector<double>(p.data(), p.data() + p.size());
  }

 private:
  ClassifierConfig cfg_;
  PooledBackbone<T> backbone_;
  nn::Dropout<T> dropout_;
  nn::Linear<T> fc_;
};

// Word-level tokenizer over the closed question-template set.
class QuestionTokenizer {
 public:
  QuestionTokenizer() = default;
  explicit QuestionTokenizer(const QuestionSet& questions) : questions_(questions) {
    std::set<std::string> words;
    for (const auto& q : questions.items())
      for (const auto& w : split(q.text)) words.insert(w);
    vocab_.assign(words.begin(), words.end());
  }

  int vocab_size() const { return int(vocab_.size()); }
  const QuestionSet& questions() const { return questions_; }

  std::vector<int> tokens(int question_id) const { return encode_words(questions_.at(question_id).text); }
  std::vector<int> tokens(const std::string& text) const { return tokens(questions_.find(text)); }

 private:
  static std::vector<std::string> split(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
  }

  std::vector<int> encode_words(const std::string& text) const {
    std::vector<int> out;
    for (const auto& w : split(text)) {
      auto it = std::lower_bound(vocab_.begin(), vocab_.end(), w);
      require(it != vocab_.end() && *it == w, Errc::unknown_question, "token '" + w + "' outside template vocabulary");
      out.push_back(int(it - vocab_.begin()));
    }
    return out;
  }

  QuestionSet questions_;
  std::vector<std::string> vocab_;
};

enum class Fusion { product, concat };

struct VqaConfig {
  int in_channels = 3;
  BackboneConfig backbone{};
  int visual_hidden = 64;
  int feature_dim = 32;  // visual and question features share this size
  int token_dim = 32;
  Fusion fusion = Fusion::product;
  int classifier_hidden = 64;
  int num_answers = 15;
  double dropout = 0.2;
};

inline void validate(const VqaConfig& c) {
  require(c.num_answers >= 2, Errc::config, "answer vocabulary too small");
  require(c.feature_dim > 0 && c.visual_hidden > 0 && c.token_dim > 0 && c.classifier_hidden > 0, Errc::config,
          "VQA layer sizes must be positive");
  require(c.dropout >= 0 && c.dropout < 1, Errc::config, "dropout must lie in [0, 1)");
}

// Visual encoder (pooled backbone, two linear layers with dropout between),
// question encoder (mean token embedding, one linear layer), fusion, and an
// answer classifier (two linear layers with dropout).
template <typename T>
class VqaModel : public DownstreamHead<T> {
 public:
  VqaModel(const VqaConfig& cfg, const QuestionSet& questions, Rng& rng) : cfg_(cfg), tokenizer_(questions) {
    validate(cfg);
    backbone_ = PooledBackbone<T>(cfg.in_channels, cfg.backbone, rng);
    vis1_ = nn::Linear<T>(backbone_.out_channels(), cfg.visual_hidden, rng);
    vis_drop_ = nn::Dropout<T>(cfg.dropout, rng.engine()());
    vis2_ = nn::Linear<T>(cfg.visual_hidden, cfg.feature_dim, rng);
    embed_ = nn::MeanEmbedding<T>(tokenizer_.vocab_size(), cfg.token_dim, rng);
    qproj_ = nn::Linear<T>(cfg.token_dim, cfg.feature_dim, rng);
    const int fused = cfg.fusion == Fusion::product ? cfg.feature_dim : 2 * cfg.feature_dim;
    cls1_ = nn::Linear<T>(fused, cfg.classifier_hidden, rng);
    cls_drop_ = nn::Dropout<T>(cfg.dropout, rng.engine()());
    cls2_ = nn::Linear<T>(cfg.classifier_hidden, cfg.num_answers, rng);
  }

  const VqaConfig& config() const { return cfg_; }
  const QuestionTokenizer& tokenizer() const { return tokenizer_; }
  int num_outputs() const override { return cfg_.num_answers; }
  std::string name() const override { return "vqa"; }
  const Tensor<T>& tap() const override { return visual_; }
  void reseed_dropout(std::uint64_t seed) {
    vis_drop_.reseed(seed);
    cls_drop_.reseed(seed + 1);
  }

  void collect(nn::ParamList<T>& out, const std::string& prefix) override {
    backbone_.collect(out, nn::join(prefix, "backbone"));
    vis1_.collect(out, nn::join(prefix, "visual1"));
    vis2_.collect(out, nn::join(prefix, "visual2"));
    embed_.collect(out, nn::join(prefix, "embedding"));
    qproj_.collect(out, nn::join(prefix, "question"));
    cls1_.collect(out, nn::join(prefix, "answer1"));
    cls2_.collect(out, nn::join(prefix, "answer2"));
  }
  void set_training(bool on) override {
    backbone_.set_training(on);
    vis_drop_.set_training(on);
    cls_drop_.set_training(on);
  }

  // Question features for a batch of question ids, (N, D, 1, 1).
  Tensor<T> encode_questions(std::span<const int> ids) {
    std::vector<std::vector<int>> toks;
    for (int id : ids) toks.push_back(tokenizer_.tokens(id));
    return qproj_.forward(embed_.forward(toks));
  }

  std::vector<double> encode_question(int question_id) {
    const int ids[1] = {question_id};
    Tensor<T> q = encode_questions(ids);
    return std::vector<double>(q.data(), q.data() + q.size());
  }
  std::vector<double> encode_question(const std::string& text) { return encode_question(tokenizer_.questions().find(text)); }

  Tensor<T> forward(const Tensor<T>& y, std::span<const int> question_ids) override {
    require(int(question_ids.size()) == y.n(), Errc::shape_mismatch, "vqa: one question per image required");
    require(y.c() == cfg_.in_channels, Errc::shape_mismatch, "vqa expects 3-channel input, got " + y.shape().str());
    hidden_ = nn::relu(vis1_.forward(backbone_.forward(y)));
    visual_ = vis2_.forward(vis_drop_.forward(hidden_));
    question_ = encode_questions(question_ids);
    require(cfg_.fusion == Fusion::concat || visual_.size() == question_.size(), Errc::shape_mismatch,
            "vqa: product fusion needs equal visual and question dimensions");
    Tensor<T> fused;
    if (cfg_.fusion == Fusion::product) {
      fused = Tensor<T>(visual_.shape());
      for (std::size_t i = 0; i < fused.size(); ++i) fused[i] = visual_[i] * question_[i];
    } else {
      const Tensor<T>* parts[2] = {&visual_, &question_};
      fused = concat_channels<T>(parts);
    }
    cls_hidden_ = nn::relu(cls1_.forward(fused));
    return cls2_.forward(cls_drop_.forward(cls_hidden_));
  }

  Tensor<T> backward(const Tensor<T>& grad_logits) override {
    Tensor<T> g = cls1_.backward(nn::relu_backward(cls_drop_.backward(cls2_.backward(grad_logits)), cls_hidden_));
    Tensor<T> gv, gq;
    if (cfg_.fusion == Fusion::product) {
      gv = Tensor<T>(visual_.shape());
      gq = Tensor<T>(question_.shape());
      for (std::size_t i = 0; i < g.size(); ++i) {
        gv[i] = g[i] * question_[i];
        gq[i] = g[i] * visual_[i];
      }
    } else {
      const int chans[2] = {visual_.c(), question_.c()};
      auto parts = split_channels(g, chans);
      gv = std::move(parts[0]);
      gq = std::move(parts[1]);
    }
    embed_.backward(qproj_.backward(gq));
    Tensor<T> gh = nn::relu_backward(vis_drop_.backward(vis2_.backward(gv)), hidden_);
    return backbone_.backward(vis1_.backward(gh));
  }

  // Index of the most probable answer for one image/question pair.
  int answer_question(const Tensor<T>& y, int question_id) {
    this->set_training(false);
    const int ids[1] = {question_id};
    Tensor<T> logits = forward(y, ids);
    return int(std::max_element(logits.data(), logits.data() + logits.size()) - logits.data());
  }

 private:
  VqaConfig cfg_;
  QuestionTokenizer tokenizer_;
  PooledBackbone<T> backbone_;
  nn::Linear<T> vis1_;
  nn::Dropout<T> vis_drop_;
  nn::Linear<T> vis2_;
  nn::MeanEmbedding<T> embed_;
  nn::Linear<T> qproj_;
  nn::Linear<T> cls1_;
  nn::Dropout<T> cls_drop_;
  nn::Linear<T> cls2_;
  Tensor<T> hidden_, visual_, question_, cls_hidden_;
};

}  // namespace semmask
