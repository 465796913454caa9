#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "semmask/data/types.hpp"
#include "semmask/downstream.hpp"
#include "semmask/masking.hpp"

namespace semmask {

// |A n B| / |A u B|; two empty sets count as identical (1).
template <typename Set>
double jaccard(const Set& a, const Set& b) {
  std::size_t inter = 0;
  for (const auto& v : a)
    if (b.count(v)) ++inter;
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

struct ClassIou {
  std::vector<double> iou;     // per class; NaN when absent from both maps
  std::vector<bool> present;   // class occurs in prediction or truth
  double miou = 0.0;
};

// Accumulates per-class intersections and unions over an evaluation set.
class IouAccumulator {
 public:
  explicit IouAccumulator(int num_classes) : inter_(num_classes, 0), uni_(num_classes, 0) {}

  void add(const LabelMap& pred, const LabelMap& truth) {
    require(pred.height == truth.height && pred.width == truth.width, Errc::shape_mismatch,
            "class_iou: label maps differ in size");
    const int k = int(inter_.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const int p = pred.data[i], t = truth.data[i];
      if (p == t) {
        if (p < k) ++inter_[p], ++uni_[p];
      } else {
        if (p < k) ++uni_[p];
        if (t < k) ++uni_[t];
      }
    }
  }

  ClassIou result() const {
    ClassIou r;
    double sum = 0;
    int count = 0;
    for (std::size_t c = 0; c < inter_.size(); ++c) {
      const bool present = uni_[c] > 0;
      r.present.push_back(present);
      r.iou.push_back(present ? double(inter_[c]) / double(uni_[c]) : std::nan(""));
      if (present) sum += r.iou.back(), ++count;
    }
    r.miou = count ? sum / count : 0.0;
    return r;
  }

 private:
  std::vector<std::size_t> inter_, uni_;
};

inline ClassIou class_iou(const LabelMap& pred, const LabelMap& truth, int num_classes) {
  IouAccumulator acc(num_classes);
  acc.add(pred, truth);
  return acc.result();
}

struct ErrorRates {
  double overall = 0.0;                  // percent
  std::map<std::string, double> by_category;  // percent
  std::map<std::string, int> counts;
};

inline ErrorRates error_rate(std::span<const int> predictions, std::span<const int> truths,
                             std::span<const std::string> categories = {}) {
  require(predictions.size() == truths.size(), Errc::shape_mismatch, "error_rate: prediction/truth length mismatch");
  require(categories.empty() || categories.size() == truths.size(), Errc::shape_mismatch,
          "error_rate: category tags length mismatch");
  ErrorRates r;
  std::map<std::string, int> wrong;
  int total_wrong = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const bool miss = predictions[i] != truths[i];
    total_wrong += miss;
    if (!categories.empty()) {
      ++r.counts[categories[i]];
      wrong[categories[i]] += miss;
    }
  }
  r.overall = truths.empty() ? 0.0 : 100.0 * total_wrong / double(truths.size());
  for (const auto& [cat, n] : r.counts) r.by_category[cat] = 100.0 * wrong[cat] / double(n);
  return r;
}

struct ParameterCount {
  std::size_t total = 0;
  std::map<std::string, std::size_t> by_module;  // keyed by the first name component
};

template <typename T>
ParameterCount count_parameters(nn::Module<T>& model) {
  ParameterCount pc;
  for (auto& [name, p] : model.named_params()) {
    if (p->buffer || !p->trainable) continue;
    pc.total += p->value.size();
    pc.by_module[name.substr(0, name.find('.'))] += p->value.size();
  }
  return pc;
}

struct FidelityReport {
  double jaccard = 1.0;
  double mse = 0.0;
  std::string category = "overall";
};

struct FidelityDetail {
  FidelityReport report;
  std::vector<double> reference;  // normalised features for the semantic mask
  std::vector<double> masked;     // normalised features for the masked mask
};

// Scales a vector so its largest magnitude is 1 (zero vectors unchanged).
inline std::vector<double> normalize_max(std::vector<double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m > 0)
    for (double& x : v) x /= m;
  return v;
}

inline std::set<std::size_t> support(const std::vector<double>& v, double threshold) {
  std::set<std::size_t> s;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > threshold) s.insert(i);
  return s;
}

// Jaccard over thresholded supports and MSE between max-normalised feature
// vectors, both tapped from the head for the semantic mask and the masked mask.
inline FidelityReport fidelity_from_features(const std::vector<double>& reference, const std::vector<double>& masked,
                                             double threshold) {
  require(reference.size() == masked.size() && !reference.empty(), Errc::shape_mismatch,
          "fidelity: feature vectors differ in size");
  const auto a = normalize_max(reference), b = normalize_max(masked);
  FidelityReport r;
  r.jaccard = jaccard(support(a, threshold), support(b, threshold));
  double se = 0;
  for (std::size_t i = 0; i < a.size(); ++i) se += (a[i] - b[i]) * (a[i] - b[i]);
  r.mse = se / double(a.size());
  return r;
}

template <typename T>
FidelityDetail feature_fidelity(DownstreamHead<T>& head, const Tensor<T>& mask_rgb, const Tensor<T>& masked_rgb,
                                int question_id = -1, double threshold = 0.01) {
  require(!head.named_params().empty(), Errc::invalid_argument, "fidelity: head has no weights");
  head.set_training(false);
  const int ids[1] = {question_id};
  auto taps = [&](const Tensor<T>& x) {
    head.forward(x, ids);
    const Tensor<T>& t = head.tap();
    return std::vector<double>(t.data(), t.data() + t.size());
  };
  FidelityDetail d;
  const auto ra = taps(mask_rgb);
  const auto rb = taps(masked_rgb);
  d.report = fidelity_from_features(ra, rb, threshold);
  d.reference = normalize_max(ra);
  d.masked = normalize_max(rb);
  return d;
}

}  // namespace semmask
