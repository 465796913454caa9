#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semmask/codec.hpp"
#include "semmask/config.hpp"
#include "semmask/data/corpus.hpp"
#include "semmask/metrics.hpp"

namespace semmask {

// The four inputs a downstream head can be trained and evaluated on.
enum class InputKind { original_image, ground_truth_mask, predicted_mask, masked_mask };

inline std::string input_name(InputKind k) {
  switch (k) {
    case InputKind::original_image: return "original_image";
    case InputKind::ground_truth_mask: return "ground_truth_mask";
    case InputKind::predicted_mask: return "predicted_mask";
    case InputKind::masked_mask: return "masked_mask";
  }
  return "?";
}

inline std::vector<Sample> make_corpus(const ExperimentConfig& c) {
  return generate_corpus(c.data.num_scenes, c.seed, c.data.scene);
}

inline std::vector<std::vector<TaskItem>> task_items(const ExperimentConfig& c, const std::vector<Sample>& samples) {
  if (c.joint.task == Task::classification) return classification_items(samples);
  return vqa_items(samples, QuestionSet(c.data.scene.palette));
}

template <typename T>
std::vector<SemanticMask<T>> ground_truth_masks(const std::vector<Sample>& samples, const Palette& palette) {
  std::vector<SemanticMask<T>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(SemanticMask<T>::from_labels(s.labels, palette));
  return out;
}

template <typename T>
std::vector<SemanticMask<T>> predicted_masks(SegNet<T>& net, const std::vector<Sample>& samples, const Palette& palette) {
  net.set_training(false);
  std::vector<SemanticMask<T>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    auto m = net.predict_mask(s.image.template to_tensor<T>(), palette);
    m.logits = Tensor<T>{};
    out.push_back(std::move(m));
  }
  return out;
}

// Task data whose head input is the camera image itself.
template <typename T>
TaskData<T> image_task_data(const std::vector<Sample>& samples, std::vector<std::vector<TaskItem>> items,
                            int num_classes) {
  require(samples.size() == items.size(), Errc::shape_mismatch, "task data: samples and items differ in count");
  TaskData<T> d;
  d.items = std::move(items);
  d.num_classes = num_classes;
  for (const auto& s : samples) {
    d.rgb.push_back(s.image.template to_tensor<T>());
    d.labels.push_back(s.labels);
  }
  return d;
}

template <typename T>
std::unique_ptr<DownstreamHead<T>> make_head(const ExperimentConfig& c, Rng& rng) {
  if (c.joint.task == Task::classification) return std::make_unique<DamageClassifier<T>>(c.classifier, rng);
  return std::make_unique<VqaModel<T>>(c.vqa, QuestionSet(c.data.scene.palette), rng);
}

template <typename T>
struct TaskModel {
  std::optional<MaskPredictor<T>> predictor;
  std::unique_ptr<DownstreamHead<T>> head;
  std::vector<JointEpoch> history;

  MaskPredictor<T>* mask() { return predictor ? &*predictor : nullptr; }
};

// Builds and trains a head, with a jointly trained mask predictor when
// `masked`. Masked and unmasked runs draw head weights from the same stream.
template <typename T>
TaskModel<T> train_task_model(const ExperimentConfig& c, const TaskData<T>& data, const CorpusSplit& split, bool masked) {
  Rng init(c.seed, 11);
  TaskModel<T> m;
  MaskPredictor<T> predictor(c.mask, init);
  m.head = make_head<T>(c, init);
  if (masked) m.predictor.emplace(std::move(predictor));
  m.history = train_joint<T>(m.mask(), *m.head, data, split, c.joint.weights, c.joint.schedule);
  return m;
}

// Label maps actually transmitted: the semantic mask with dropped pixels set
// to the extra label `num_classes`, or unchanged without a predictor.
template <typename T>
std::vector<LabelMap> transmitted_labels(MaskPredictor<T>* predictor, const TaskData<T>& data,
                                         std::span<const int> indices) {
  std::vector<LabelMap> out;
  for (int i : indices) {
    if (!predictor) {
      out.push_back(data.labels[i]);
      continue;
    }
    const auto b = predict_hard_mask(*predictor, data.predictor_in[i], data.rgb[i].h(), data.rgb[i].w(), std::uint64_t(i));
    out.push_back(apply_mask(SemanticMask<T>{{}, data.labels[i], data.rgb[i], data.num_classes}, b).labels);
  }
  return out;
}

// Encoded size in bits; the header always reserves the drop label so masked
// and unmasked maps are directly comparable.
inline double transmitted_bits(const LabelMap& m, int num_classes) {
  return double(label_map_payload(m, ArtifactKind::masked_map, num_classes + 1).size_bits);
}

inline double mean_transmitted_bits(const std::vector<LabelMap>& maps, int num_classes) {
  if (maps.empty()) return 0.0;
  double s = 0;
  for (const auto& m : maps) s += transmitted_bits(m, num_classes);
  return s / double(maps.size());
}

}  // namespace semmask
