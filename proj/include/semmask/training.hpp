#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semmask/data/oracles.hpp"
#include "semmask/downstream.hpp"
#include "semmask/masking.hpp"
#include "semmask/metrics.hpp"
#include "semmask/nn/adam.hpp"
#include "semmask/segmentation.hpp"

namespace semmask {

struct LossWeights {
  double sparsity = 1.0;
  double categorical = 1.0;
};

inline void validate(const LossWeights& w) {
  require(w.sparsity >= 0 && w.categorical >= 0, Errc::config, "loss weights must be nonnegative");
  require(w.sparsity > 0 || w.categorical > 0, Errc::config, "loss weights cannot both be zero");
}

// Mean |B - 0| per sample, averaged over the batch.
template <typename T>
double sparsity_loss(const BinaryMask<T>& b) {
  double s = 0;
  for (auto v : b.values.vec()) s += std::abs(double(v));
  return b.values.size() ? s / double(b.values.size()) : 0.0;
}

inline double categorical_ce(std::span<const double> pred, int true_class) {
  require(true_class >= 0 && std::size_t(true_class) < pred.size(), Errc::invalid_argument, "true class out of range");
  return -std::log(std::max(pred[true_class], nn::kProbFloor));
}

inline double categorical_ce(const std::vector<std::vector<double>>& preds, std::span<const int> truths) {
  require(preds.size() == truths.size() && !preds.empty(), Errc::shape_mismatch, "categorical_ce: batch size mismatch");
  double s = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += categorical_ce(preds[i], truths[i]);
  return s / double(preds.size());
}

inline double total_loss(double sparsity, double categorical, const LossWeights& w) {
  return w.sparsity * sparsity + w.categorical * categorical;
}

enum class Selection { last, accuracy, objective };

struct TrainSchedule {
  int epochs = 30;
  int batch_size = 8;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  // Epochs without validation improvement before stopping; 0 disables.
  int patience = 0;
  Selection selection = Selection::objective;
};

inline void validate(const TrainSchedule& s) {
  require(s.epochs > 0 && s.batch_size > 0 && s.lr > 0, Errc::config, "schedule needs positive epochs, batch size and lr");
}

namespace detail {

template <typename T>
std::vector<Tensor<T>> snapshot(nn::Module<T>& m) {
  std::vector<Tensor<T>> out;
  for (auto& [name, p] : m.named_params()) out.push_back(p->value);
  return out;
}

template <typename T>
void restore(nn::Module<T>& m, const std::vector<Tensor<T>>& values) {
  auto params = m.named_params();
  for (std::size_t i = 0; i < params.size(); ++i) params[i].second->value = values[i];
}

inline void check_finite(double loss, const std::string& what, int epoch, int batch) {
  if (!std::isfinite(loss))
    throw Error(Errc::divergence, what + ": non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(batch));
}

inline std::vector<std::vector<int>> batches(std::vector<int> order, int batch_size, Rng& rng) {
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < order.size(); i += batch_size)
    out.emplace_back(order.begin() + i, order.begin() + std::min(order.size(), i + batch_size));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Segmentation

struct SegEpoch {
  int epoch = 0;
  double loss = 0.0;
  double train_miou = 0.0;
  double val_miou = 0.0;
};

template <typename T>
struct SegTraining {
  SegNet<T> net;
  std::vector<SegEpoch> history;
};

template <typename T>
std::vector<LabelMap> predict_labels(SegNet<T>& net, const std::vector<Sample>& samples, std::span<const int> indices) {
  net.set_training(false);
  std::vector<LabelMap> out;
  for (int i : indices) out.push_back(argmax_labels(net.forward(samples[i].image.template to_tensor<T>())));
  return out;
}

template <typename T>
double mean_iou(SegNet<T>& net, const std::vector<Sample>& samples, std::span<const int> indices) {
  if (indices.empty()) return 0.0;
  IouAccumulator acc(net.config().num_classes);
  const auto preds = predict_labels(net, samples, indices);
  for (std::size_t i = 0; i < preds.size(); ++i) acc.add(preds[i], samples[indices[i]].labels);
  return acc.result().miou;
}

// Per-pixel cross-entropy training; the best validation-mIoU weights (training
// mIoU without a validation split) are kept unless selection is `last`.
template <typename T>
SegTraining<T> train_segmentation(const std::vector<Sample>& samples, const CorpusSplit& split, const SegConfig& cfg,
                                  const TrainSchedule& sched) {
  validate(sched);
  require(!split.train.empty(), Errc::invalid_argument, "train_segmentation: empty training split");
  Rng init(sched.seed, 1);
  SegTraining<T> out{SegNet<T>(cfg, init), {}};
  SegNet<T>& net = out.net;
  nn::Adam<T> opt(net.trainable_params(), {sched.lr});
  Rng order_rng(sched.seed, 2);

  std::vector<Tensor<T>> images(samples.size());
  for (int i : split.train) images[i] = samples[i].image.template to_tensor<T>();

  double best = -1;
  int since_best = 0;
  std::vector<Tensor<T>> best_weights;
  for (int epoch = 1; epoch <= sched.epochs; ++epoch) {
    net.set_training(true);
    double loss_sum = 0;
    int nb = 0;
    for (const auto& batch : detail::batches(split.train, sched.batch_size, order_rng)) {
      std::vector<const Tensor<T>*> xs;
      std::vector<int> targets;
      for (int i : batch) {
        xs.push_back(&images[i]);
        targets.insert(targets.end(), samples[i].labels.data.begin(), samples[i].labels.data.end());
      }
      opt.zero_grad();
      auto lg = nn::softmax_cross_entropy(net.forward(stack<T>(xs)), targets);
      detail::check_finite(lg.loss, "train_segmentation", epoch, nb);
      net.backward(lg.grad);
      opt.step();
      loss_sum += lg.loss;
      ++nb;
    }
    SegEpoch row{epoch, loss_sum / nb, mean_iou(net, samples, split.train), mean_iou(net, samples, split.val)};
    out.history.push_back(row);
    const double score = split.val.empty() ? row.train_miou : row.val_miou;
    if (sched.selection != Selection::last && score > best) {
      best = score;
      since_best = 0;
      best_weights = detail::snapshot(net);
    } else if (sched.patience > 0 && ++since_best >= sched.patience) {
      break;
    }
  }
  if (sched.selection != Selection::last && !best_weights.empty()) detail::restore(net, best_weights);
  net.set_training(false);
  return out;
}

// ---------------------------------------------------------------------------
// Joint mask-predictor + downstream training

struct TaskItem {
  int question_id = -1;
  int target = 0;
  std::string category;
};

inline std::vector<std::vector<TaskItem>> classification_items(const std::vector<Sample>& samples) {
  std::vector<std::vector<TaskItem>> out;
  for (const auto& s : samples) out.push_back({{-1, int(s.damage), damage_name(s.damage)}});
  return out;
}

inline std::vector<std::vector<TaskItem>> vqa_items(const std::vector<Sample>& samples, const QuestionSet& questions) {
  std::vector<std::vector<TaskItem>> out;
  for (const auto& s : samples) {
    std::vector<TaskItem> items;
    for (const auto& q : s.qa) items.push_back({q.question_id, q.answer_id, kind_name(questions.at(q.question_id).kind)});
    out.push_back(std::move(items));
  }
  return out;
}

// What the joint trainer consumes for each scene: the rendered semantic mask
// (from the frozen segmentation network or ground truth), the predictor's
// input derived from it, and the task items.
template <typename T>
struct TaskData {
  std::vector<Tensor<T>> rgb;
  std::vector<Tensor<T>> predictor_in;
  std::vector<LabelMap> labels;
  std::vector<std::vector<TaskItem>> items;
  int num_classes = 0;

  int size() const { return int(rgb.size()); }
};

template <typename T>
TaskData<T> make_task_data(const std::vector<SemanticMask<T>>& masks, std::vector<std::vector<TaskItem>> items,
                           const MaskPredictorConfig& cfg) {
  require(masks.size() == items.size(), Errc::shape_mismatch, "task data: masks and items differ in count");
  TaskData<T> d;
  d.items = std::move(items);
  for (const auto& m : masks) {
    d.rgb.push_back(m.rgb);
    d.predictor_in.push_back(predictor_input(m.rgb, cfg));
    d.labels.push_back(m.labels);
    d.num_classes = m.num_classes;
  }
  return d;
}

struct JointEpoch {
  int epoch = 0;
  double sparsity = 0.0;     // training mean of L_s
  double categorical = 0.0;  // training mean of L_c
  double total = 0.0;
  double accuracy = 0.0;     // validation, hard masks
  double density = 0.0;      // validation mean hard-mask density
  double tau = 0.0;
};

struct JointEval {
  double accuracy = 0.0;
  double density = 1.0;
  double sparsity = 1.0;
  double categorical = 0.0;
  std::vector<int> predictions, targets;
  std::vector<std::string> categories;
  std::vector<double> sample_density;
};

// Evaluation-time hard mask for one scene.
template <typename T>
BinaryMask<T> predict_hard_mask(MaskPredictor<T>& predictor, const Tensor<T>& predictor_in, int height, int width,
                                std::uint64_t noise_seed = 0) {
  const auto& cfg = predictor.config();
  Rng rng(noise_seed, 0x4a5d);
  BinaryGate<T> gate;
  return gate.forward(predictor.forward(predictor_in, height, width), cfg.tau_end,
                      cfg.hard_eval ? MaskMode::hard : MaskMode::soft, cfg.eval_noise, rng, cfg.activation);
}

template <typename T>
JointEval evaluate_joint(MaskPredictor<T>* predictor, DownstreamHead<T>& head, const TaskData<T>& data,
                         std::span<const int> indices, int batch_size = 16) {
  head.set_training(false);
  JointEval ev;
  double ce = 0, kept = 0, pixels = 0;
  int correct = 0;
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    std::vector<Tensor<T>> ys;
    std::vector<int> qids, targets;
    std::vector<const Tensor<T>*> ptrs;
    for (std::size_t k = start; k < std::min(indices.size(), start + batch_size); ++k) {
      const int i = indices[k];
      Tensor<T> y = data.rgb[i];
      double dens = 1.0;
      if (predictor) {
        const auto b = predict_hard_mask(*predictor, data.predictor_in[i], y.h(), y.w(), std::uint64_t(i));
        y = mask_product(y, b.values);
        dens = b.density();
      }
      ev.sample_density.push_back(dens);
      kept += dens * double(y.h()) * y.w();
      pixels += double(y.h()) * y.w();
      for (const auto& it : data.items[i]) {
        qids.push_back(it.question_id);
        targets.push_back(it.target);
        ev.categories.push_back(it.category);
        ys.push_back(y);
      }
    }
    if (ys.empty()) continue;
    for (const auto& y : ys) ptrs.push_back(&y);
    Tensor<T> p = nn::softmax_channels(head.forward(stack<T>(ptrs), qids));
    const int k = p.c();
    for (int n = 0; n < p.n(); ++n) {
      const T* row = p.sample(n);
      const int pred = int(std::max_element(row, row + k) - row);
      ev.predictions.push_back(pred);
      ev.targets.push_back(targets[n]);
      correct += pred == targets[n];
      ce -= std::log(std::max(double(row[targets[n]]), nn::kProbFloor));
    }
  }
  const std::size_t n = ev.targets.size();
  ev.accuracy = n ? double(correct) / double(n) : 0.0;
  ev.categorical = n ? ce / double(n) : 0.0;
  ev.density = pixels > 0 ? kept / pixels : 1.0;
  ev.sparsity = ev.density;
  return ev;
}

struct StepLoss {
  double sparsity = 0.0;
  double categorical = 0.0;
  double total = 0.0;
};

// Loss of one batch of scenes under w_s * L_sparsity + w_c * L_categorical.
// Each task item becomes one head row fed with its scene's masked mask.
// With `backward`, gradients are accumulated into the head and predictor.
template <typename T>
StepLoss joint_loss(MaskPredictor<T>* predictor, DownstreamHead<T>& head, const TaskData<T>& data,
                    std::span<const int> batch, const LossWeights& weights, double tau, Rng& noise, MaskMode mode,
                    bool backward) {
  std::vector<const Tensor<T>*> rgb_ptrs, in_ptrs;
  for (int i : batch) {
    rgb_ptrs.push_back(&data.rgb[i]);
    in_ptrs.push_back(&data.predictor_in[i]);
  }
  const Tensor<T> rgb = stack<T>(rgb_ptrs);
  Tensor<T> y = rgb;
  BinaryMask<T> mask;
  BinaryGate<T> gate;
  if (predictor) {
    mask = gate.forward(predictor->forward(stack<T>(in_ptrs), rgb.h(), rgb.w()), tau, mode, GateNoise::sampled, noise,
                        predictor->config().activation);
    y = mask_product(rgb, mask.values);
  }

  std::vector<int> owner, qids, targets;
  for (std::size_t b = 0; b < batch.size(); ++b)
    for (const auto& it : data.items[batch[b]]) {
      owner.push_back(int(b));
      qids.push_back(it.question_id);
      targets.push_back(it.target);
    }
  require(!owner.empty(), Errc::invalid_argument, "joint_loss: batch has no task items");
  const std::size_t per = std::size_t(y.c()) * y.shape().plane();
  Tensor<T> rows(Shape{int(owner.size()), y.c(), y.h(), y.w()});
  for (std::size_t r = 0; r < owner.size(); ++r)
    std::copy(y.sample(owner[r]), y.sample(owner[r]) + per, rows.sample(int(r)));

  auto lg = nn::softmax_cross_entropy(head.forward(rows, qids), targets);
  StepLoss out;
  out.categorical = lg.loss;
  out.sparsity = predictor ? sparsity_loss(mask) : 0.0;
  out.total = total_loss(out.sparsity, out.categorical, weights);
  if (!backward) return out;

  for (auto& g : lg.grad.vec()) g *= T(weights.categorical);
  const Tensor<T> grad_rows = head.backward(lg.grad);
  if (predictor) {
    Tensor<T> grad_y(y.shape());
    for (std::size_t r = 0; r < owner.size(); ++r) {
      T* dst = grad_y.sample(owner[r]);
      const T* src = grad_rows.sample(int(r));
      for (std::size_t k = 0; k < per; ++k) dst[k] += src[k];
    }
    Tensor<T> grad_mask = mask_product_backward(grad_y, rgb);
    const T ds = T(weights.sparsity / double(mask.values.size()));
    for (auto& g : grad_mask.vec()) g += ds;
    predictor->backward(gate.backward(grad_mask));
  }
  return out;
}

// Optimises the mask predictor (when given) and the head under
// w_s * L_sparsity + w_c * L_categorical with relaxed masks and an annealed
// temperature; validation uses hard masks. Passing no predictor trains the
// head on unmasked inputs.
template <typename T>
std::vector<JointEpoch> train_joint(MaskPredictor<T>* predictor, DownstreamHead<T>& head, const TaskData<T>& data,
                                    const CorpusSplit& split, const LossWeights& weights, const TrainSchedule& sched) {
  validate(sched);
  validate(weights);
  require(!split.train.empty(), Errc::invalid_argument, "train_joint: empty training split");

  std::vector<nn::Param<T>*> params = head.trainable_params();
  if (predictor)
    for (auto* p : predictor->trainable_params()) params.push_back(p);
  nn::Adam<T> opt(params, {sched.lr});
  Rng order_rng(sched.seed, 2), noise_rng(sched.seed, 3);
  const MaskPredictorConfig mcfg = predictor ? predictor->config() : MaskPredictorConfig{};

  const long steps_per_epoch = long((split.train.size() + sched.batch_size - 1) / sched.batch_size);
  const long anneal = mcfg.anneal_steps > 0 ? mcfg.anneal_steps : steps_per_epoch * sched.epochs;
  long step = 0;

  std::vector<JointEpoch> history;
  double best = -1e300;
  int since_best = 0;
  std::vector<Tensor<T>> best_head, best_pred;

  for (int epoch = 1; epoch <= sched.epochs; ++epoch) {
    head.set_training(true);
    double ls_sum = 0, lc_sum = 0;
    int nb = 0;
    double tau = temperature(mcfg, step, anneal);
    for (const auto& batch : detail::batches(split.train, sched.batch_size, order_rng)) {
      tau = temperature(mcfg, step, anneal);
      opt.zero_grad();
      const StepLoss sl = joint_loss(predictor, head, data, batch, weights, tau, noise_rng, MaskMode::soft, true);
      detail::check_finite(sl.total, "train_joint", epoch, nb);
      opt.step();
      ls_sum += sl.sparsity;
      lc_sum += sl.categorical;
      ++nb;
      ++step;
    }

    const JointEval ev = evaluate_joint(predictor, head, data, split.val.empty() ? split.train : split.val);
    JointEpoch row;
    row.epoch = epoch;
    row.sparsity = nb ? ls_sum / nb : 0.0;
    row.categorical = nb ? lc_sum / nb : 0.0;
    row.total = total_loss(row.sparsity, row.categorical, weights);
    row.accuracy = ev.accuracy;
    row.density = ev.density;
    row.tau = tau;
    history.push_back(row);

    double score = 0;
    switch (sched.selection) {
      case Selection::last: score = epoch; break;
      case Selection::accuracy: score = ev.accuracy; break;
      case Selection::objective:
        score = -total_loss(predictor ? ev.density : 0.0, ev.categorical, weights);
        break;
    }
    if (score > best) {
      best = score;
      since_best = 0;
      best_head = detail::snapshot(head);
      if (predictor) best_pred = detail::snapshot(*predictor);
    } else if (sched.patience > 0 && ++since_best >= sched.patience) {
      break;
    }
  }
  if (!best_head.empty()) detail::restore(head, best_head);
  if (predictor && !best_pred.empty()) detail::restore(*predictor, best_pred);
  head.set_training(false);
  return history;
}

}  // namespace semmask
