// Acceptance checks, one per criterion. Usage: acceptance <name>|all [artifact-dir]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "semmask.hpp"

using namespace semmask;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_artifacts = "acceptance_artifacts";

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Published latency figures (ms), FloodNet then RescueNet, H_u = 100..250 m.
Outcome latency() {
  struct Row {
    const char* name;
    double kbits;
    double ms[4];
  };
  const Row rows[] = {
      {"floodnet/full_image", 14.441, {6.692, 6.698, 6.704, 6.717}},
      {"floodnet/ground_truth_mask", 7.004, {3.246, 3.249, 3.251, 3.258}},
      {"floodnet/segmented_mask", 2.119, {0.982, 0.983, 0.984, 0.986}},
      {"floodnet/masked_segmentation_mask", 1.945, {0.901, 0.902, 0.903, 0.905}},
      {"rescuenet/full_image", 177.78, {82.384, 82.460, 82.537, 82.690}},
      {"rescuenet/ground_truth_mask", 19.373, {8.973, 8.986, 8.994, 9.011}},
      {"rescuenet/segmented_mask", 27.559, {12.770, 12.782, 12.794, 12.818}},
      {"rescuenet/masked_segmentation_mask", 13.728, {6.361, 6.367, 6.373, 6.385}},
  };
  const LinkParams p;
  const auto& hs = default_elevations();
  int ok = 0, total = 0;
  std::string misses;
  for (const auto& r : rows) {
    std::vector<std::pair<std::string, double>> sizes{{r.name, r.kbits * 1e3}};
    const LatencyTable t = latency_table_mean(sizes, hs, p);
    for (std::size_t k = 0; k < hs.size(); ++k) {
      const double got = t.rows[0].latency_ms[k];
      ++total;
      if (std::abs(got - r.ms[k]) <= 0.01 + 1e-9) {
        ++ok;
      } else {
        misses += fmt(" %s@%gm: %.4f vs %.3f;", r.name, hs[k], got, r.ms[k]);
      }
    }
  }
  return {ok == total, fmt("%d/%d cells within 0.01 ms.", ok, total) + misses};
}

Outcome params() {
  Rng rng(0);
  MaskPredictor<float> mp(MaskPredictorConfig{}, rng);
  const auto pc = count_parameters(mp);
  return {pc.total == 44161, fmt("mask predictor widths [64,32,16]: %zu parameters", pc.total)};
}

Outcome gradients() {
  Rng rng(3);
  const Palette pal(std::vector<PaletteEntry>{{"background", {0, 0, 0}, ClassRole::background},
                                              {"building-total-destruction", {255, 0, 0}, ClassRole::building_destroyed}});
  // Toy widths: at full width a ReLU kink lies within h of many entries and
  // central differences stop being a reliable reference.
  MaskPredictorConfig mcfg{.widths = {8, 6, 4}};
  MaskPredictor<double> mp(mcfg, rng);
  ClassifierConfig ccfg{.backbone = {.stem_channels = 4, .widths = {6}, .stem_stride = 2}, .dropout = 0.0};
  DamageClassifier<double> head(ccfg, rng);
  head.set_training(true);
  std::vector<SemanticMask<double>> masks;
  std::vector<std::vector<TaskItem>> items;
  for (int i = 0; i < 4; ++i) {
    LabelMap l(24, 24, 0);
    for (int y = 2 + 3 * i; y < 12 + 2 * i; ++y)
      for (int x = 1 + 2 * i; x < 14 + i; ++x) l.at(y, x) = 1;
    masks.push_back(SemanticMask<double>::from_labels(l, pal));
    items.push_back({{-1, i % 3, "toy"}});
  }
  const auto data = make_task_data(masks, items, mcfg);
  const std::vector<int> batch{0, 1, 2, 3};
  const LossWeights w{0.6, 1.4};
  const double tau = 0.7;
  auto loss = [&] {
    Rng noise(21);
    return joint_loss<double>(&mp, head, data, batch, w, tau, noise, MaskMode::soft, false).total;
  };
  Rng noise(21);
  mp.zero_grad();
  head.zero_grad();
  joint_loss<double>(&mp, head, data, batch, w, tau, noise, MaskMode::soft, true);

  double worst = 0;
  std::string where;
  int checked = 0;
  for (auto& [name, p] : mp.named_params()) {
    const std::size_t n = p->value.size(), stride = std::max<std::size_t>(1, n / 64);
    for (std::size_t i = 0; i < n; i += stride) {
      const double keep = p->value[i], h = 1e-5;
      p->value[i] = keep + h;
      const double up = loss();
      p->value[i] = keep - h;
      const double down = loss();
      p->value[i] = keep;
      const double num = (up - down) / (2 * h), ana = p->grad[i];
      const double e = std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-7});
      ++checked;
      if (e > worst) worst = e, where = name + "[" + std::to_string(i) + "]" + fmt(" (analytic %.6e, numeric %.6e)", ana, num);
    }
  }
  return {worst <= 1e-4, fmt("%d mask-predictor entries, worst relative error %.2e at ", checked, worst) + where};
}

Outcome gumbel() {
  Rng rng(7);
  Tensor<double> zero(Shape{1, 1, 100, 100});
  const double freq = gumbel_binary(zero, 1.0, MaskMode::hard, rng).density();
  Tensor<double> hi(Shape{1, 1, 96, 96}, 25.0), lo(Shape{1, 1, 96, 96}, -25.0);
  bool saturated = true;
  for (int rep = 0; rep < 5; ++rep) {
    saturated &= gumbel_binary(hi, 0.1, MaskMode::hard, rng).density() == 1.0;
    saturated &= gumbel_binary(lo, 0.1, MaskMode::hard, rng).density() == 0.0;
  }
  return {std::abs(freq - 0.5) <= 0.02 && saturated,
          fmt("keep frequency %.4f over 10^4 zero-logit draws; saturated logits deterministic: %s", freq,
              saturated ? "yes" : "no")};
}

Outcome codec() {
  Rng rng(11);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const int h = rng.uniform_int(1, 64), w = rng.uniform_int(1, 64), k = rng.uniform_int(1, 12);
    LabelMap m(h, w);
    for (auto& v : m.data) v = std::uint8_t(rng.uniform_int(0, k - 1));
    if (rng.uniform() < 0.5)  // blocky maps exercise long runs
      for (std::size_t j = 1; j < m.size(); ++j)
        if (rng.uniform() < 0.9) m.data[j] = m.data[j - 1];
    if (!(decode_label_map(encode_label_map(m)) == m)) ++failures;
  }
  const std::size_t dropped = encode_label_map(LabelMap(96, 96, 10), 11).size();
  return {failures == 0 && dropped == 12,
          fmt("%d/1000 round-trip failures; all-dropped 96x96 map = %zu bytes", failures, dropped)};
}

Outcome loss_identities() {
  const std::vector<double> uniform{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const double ce = categorical_ce(uniform, 1);
  BinaryMask<double> b{Tensor<double>(Shape{1, 1, 16, 16}), MaskMode::hard};
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) b.values(0, 0, y, x) = (x % 2 == 0 && y % 2 == 0) ? 1.0 : 0.0;
  const double ls = sparsity_loss(b);
  double lin = 0;
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double s = rng.uniform(), c = rng.uniform(), ws = rng.uniform(0, 5), wc = rng.uniform(0, 5);
    const double k = rng.uniform(0.1, 10);
    const double direct = ws * s + wc * c;
    lin = std::max(lin, std::abs(total_loss(s, c, {ws, wc}) - direct) / std::max(1.0, direct));
    lin = std::max(lin, std::abs(total_loss(s, c, {k * ws, k * wc}) - k * total_loss(s, c, {ws, wc})) /
                            std::max(1.0, k * direct));
  }
  const bool pass = std::abs(ce - std::log(3.0)) <= 1e-9 && ls == 0.25 && lin <= 4 * 2.220446e-16;
  return {pass, fmt("CE(uniform 3) - ln 3 = %.1e; sparsity(25%% mask) = %.17g; max linearity error %.1e",
                    ce - std::log(3.0), ls, lin)};
}

// Shared joint-training protocol: fixed 512-scene corpus, ground-truth
// semantic masks, masked and unmasked heads trained identically.
struct JointResult {
  double accuracy = 0, baseline_accuracy = 0, density = 1, full_bits = 0, masked_bits = 0, seconds = 0;
  double majority_accuracy = 0;
};

ExperimentConfig protocol_config(Task task, std::uint64_t seed) {
  ExperimentConfig c;
  c.joint.task = task;
  c.joint.mask_source = MaskSource::ground_truth;
  // Sparsity weight from a sweep over {0.3, 1, 3, 5, 10}: 5 and above collapse
  // the classifier, 3 gives the sparsest masks that keep accuracy.
  if (task == Task::classification) c.joint.weights.sparsity = 3.0;
  c = resolve(c);
  c.seed = seed;
  return resolve(c);
}

JointResult run_protocol(Task task, std::uint64_t seed, bool baseline) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig c = protocol_config(task, seed);
  const auto samples = generate_corpus(c.data.num_scenes, 0, c.data.scene);
  const CorpusSplit split = make_split(int(samples.size()), 0);
  const auto masks = ground_truth_masks<float>(samples, c.data.scene.palette);
  const auto data = make_task_data(masks, task_items(c, samples), c.mask);

  JointResult r;
  auto masked = train_task_model<float>(c, data, split, true);
  const auto ev = evaluate_joint<float>(masked.mask(), *masked.head, data, split.test);
  r.accuracy = ev.accuracy;
  r.density = ev.density;
  const int k = c.data.scene.palette.size();
  r.full_bits = mean_transmitted_bits(transmitted_labels<float>(nullptr, data, split.test), k);
  r.masked_bits = mean_transmitted_bits(transmitted_labels(masked.mask(), data, split.test), k);
  if (baseline) {
    auto plain = train_task_model<float>(c, data, split, false);
    r.baseline_accuracy = evaluate_joint<float>(nullptr, *plain.head, data, split.test).accuracy;
  }
  // Most frequent training answer, scored on the test items.
  std::map<int, int> freq;
  for (int i : split.train)
    for (const auto& it : data.items[i]) ++freq[it.target];
  int mode = 0, best = -1;
  for (const auto& [a, n] : freq)
    if (n > best) best = n, mode = a;
  int hits = 0, total = 0;
  for (int i : split.test)
    for (const auto& it : data.items[i]) hits += it.target == mode, ++total;
  r.majority_accuracy = total ? double(hits) / total : 0.0;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Outcome joint_tradeoff() {
  bool pass = true;
  std::string detail;
  double seconds = 0;
  for (std::uint64_t seed : {0, 1, 2}) {
    const JointResult r = run_protocol(Task::classification, seed, true);
    const double ratio = r.masked_bits / r.full_bits;
    const bool ok = r.density <= 0.4 && ratio <= 0.5 && r.baseline_accuracy - r.accuracy <= 0.05;
    pass &= ok;
    seconds += r.seconds;
    detail += fmt(" seed %d: density %.4f, payload %.0f/%.0f bits (ratio %.3f), accuracy %.3f vs unmasked %.3f [%s];",
                  int(seed), r.density, r.masked_bits, r.full_bits, ratio, r.accuracy, r.baseline_accuracy,
                  ok ? "ok" : "miss");
  }
  pass &= seconds <= 1800;
  return {pass, fmt("%.0f s total.", seconds) + detail};
}

Outcome vqa() {
  bool pass = true;
  std::string detail;
  double seconds = 0;
  for (std::uint64_t seed : {0, 1, 2}) {
    const JointResult r = run_protocol(Task::vqa, seed, false);
    const bool ok = r.accuracy - r.majority_accuracy >= 0.10 && r.density <= 0.5;
    pass &= ok;
    seconds += r.seconds;
    detail += fmt(" seed %d: accuracy %.3f vs most-frequent %.3f, density %.4f [%s];", int(seed), r.accuracy,
                  r.majority_accuracy, r.density, ok ? "ok" : "miss");
  }
  pass &= seconds <= 1800;
  return {pass, fmt("%.0f s total.", seconds) + detail};
}

// Identity bound at both taps, plus the recomputation oracle: Jaccard and
// MSE rebuilt by hand from the raw tap activations.
Outcome fidelity() {
  const ExperimentConfig c = protocol_config(Task::classification, 0);
  const auto samples = generate_corpus(6, 0, c.data.scene);
  const auto masks = ground_truth_masks<double>(samples, c.data.scene.palette);
  Rng rng(1);
  DamageClassifier<double> cls(c.classifier, rng);
  const QuestionSet qs(c.data.scene.palette);
  VqaModel<double> vqa(c.vqa, qs, rng);
  double min_j = 1, max_mse = 0, oracle_gap = 0;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const auto& m = masks[i].rgb;
    for (DownstreamHead<double>* head : {static_cast<DownstreamHead<double>*>(&cls), static_cast<DownstreamHead<double>*>(&vqa)}) {
      const int q = head == &cls ? -1 : samples[i].qa.front().question_id;
      BinaryMask<double> ones{Tensor<double>(Shape{1, 1, m.h(), m.w()}, 1.0), MaskMode::hard};
      const auto same = feature_fidelity(*head, m, apply_mask(masks[i], ones).rgb, q).report;
      min_j = std::min(min_j, same.jaccard);
      max_mse = std::max(max_mse, same.mse);

      // Half-dropped mask against an independent recomputation.
      BinaryMask<double> half{Tensor<double>(Shape{1, 1, m.h(), m.w()}), MaskMode::hard};
      for (int y = 0; y < m.h() / 2; ++y)
        for (int x = 0; x < m.w(); ++x) half.values(0, 0, y, x) = 1;
      const auto masked = apply_mask(masks[i], half).rgb;
      const auto d = feature_fidelity(*head, m, masked, q);
      const int ids[1] = {q};
      head->set_training(false);
      head->forward(m, ids);
      std::vector<double> a(head->tap().data(), head->tap().data() + head->tap().size());
      head->forward(masked, ids);
      std::vector<double> b(head->tap().data(), head->tap().data() + head->tap().size());
      double ma = 0, mb = 0;
      for (double v : a) ma = std::max(ma, std::abs(v));
      for (double v : b) mb = std::max(mb, std::abs(v));
      std::size_t inter = 0, uni = 0;
      double se = 0;
      for (std::size_t j = 0; j < a.size(); ++j) {
        const double x = ma > 0 ? a[j] / ma : a[j], y = mb > 0 ? b[j] / mb : b[j];
        const bool in_a = std::abs(x) > 0.01, in_b = std::abs(y) > 0.01;
        inter += in_a && in_b;
        uni += in_a || in_b;
        se += (x - y) * (x - y);
      }
      const double jac = uni ? double(inter) / double(uni) : 1.0;
      oracle_gap = std::max({oracle_gap, std::abs(jac - d.report.jaccard), std::abs(se / a.size() - d.report.mse)});
    }
  }
  const bool pass = min_j == 1.0 && max_mse == 0.0 && oracle_gap < 1e-12;
  return {pass, fmt("all-ones mask at classifier and VQA taps: min Jaccard %.3f, max MSE %.3f; recomputation gap %.1e",
                    min_j, max_mse, oracle_gap)};
}

Outcome segmentation_overfit() {
  const ExperimentConfig c = resolve(ExperimentConfig{});
  const auto samples = generate_corpus(8, 0, c.data.scene);
  CorpusSplit split;
  for (int i = 0; i < 8; ++i) split.train.push_back(i);
  // Default budget: as many optimizer steps as the default schedule takes on
  // the default corpus.
  const auto batches = [&](std::size_t n) { return int((n + c.seg_schedule.batch_size - 1) / c.seg_schedule.batch_size); };
  const int steps = c.seg_schedule.epochs * batches(make_split(c.data.num_scenes, c.seed).train.size());
  TrainSchedule sched = c.seg_schedule;
  sched.epochs = steps / batches(split.train.size());
  const auto t0 = std::chrono::steady_clock::now();
  auto result = train_segmentation<float>(samples, split, c.segmentation, sched);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  IouAccumulator acc(c.segmentation.num_classes);
  const auto preds = predict_labels(result.net, samples, split.train);
  for (std::size_t i = 0; i < preds.size(); ++i) acc.add(preds[i], samples[i].labels);
  const ClassIou r = acc.result();

  fs::create_directories(g_artifacts);
  const Palette& pal = c.data.scene.palette;
  std::vector<std::string> names;
  std::ofstream csv(g_artifacts / "segmentation_overfit_iou.csv");
  csv << "class_id,class_name,iou\n";
  for (int k = 0; k < pal.size(); ++k) {
    names.push_back(pal[k].name);
    csv << k << ',' << pal[k].name << ',' << (std::isnan(r.iou[k]) ? std::string() : fmt("%.4f", r.iou[k])) << '\n';
  }
  const fs::path png = g_artifacts / "segmentation_overfit_iou.png";
  plot::bar_chart(png.string(), "per-class IoU, 8-scene overfit", names, r.iou, "IoU");
  const bool emitted = fs::exists(png) && fs::file_size(png) > 0;
  return {r.miou >= 0.95 && emitted,
          fmt("train mIoU %.4f, %d steps over %d epochs (%.0f s); IoU bars at %s", r.miou, steps, sched.epochs, secs,
              png.string().c_str())};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"latency", latency},
      {"param_count", params},
      {"gradient_suite", gradients},
      {"gumbel_statistics", gumbel},
      {"codec", codec},
      {"loss_identities", loss_identities},
      {"joint_tradeoff", joint_tradeoff},
      {"vqa_head", vqa},
      {"fidelity", fidelity},
      {"segmentation_overfit", segmentation_overfit},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  if (argc > 2) g_artifacts = argv[2];
  bool all_pass = true, found = false;
  for (const auto& [name, fn] : criteria()) {
    if (which != "all" && which != name) continue;
    found = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
    all_pass &= o.pass;
  }
  if (!found) {
    std::fprintf(stderr, "unknown criterion '%s'\n", which.c_str());
    return 2;
  }
  return all_pass ? 0 : 1;
}
