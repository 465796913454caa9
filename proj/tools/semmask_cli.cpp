#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "run_dir.hpp"
#include "semmask.hpp"

namespace {

using namespace semmask;
using cli::RunDir;
namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string out;
  std::string precision;
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::string data;
  std::string seg;
  std::string joint;
  std::string payloads;
  std::vector<std::string> runs;
};

ExperimentConfig apply_overrides(ExperimentConfig c, const Options& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.n) c.data.num_scenes = *o.n;
  if (!o.precision.empty()) c.precision = detail::enum_from_string<Precision>(o.precision, "--precision");
  if (!o.out.empty()) c.output_dir = o.out;
  return resolve(c);
}

ExperimentConfig load_options(const Options& o) {
  return apply_overrides(o.config.empty() ? ExperimentConfig{} : load_config(o.config), o);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  require(bool(os), Errc::io, "cannot write " + p.string());
  return os;
}

void write_config(RunDir& run, const ExperimentConfig& c) {
  open_out(run.artifact("config.json")) << to_json(c).dump(2) << '\n';
}

Corpus corpus_for(const Options& o, const ExperimentConfig& c) {
  if (!o.data.empty()) {
    require(fs::exists(o.data), Errc::io, "corpus directory " + o.data + " does not exist");
    CorpusLayout layout{c.data.scene.palette.size(), c.seed, c.data.scene.vocabulary};
    Corpus corpus = load_corpus(o.data, layout);
    require(!corpus.samples.empty(), Errc::io, "corpus " + o.data + " holds no images");
    return corpus;
  }
  Corpus corpus{make_corpus(c), {}};
  corpus.split = make_split(int(corpus.samples.size()), c.seed);
  return corpus;
}

std::string csv_number(double v, int digits) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  require(bool(in), Errc::io, "cannot open " + p.string());
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    require(used == s.size(), Errc::format, where + ": bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw Error(Errc::format, where + ": bad number '" + s + "'");
  }
}

// ---------------------------------------------------------------------------
// Model plumbing

template <typename T>
SegNet<T> load_seg(const std::string& path) {
  const Checkpoint ck = load_checkpoint(path);
  const ExperimentConfig c = config_from_json(ck.config);
  Rng rng(0);
  SegNet<T> net(c.segmentation, rng);
  load_module(ck, "seg", net);
  net.set_training(false);
  return net;
}

template <typename T>
struct LoadedJoint {
  ExperimentConfig config;
  MaskPredictor<T> predictor;
  std::unique_ptr<DownstreamHead<T>> head;
};

template <typename T>
LoadedJoint<T> load_joint(const std::string& path, const Options& o) {
  const Checkpoint ck = load_checkpoint(path);
  ExperimentConfig c = config_from_json(ck.config);
  if (!o.out.empty()) c.output_dir = o.out;
  Rng init(c.seed, 11);
  LoadedJoint<T> j{c, MaskPredictor<T>(c.mask, init), nullptr};
  j.head = make_head<T>(c, init);
  load_module(ck, "mask", j.predictor);
  load_module(ck, "head", *j.head);
  return j;
}

template <typename T>
std::vector<SemanticMask<T>> source_masks(const ExperimentConfig& c, const Options& o, const std::vector<Sample>& samples) {
  if (c.joint.mask_source == MaskSource::ground_truth) return ground_truth_masks<T>(samples, c.data.scene.palette);
  require(!o.seg.empty(), Errc::invalid_argument,
          "joint.mask_source is 'predicted': pass --seg <checkpoint> or set it to 'ground_truth'");
  SegNet<T> net = load_seg<T>(o.seg);
  return predicted_masks(net, samples, c.data.scene.palette);
}

void write_iou_csv(const fs::path& p, const Palette& palette, const std::vector<std::pair<std::string, ClassIou>>& cols) {
  auto os = open_out(p);
  os << "class_id,class_name";
  for (const auto& [name, _] : cols) os << ",iou_" << name;
  os << '\n';
  for (int k = 0; k < palette.size(); ++k) {
    os << k << ',' << palette[k].name;
    for (const auto& [_, r] : cols) os << ',' << csv_number(r.iou[k], 4);
    os << '\n';
  }
  os << "mean,mIoU";
  for (const auto& [_, r] : cols) os << ',' << csv_number(r.miou, 4);
  os << '\n';
}

template <typename T>
ClassIou seg_iou(SegNet<T>& net, const std::vector<Sample>& samples, std::span<const int> idx) {
  IouAccumulator acc(net.config().num_classes);
  const auto preds = predict_labels(net, samples, idx);
  for (std::size_t i = 0; i < preds.size(); ++i) acc.add(preds[i], samples[idx[i]].labels);
  return acc.result();
}

void iou_bars(const fs::path& p, const Palette& palette, const ClassIou& r, const std::string& title) {
  std::vector<std::string> names;
  for (int k = 0; k < palette.size(); ++k) names.push_back(palette[k].name);
  plot::bar_chart(p.string(), title, names, r.iou, "IoU");
}

void write_joint_history(const fs::path& csv, const fs::path& png, const std::vector<JointEpoch>& h) {
  auto os = open_out(csv);
  os << "epoch,sparsity,categorical,total,val_accuracy,val_density,tau\n";
  plot::Series acc{"val accuracy", {}, {}}, dens{"val density", {}, {}};
  for (const auto& e : h) {
    os << e.epoch << ',' << csv_number(e.sparsity, 6) << ',' << csv_number(e.categorical, 6) << ','
       << csv_number(e.total, 6) << ',' << csv_number(e.accuracy, 4) << ',' << csv_number(e.density, 4) << ','
       << csv_number(e.tau, 4) << '\n';
    acc.x.push_back(e.epoch);
    acc.y.push_back(e.accuracy);
    dens.x.push_back(e.epoch);
    dens.y.push_back(e.density);
  }
  plot::line_chart(png.string(), "joint training", "epoch", "value", {acc, dens});
}

// ---------------------------------------------------------------------------
// Subcommands

int gen_data(const Options& o) {
  const ExperimentConfig c = load_options(o);
  RunDir run(c.output_dir);
  write_config(run, c);
  const auto samples = make_corpus(c);
  const fs::path root = run.artifact("data");
  write_corpus(root, samples, c.data.scene.palette, c.data.scene.vocabulary);
  const CorpusSplit split = make_split(int(samples.size()), c.seed);
  fs::create_directories(root / "splits");
  for (const auto& [name, idx] : {std::pair{"train", &split.train}, {"val", &split.val}, {"test", &split.test}}) {
    auto os = open_out(root / "splits" / (std::string(name) + ".txt"));
    for (int i : *idx) os << samples[i].stem << '\n';
  }
  run.commit();
  std::cout << "wrote " << samples.size() << " scenes to " << root.string() << '\n';
  return 0;
}

template <typename T>
int train_seg(const Options& o) {
  const ExperimentConfig c = load_options(o);
  RunDir run(c.output_dir);
  write_config(run, c);
  const Corpus corpus = corpus_for(o, c);
  auto result = train_segmentation<T>(corpus.samples, corpus.split, c.segmentation, c.seg_schedule);

  Checkpoint ck;
  ck.config = to_json(c);
  store_module(ck, "seg", result.net);
  save_checkpoint(run.artifact("seg.ckpt").string(), ck);

  auto hist = open_out(run.artifact("seg_history.csv"));
  hist << "epoch,loss,train_miou,val_miou\n";
  for (const auto& e : result.history)
    hist << e.epoch << ',' << csv_number(e.loss, 6) << ',' << csv_number(e.train_miou, 4) << ','
         << csv_number(e.val_miou, 4) << '\n';

  const Palette& palette = c.data.scene.palette;
  std::vector<std::pair<std::string, ClassIou>> cols{{"train", seg_iou(result.net, corpus.samples, corpus.split.train)}};
  if (!corpus.split.test.empty()) cols.emplace_back("test", seg_iou(result.net, corpus.samples, corpus.split.test));
  write_iou_csv(run.artifact("seg_iou.csv"), palette, cols);
  iou_bars(run.artifact("seg_iou.png"), palette, cols.back().second, "per-class IoU (" + cols.back().first + ")");
  run.commit();
  std::cout << "segmentation: train mIoU " << csv_number(cols.front().second.miou, 4);
  if (cols.size() > 1) std::cout << ", test mIoU " << csv_number(cols.back().second.miou, 4);
  std::cout << '\n';
  return 0;
}

template <typename T>
int train_joint_cmd(const Options& o) {
  const ExperimentConfig c = load_options(o);
  RunDir run(c.output_dir);
  write_config(run, c);
  const Corpus corpus = corpus_for(o, c);
  const auto masks = source_masks<T>(c, o, corpus.samples);
  const auto data = make_task_data(masks, task_items(c, corpus.samples), c.mask);
  auto model = train_task_model<T>(c, data, corpus.split, true);

  Checkpoint ck;
  ck.config = to_json(c);
  store_module(ck, "mask", *model.predictor);
  store_module(ck, "head", *model.head);
  save_checkpoint(run.artifact("joint.ckpt").string(), ck);
  write_joint_history(run.artifact("joint_history.csv"), run.artifact("joint_history.png"), model.history);
  const auto ev = evaluate_joint<T>(model.mask(), *model.head, data, corpus.split.test);
  run.commit();
  std::cout << "joint: test accuracy " << csv_number(ev.accuracy, 4) << ", mask density " << csv_number(ev.density, 4)
            << '\n';
  return 0;
}

template <typename T>
int eval_cmd(const Options& o) {
  require(!o.joint.empty(), Errc::invalid_argument, "eval needs --joint <checkpoint>");
  auto j = load_joint<T>(o.joint, o);
  const ExperimentConfig& c = j.config;
  RunDir run(c.output_dir);
  write_config(run, c);
  const Corpus corpus = corpus_for(o, c);
  const auto& samples = corpus.samples;
  const auto& test = corpus.split.test;
  require(!test.empty(), Errc::invalid_argument, "eval: empty test split");
  const Palette& palette = c.data.scene.palette;
  const int k = palette.size();
  const auto items = task_items(c, samples);

  std::optional<SegNet<T>> seg;
  if (!o.seg.empty()) seg.emplace(load_seg<T>(o.seg));
  require(seg || c.joint.mask_source == MaskSource::ground_truth, Errc::invalid_argument,
          "joint.mask_source is 'predicted': pass --seg <checkpoint>");
  const auto gt = ground_truth_masks<T>(samples, palette);
  std::optional<std::vector<SemanticMask<T>>> pred;
  if (seg) pred = predicted_masks(*seg, samples, palette);

  struct Column {
    InputKind kind;
    JointEval eval;
    std::vector<double> bits;  // per test sample
  };
  std::vector<Column> cols;

  auto baseline = [&](InputKind kind, const TaskData<T>& data) {
    auto m = train_task_model<T>(c, data, corpus.split, false);
    Column col{kind, evaluate_joint<T>(nullptr, *m.head, data, test), {}};
    for (int i : test)
      col.bits.push_back(kind == InputKind::original_image
                             ? double(raw_image_payload(samples[i].image.height, samples[i].image.width).size_bits)
                             : transmitted_bits(data.labels[i], k));
    cols.push_back(std::move(col));
  };
  baseline(InputKind::original_image, image_task_data<T>(samples, items, k));
  baseline(InputKind::ground_truth_mask, make_task_data(gt, items, c.mask));
  if (pred) baseline(InputKind::predicted_mask, make_task_data(*pred, items, c.mask));

  const auto masked_data = make_task_data(c.joint.mask_source == MaskSource::ground_truth ? gt : *pred, items, c.mask);
  Column masked{InputKind::masked_mask, evaluate_joint<T>(&j.predictor, *j.head, masked_data, test), {}};
  for (const auto& m : transmitted_labels(&j.predictor, masked_data, test)) masked.bits.push_back(transmitted_bits(m, k));
  cols.push_back(std::move(masked));

  // Error rates by task category.
  std::vector<ErrorRates> rates;
  std::set<std::string> categories;
  for (const auto& col : cols) {
    rates.push_back(error_rate(col.eval.predictions, col.eval.targets, col.eval.categories));
    for (const auto& [cat, _] : rates.back().counts) categories.insert(cat);
  }
  {
    auto os = open_out(run.artifact("eval_error_rate.csv"));
    os << "category";
    for (const auto& col : cols) os << ',' << input_name(col.kind);
    os << '\n';
    for (const auto& cat : categories) {
      os << cat;
      for (const auto& r : rates) os << ',' << csv_number(r.by_category.count(cat) ? r.by_category.at(cat) : NAN, 2);
      os << '\n';
    }
    os << "overall";
    for (const auto& r : rates) os << ',' << csv_number(r.overall, 2);
    os << '\n';
  }

  // Mean payload by scene damage class.
  {
    auto os = open_out(run.artifact("eval_payload.csv"));
    os << "scene_damage,count";
    for (const auto& col : cols) os << ',' << input_name(col.kind) << "_bits";
    os << '\n';
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t t = 0; t < test.size(); ++t) groups[damage_name(samples[test[t]].damage)].push_back(t);
    std::vector<std::size_t> all(test.size());
    std::iota(all.begin(), all.end(), 0);
    groups["overall"] = all;
    for (const auto& [name, members] : groups) {
      os << name << ',' << members.size();
      for (const auto& col : cols) {
        double s = 0;
        for (auto t : members) s += col.bits[t];
        os << ',' << csv_number(s / double(members.size()), 1);
      }
      os << '\n';
    }
  }

  if (seg) write_iou_csv(run.artifact("eval_miou.csv"), palette, {{"test", seg_iou(*seg, samples, test)}});

  nlohmann::json summary = {{"task", detail::enum_to_string(c.joint.task)},
                            {"w_s", c.joint.weights.sparsity},
                            {"w_c", c.joint.weights.categorical},
                            {"mask_density", cols.back().eval.density},
                            {"inputs", nlohmann::json::object()}};
  for (std::size_t i = 0; i < cols.size(); ++i) {
    double bits = 0;
    for (double b : cols[i].bits) bits += b;
    summary["inputs"][input_name(cols[i].kind)] = {{"accuracy", cols[i].eval.accuracy},
                                                   {"error_rate", rates[i].overall},
                                                   {"avg_payload_bits", bits / double(test.size())}};
  }
  open_out(run.artifact("eval_summary.json")) << summary.dump(2) << '\n';
  run.commit();
  for (std::size_t i = 0; i < cols.size(); ++i)
    std::cout << input_name(cols[i].kind) << ": error " << csv_number(rates[i].overall, 2) << "%, payload "
              << csv_number(summary["inputs"][input_name(cols[i].kind)]["avg_payload_bits"].template get<double>(), 1)
              << " bits\n";
  return 0;
}

int latency_report(const Options& o) {
  require(!o.payloads.empty(), Errc::invalid_argument, "latency-report needs --payloads <csv of method,size_bits>");
  const ExperimentConfig c = load_options(o);
  std::vector<std::pair<std::string, double>> sizes;
  const auto rows = read_csv(o.payloads);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = o.payloads + ":" + std::to_string(r + 1);
    if (r == 0 && !rows[r].empty() && rows[r][0] == "method") continue;
    require(rows[r].size() == 2, Errc::format, where + ": expected method,size_bits");
    sizes.emplace_back(rows[r][0], parse_number(rows[r][1], where));
  }
  const LatencyTable table = latency_table_mean(sizes, c.elevations, c.link);
  RunDir run(c.output_dir);
  write_config(run, c);
  {
    auto os = open_out(run.artifact("latency.csv"));
    write_latency_csv(os, table);
  }
  run.commit();
  write_latency_csv(std::cout, table);
  return 0;
}

template <typename T>
int fidelity_report(const Options& o) {
  require(!o.joint.empty(), Errc::invalid_argument, "fidelity-report needs --joint <checkpoint>");
  auto j = load_joint<T>(o.joint, o);
  const ExperimentConfig& c = j.config;
  RunDir run(c.output_dir);
  write_config(run, c);
  const Corpus corpus = corpus_for(o, c);
  const auto masks = source_masks<T>(c, o, corpus.samples);
  const auto data = make_task_data(masks, task_items(c, corpus.samples), c.mask);

  struct Acc {
    double jaccard = 0, mse = 0;
    int n = 0;
  };
  std::map<std::string, Acc> by_cat;
  Acc overall, identity;
  for (int i : corpus.split.test) {
    const auto b = predict_hard_mask(j.predictor, data.predictor_in[i], data.rgb[i].h(), data.rgb[i].w(), std::uint64_t(i));
    const Tensor<T> masked = mask_product(data.rgb[i], b.values);
    for (const auto& item : data.items[i]) {
      const auto r = feature_fidelity(*j.head, data.rgb[i], masked, item.question_id).report;
      for (Acc* a : {&by_cat[item.category], &overall}) a->jaccard += r.jaccard, a->mse += r.mse, ++a->n;
      const auto id = feature_fidelity(*j.head, data.rgb[i], data.rgb[i], item.question_id).report;
      identity.jaccard += id.jaccard, identity.mse += id.mse, ++identity.n;
    }
  }
  by_cat["overall"] = overall;
  by_cat["all_ones_mask"] = identity;
  {
    auto os = open_out(run.artifact("fidelity.csv"));
    os << "category,count,jaccard,mse\n";
    for (const auto& [cat, a] : by_cat)
      os << cat << ',' << a.n << ',' << csv_number(a.n ? a.jaccard / a.n : NAN, 4) << ','
         << csv_number(a.n ? a.mse / a.n : NAN, 4) << '\n';
  }
  run.commit();
  std::cout << "fidelity (" << j.head->name() << " tap): jaccard " << csv_number(overall.jaccard / overall.n, 4)
            << ", mse " << csv_number(overall.mse / overall.n, 4) << '\n';
  return 0;
}

int plot_cmd(const Options& o) {
  require(!o.runs.empty(), Errc::invalid_argument, "plot needs at least one --run <directory>");
  const ExperimentConfig c = load_options(o);
  RunDir run(c.output_dir);
  plot::Series masked{"masked mask", {}, {}}, full{"ground-truth mask", {}, {}};
  int written = 0;
  for (const auto& dir : o.runs) {
    const fs::path d(dir);
    require(fs::is_directory(d), Errc::io, "run directory " + dir + " does not exist");
    const std::string tag = fs::path(dir).filename().empty() ? fs::path(dir).parent_path().filename().string()
                                                              : fs::path(dir).filename().string();
    if (fs::exists(d / "seg_iou.csv")) {
      const auto rows = read_csv(d / "seg_iou.csv");
      require(!rows.empty() && rows[0].size() >= 3, Errc::format, (d / "seg_iou.csv").string() + ": bad header");
      std::vector<std::string> names;
      std::vector<double> iou;
      const std::size_t col = rows[0].size() - 1;
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r][0] == "mean") continue;
        names.push_back(rows[r][1]);
        iou.push_back(col < rows[r].size() && !rows[r][col].empty() ? parse_number(rows[r][col], dir) : NAN);
      }
      plot::bar_chart(run.artifact(tag + "_seg_iou.png").string(), "per-class IoU: " + tag, names, iou, rows[0][col]);
      ++written;
    }
    if (fs::exists(d / "joint_history.csv")) {
      const auto rows = read_csv(d / "joint_history.csv");
      plot::Series acc{"val accuracy", {}, {}}, dens{"val density", {}, {}};
      for (std::size_t r = 1; r < rows.size(); ++r) {
        require(rows[r].size() >= 6, Errc::format, (d / "joint_history.csv").string() + ": short row");
        const double e = parse_number(rows[r][0], dir);
        acc.x.push_back(e), acc.y.push_back(parse_number(rows[r][4], dir));
        dens.x.push_back(e), dens.y.push_back(parse_number(rows[r][5], dir));
      }
      plot::line_chart(run.artifact(tag + "_joint_history.png").string(), "joint training: " + tag, "epoch", "value",
                       {acc, dens});
      ++written;
    }
    if (fs::exists(d / "eval_summary.json")) {
      std::ifstream in(d / "eval_summary.json");
      nlohmann::json s;
      try {
        s = nlohmann::json::parse(in);
        const auto& in_m = s.at("inputs").at("masked_mask");
        masked.x.push_back(in_m.at("avg_payload_bits").get<double>());
        masked.y.push_back(in_m.at("accuracy").get<double>());
        const auto& in_g = s.at("inputs").at("ground_truth_mask");
        full.x.push_back(in_g.at("avg_payload_bits").get<double>());
        full.y.push_back(in_g.at("accuracy").get<double>());
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::format, (d / "eval_summary.json").string() + ": " + e.what());
      }
    }
  }
  if (!masked.x.empty()) {
    std::vector<std::size_t> order(masked.x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return masked.x[a] < masked.x[b]; });
    plot::Series sorted{masked.name, {}, {}};
    for (auto i : order) sorted.x.push_back(masked.x[i]), sorted.y.push_back(masked.y[i]);
    plot::line_chart(run.artifact("accuracy_vs_payload.png").string(), "accuracy vs payload", "payload (bits)",
                     "test accuracy", {sorted, full});
    ++written;
  }
  require(written > 0, Errc::invalid_argument, "plot: no seg_iou.csv, joint_history.csv or eval_summary.json found");
  run.commit();
  std::cout << "wrote " << written << " plot(s) to " << run.root().string() << '\n';
  return 0;
}

template <template <typename> class F>
int by_precision(const Options& o) {
  const ExperimentConfig c = load_options(o);
  return c.precision == Precision::float64 ? F<double>::run(o) : F<float>::run(o);
}

template <typename T> struct TrainSeg { static int run(const Options& o) { return train_seg<T>(o); } };
template <typename T> struct TrainJoint { static int run(const Options& o) { return train_joint_cmd<T>(o); } };
template <typename T> struct Eval { static int run(const Options& o) { return eval_cmd<T>(o); } };
template <typename T> struct Fidelity { static int run(const Options& o) { return fidelity_report<T>(o); } };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-aware semantic masking for UAV imagery: data, training, evaluation and link reports"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON); defaults when omitted")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides output_dir)");
    sub->add_option("--seed", o.seed, "seed override");
    sub->add_option("--precision", o.precision, "float32 or float64");
  };
  auto data_flag = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "corpus directory from gen-data; generated in memory when omitted");
  };

  auto* gen = app.add_subcommand("gen-data", "render a synthetic corpus");
  common(gen);
  gen->add_option("--n", o.n, "number of scenes")->check(CLI::PositiveNumber);

  auto* seg = app.add_subcommand("train-seg", "train the segmentation network");
  common(seg);
  data_flag(seg);
  seg->add_option("--n", o.n, "number of scenes")->check(CLI::PositiveNumber);

  auto* joint = app.add_subcommand("train-joint", "jointly train mask predictor and downstream head");
  common(joint);
  data_flag(joint);
  joint->add_option("--n", o.n, "number of scenes")->check(CLI::PositiveNumber);
  joint->add_option("--seg", o.seg, "segmentation checkpoint (for predicted masks)");

  auto* ev = app.add_subcommand("eval", "error rate, mIoU and payload tables for the four head inputs");
  common(ev);
  data_flag(ev);
  ev->add_option("--joint", o.joint, "train-joint checkpoint")->required();
  ev->add_option("--seg", o.seg, "segmentation checkpoint");

  auto* lat = app.add_subcommand("latency-report", "transmission latency per payload and UAV elevation");
  common(lat);
  lat->add_option("--payloads", o.payloads, "CSV with rows method,size_bits")->required()->check(CLI::ExistingFile);

  auto* fid = app.add_subcommand("fidelity-report", "feature fidelity of masked against unmasked inputs");
  common(fid);
  data_flag(fid);
  fid->add_option("--joint", o.joint, "train-joint checkpoint")->required();
  fid->add_option("--seg", o.seg, "segmentation checkpoint");

  auto* plt = app.add_subcommand("plot", "render IoU bars and training/payload curves from run directories");
  common(plt);
  plt->add_option("--run", o.runs, "run directory (repeatable)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error:usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*gen) return gen_data(o);
    if (*seg) return by_precision<TrainSeg>(o);
    if (*joint) return by_precision<TrainJoint>(o);
    if (*ev) return by_precision<Eval>(o);
    if (*lat) return latency_report(o);
    if (*fid) return by_precision<Fidelity>(o);
    if (*plt) return plot_cmd(o);
  } catch (const semmask::Error& e) {
    std::cerr << "error:" << semmask::errc_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error:internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
