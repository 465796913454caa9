#pragma once

#include <array>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "semmask/data/scene.hpp"
#include "semmask/downstream.hpp"
#include "semmask/link.hpp"
#include "semmask/masking.hpp"
#include "semmask/segmentation.hpp"
#include "semmask/training.hpp"

namespace semmask {

enum class Task { classification, vqa };
enum class MaskSource { predicted, ground_truth };
enum class Precision { float32, float64 };

struct DataConfig {
  int num_scenes = 512;
  std::string palette = "rescuenet";
  SceneConfig scene{};
};

struct JointConfig {
  Task task = Task::classification;
  MaskSource mask_source = MaskSource::predicted;
  LossWeights weights{};
  TrainSchedule schedule{.epochs = 20, .batch_size = 8, .lr = 1e-3, .seed = 0, .patience = 0,
                         .selection = Selection::accuracy};
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  Precision precision = Precision::float32;
  std::string output_dir = "runs/default";
  DataConfig data{};
  SegConfig segmentation{};
  TrainSchedule seg_schedule{.epochs = 40, .batch_size = 4, .lr = 3e-3, .seed = 0, .patience = 0,
                             .selection = Selection::accuracy};
  MaskPredictorConfig mask{};
  ClassifierConfig classifier{};
  VqaConfig vqa{};
  JointConfig joint{};
  LinkParams link{};
  std::vector<double> elevations = default_elevations();
};

// ---------------------------------------------------------------------------
// Field tables shared by the strict reader and the writer.

template <typename E>
struct EnumNames;

#define SEMMASK_ENUM_NAMES(E, ...)                                                       \
  template <>                                                                            \
  struct EnumNames<E> {                                                                  \
    static constexpr auto values = std::to_array<std::pair<E, const char*>>({__VA_ARGS__}); \
  };

SEMMASK_ENUM_NAMES(Task, {Task::classification, "classification"}, {Task::vqa, "vqa"})
SEMMASK_ENUM_NAMES(MaskSource, {MaskSource::predicted, "predicted"}, {MaskSource::ground_truth, "ground_truth"})
SEMMASK_ENUM_NAMES(Precision, {Precision::float32, "float32"}, {Precision::float64, "float64"})
SEMMASK_ENUM_NAMES(Selection, {Selection::last, "last"}, {Selection::accuracy, "accuracy"},
                   {Selection::objective, "objective"})
SEMMASK_ENUM_NAMES(MaskGeometry, {MaskGeometry::downsampled, "downsampled"},
                   {MaskGeometry::full_resolution, "full_resolution"})
SEMMASK_ENUM_NAMES(GateActivation, {GateActivation::gumbel_softmax, "gumbel_softmax"},
                   {GateActivation::sigmoid, "sigmoid"})
SEMMASK_ENUM_NAMES(GateNoise, {GateNoise::sampled, "sampled"}, {GateNoise::none, "none"})
SEMMASK_ENUM_NAMES(Fusion, {Fusion::product, "product"}, {Fusion::concat, "concat"})
SEMMASK_ENUM_NAMES(QuestionKind, {QuestionKind::count, "count"}, {QuestionKind::presence, "presence"},
                   {QuestionKind::condition, "condition"})
#undef SEMMASK_ENUM_NAMES

template <typename IO> void fields(IO& io, IntRange& r) { io("lo", r.lo); io("hi", r.hi); }
template <typename IO> void fields(IO& io, DamageThresholds& d) { io("debris_fraction", d.debris_fraction); }

template <typename IO>
void fields(IO& io, SceneConfig& c) {
  io("height", c.height);
  io("width", c.width);
  io("noise_std", c.noise_std);
  io("water_count", c.water_count);
  io("water_size", c.water_size);
  io("road_count", c.road_count);
  io("road_width", c.road_width);
  io("building_count", c.building_count);
  io("building_size", c.building_size);
  io("tree_count", c.tree_count);
  io("tree_size", c.tree_size);
  io("vehicle_count", c.vehicle_count);
  io("vehicle_size", c.vehicle_size);
  io("object_gap", c.object_gap);
  io("questions_per_scene", c.questions_per_scene);
  io("question_kinds", c.question_kinds);
  io("damage", c.damage);
}

template <typename IO>
void fields(IO& io, DataConfig& c) {
  io("num_scenes", c.num_scenes);
  io("palette", c.palette);
  io("scene", c.scene);
}

template <typename IO>
void fields(IO& io, SegConfig& c) {
  io("widths", c.widths);
  io("output_stride", c.output_stride);
  io("bins", c.bins);
  io("reduced_channels", c.reduced_channels);
  io("head_channels", c.head_channels);
  io("adaptive_bins", c.adaptive_bins);
}

template <typename IO>
void fields(IO& io, TrainSchedule& s) {
  io("epochs", s.epochs);
  io("batch_size", s.batch_size);
  io("lr", s.lr);
  io("patience", s.patience);
  io("selection", s.selection);
}

template <typename IO>
void fields(IO& io, MaskPredictorConfig& c) {
  io("widths", c.widths);
  io("kernel", c.kernel);
  io("upsample", c.upsample);
  io("geometry", c.geometry);
  io("activation", c.activation);
  io("tau_start", c.tau_start);
  io("tau_end", c.tau_end);
  io("anneal_steps", c.anneal_steps);
  io("hard_eval", c.hard_eval);
  io("eval_noise", c.eval_noise);
}

template <typename IO>
void fields(IO& io, BackboneConfig& c) {
  io("stem_channels", c.stem_channels);
  io("widths", c.widths);
  io("stem_stride", c.stem_stride);
}

template <typename IO>
void fields(IO& io, ClassifierConfig& c) {
  io("backbone", c.backbone);
  io("dropout", c.dropout);
}

template <typename IO>
void fields(IO& io, VqaConfig& c) {
  io("backbone", c.backbone);
  io("visual_hidden", c.visual_hidden);
  io("feature_dim", c.feature_dim);
  io("token_dim", c.token_dim);
  io("fusion", c.fusion);
  io("classifier_hidden", c.classifier_hidden);
  io("dropout", c.dropout);
}

template <typename IO> void fields(IO& io, LossWeights& w) { io("w_s", w.sparsity); io("w_c", w.categorical); }

template <typename IO>
void fields(IO& io, JointConfig& c) {
  io("task", c.task);
  io("mask_source", c.mask_source);
  io("weights", c.weights);
  io("schedule", c.schedule);
}

template <typename IO>
void fields(IO& io, LinkParams& p) {
  io("tx_power_w", p.tx_power_w);
  io("alpha0_db", p.alpha0_db);
  io("bandwidth_hz", p.bandwidth_hz);
  io("noise_dbm_per_hz", p.noise_dbm_per_hz);
  io("station_height_m", p.station_height_m);
  io("station_xy", p.station_xy);
  io("uav_xy", p.uav_xy);
}

template <typename IO>
void fields(IO& io, ExperimentConfig& c) {
  io("seed", c.seed);
  io("precision", c.precision);
  io("output_dir", c.output_dir);
  io("data", c.data);
  io("segmentation", c.segmentation);
  io("seg_schedule", c.seg_schedule);
  io("mask", c.mask);
  io("classifier", c.classifier);
  io("vqa", c.vqa);
  io("joint", c.joint);
  io("link", c.link);
  io("elevations", c.elevations);
}

namespace detail {

template <typename V>
concept IsEnum = std::is_enum_v<V>;

template <typename E>
std::string enum_to_string(E e) {
  for (const auto& [v, n] : EnumNames<E>::values)
    if (v == e) return n;
  return "?";
}

template <typename E>
E enum_from_string(const std::string& s, const std::string& path) {
  std::string options;
  for (const auto& [v, n] : EnumNames<E>::values) {
    if (s == n) return v;
    options += (options.empty() ? "" : "|") + std::string(n);
  }
  throw Error(Errc::config, path + ": '" + s + "' is not one of " + options);
}

struct JsonWriter {
  nlohmann::json out = nlohmann::json::object();

  template <typename V>
  static nlohmann::json encode(V& v) {
    if constexpr (IsEnum<V>) {
      return enum_to_string(v);
    } else if constexpr (requires { fields(std::declval<JsonWriter&>(), v); }) {
      JsonWriter w;
      fields(w, v);
      return w.out;
    } else if constexpr (requires { v.begin(); } && !std::is_same_v<V, std::string>) {
      auto arr = nlohmann::json::array();
      for (auto& x : v) arr.push_back(encode(x));
      return arr;
    } else {
      return v;
    }
  }

  template <typename V>
  void operator()(const char* key, V& v) { out[key] = encode(v); }
};

struct JsonReader {
  const nlohmann::json& in;
  std::string path;
  std::set<std::string> seen{};

  template <typename V>
  static void decode(const nlohmann::json& j, V& v, const std::string& path) {
    if constexpr (IsEnum<V>) {
      require(j.is_string(), Errc::config, path + ": expected a string");
      v = enum_from_string<V>(j.get<std::string>(), path);
    } else if constexpr (requires(JsonReader& r) { fields(r, v); }) {
      require(j.is_object(), Errc::config, path + ": expected an object");
      JsonReader r{j, path};
      fields(r, v);
      r.finish();
    } else if constexpr (requires { v.begin(); } && !std::is_same_v<V, std::string>) {
      require(j.is_array(), Errc::config, path + ": expected an array");
      if constexpr (requires { v.resize(0); }) {
        v.resize(j.size());
      } else {
        require(j.size() == v.size(), Errc::config, path + ": expected " + std::to_string(v.size()) + " elements");
      }
      std::size_t i = 0;
      for (auto& x : v) {
        decode(j[i], x, path + "[" + std::to_string(i) + "]");
        ++i;
      }
    } else if constexpr (std::is_same_v<V, bool>) {
      require(j.is_boolean(), Errc::config, path + ": expected true or false");
      v = j.get<bool>();
    } else if constexpr (std::is_integral_v<V>) {
      require(j.is_number_integer(), Errc::config, path + ": expected an integer");
      if constexpr (std::is_unsigned_v<V>) require(j.get<long long>() >= 0, Errc::config, path + ": must be nonnegative");
      v = j.get<V>();
    } else if constexpr (std::is_floating_point_v<V>) {
      require(j.is_number(), Errc::config, path + ": expected a number");
      v = j.get<V>();
    } else {
      require(j.is_string(), Errc::config, path + ": expected a string");
      v = j.get<V>();
    }
  }

  template <typename V>
  void operator()(const char* key, V& v) {
    seen.insert(key);
    if (in.contains(key)) decode(in.at(key), v, path + "." + key);
  }

  void finish() const {
    for (const auto& [k, _] : in.items())
      require(seen.count(k) > 0, Errc::config, path + ": unknown key '" + k + "'");
  }
};

}  // namespace detail

inline nlohmann::json to_json(ExperimentConfig c) { return detail::JsonWriter::encode(c); }

// Fills in values derived from other fields and checks the whole config.
inline ExperimentConfig resolve(ExperimentConfig c) {
  c.data.scene.palette = Palette::preset(c.data.palette);
  require(c.data.num_scenes > 0, Errc::config, "data.num_scenes must be positive");
  validate_scene_config(c.data.scene);
  c.segmentation.num_classes = c.data.scene.palette.size();
  validate(c.segmentation);
  validate(c.mask);
  validate(c.classifier);
  c.vqa.num_answers = c.data.scene.vocabulary.size();
  validate(c.vqa);
  validate(c.joint.weights);
  validate(c.seg_schedule);
  validate(c.joint.schedule);
  c.seg_schedule.seed = c.seed;
  c.joint.schedule.seed = c.seed;
  require(!c.elevations.empty(), Errc::config, "elevations must not be empty");
  validate(c.link);
  return c;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  detail::JsonReader::decode(j, c, "config");
  return resolve(c);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), Errc::io, "cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config, path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace semmask
