#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "semmask/data/oracles.hpp"
#include "semmask/data/palette.hpp"
#include "semmask/data/types.hpp"
#include "semmask/random.hpp"

namespace semmask {

struct IntRange {
  int lo = 0;
  int hi = 0;
  int draw(Rng& rng) const { return hi <= lo ? lo : rng.uniform_int(lo, hi); }
};

struct SceneConfig {
  int height = 96;
  int width = 96;
  Palette palette = Palette::rescuenet();
  double noise_std = 0.03;

  IntRange water_count{0, 1}, water_size{24, 44};
  IntRange road_count{0, 2}, road_width{10, 16};
  IntRange building_count{1, 4}, building_size{16, 28};
  IntRange tree_count{0, 3}, tree_size{12, 20};
  IntRange vehicle_count{0, 2}, vehicle_size{10, 14};
  int object_gap = 2;

  int questions_per_scene = 3;
  std::vector<QuestionKind> question_kinds{QuestionKind::count, QuestionKind::presence};
  AnswerVocabulary vocabulary = AnswerVocabulary::synthetic();
  DamageThresholds damage{};
};

enum class ShapeKind { rect, ellipse };

// A painted region; later shapes overwrite earlier ones.
struct PlacedShape {
  ShapeKind kind = ShapeKind::rect;
  int y0 = 0, x0 = 0, h = 0, w = 0;
  std::uint8_t label = 0;

  bool covers(int y, int x) const {
    if (y < y0 || x < x0 || y >= y0 + h || x >= x0 + w) return false;
    if (kind == ShapeKind::rect) return true;
    // Pixel centre inside the inscribed ellipse, in doubled integer coordinates.
    const std::int64_t dy = 2 * y + 1 - 2 * y0 - h, dx = 2 * x + 1 - 2 * x0 - w;
    const std::int64_t hh = std::int64_t(h) * h, ww = std::int64_t(w) * w;
    return dy * dy * ww + dx * dx * hh <= hh * ww;
  }
};

struct Scene {
  Sample sample;
  std::vector<PlacedShape> shapes;
};

inline void validate_scene_config(const SceneConfig& cfg) {
  require(cfg.height > 0 && cfg.width > 0 && cfg.height % 8 == 0 && cfg.width % 8 == 0, Errc::invalid_argument,
          "scene size " + std::to_string(cfg.height) + "x" + std::to_string(cfg.width) + " must be divisible by 8");
  require(cfg.height < 65536 && cfg.width < 65536, Errc::invalid_argument, "scene size exceeds 16-bit range");
  require(cfg.palette.size() >= 1, Errc::invalid_argument, "empty palette");
  require(cfg.noise_std >= 0, Errc::invalid_argument, "noise_std must be nonnegative");
}

namespace detail {

class Placer {
 public:
  Placer(const SceneConfig& cfg, Rng& rng, std::vector<PlacedShape>& shapes)
      : cfg_(cfg), rng_(rng), shapes_(shapes) {}

  void strip(std::uint8_t label, int width) {
    width = std::min(width, std::min(cfg_.height, cfg_.width));
    if (rng_.bernoulli(0.5)) {
      const int y = rng_.uniform_int(0, cfg_.height - width);
      shapes_.push_back({ShapeKind::rect, y, 0, width, cfg_.width, label});
    } else {
      const int x = rng_.uniform_int(0, cfg_.width - width);
      shapes_.push_back({ShapeKind::rect, 0, x, cfg_.height, width, label});
    }
  }

  void blob(ShapeKind kind, std::uint8_t label, const IntRange& size) {
    const int h = std::min(size.draw(rng_), cfg_.height), w = std::min(size.draw(rng_), cfg_.width);
    shapes_.push_back({kind, rng_.uniform_int(0, cfg_.height - h), rng_.uniform_int(0, cfg_.width - w), h, w, label});
  }

  // Places a shape whose box (plus gap) avoids every earlier object; gives up
  // after a bounded number of attempts.
  bool object(ShapeKind kind, std::uint8_t label, const IntRange& size) {
    for (int attempt = 0; attempt < 40; ++attempt) {
      const int h = std::min(size.draw(rng_), cfg_.height), w = std::min(size.draw(rng_), cfg_.width);
      const int y = rng_.uniform_int(0, cfg_.height - h), x = rng_.uniform_int(0, cfg_.width - w);
      const int g = cfg_.object_gap;
      bool clear = true;
      for (const auto& o : objects_)
        if (y < o.y0 + o.h + g && o.y0 < y + h + g && x < o.x0 + o.w + g && o.x0 < x + w + g) {
          clear = false;
          break;
        }
      if (!clear) continue;
      PlacedShape s{kind, y, x, h, w, label};
      objects_.push_back(s);
      shapes_.push_back(s);
      return true;
    }
    return false;
  }

 private:
  const SceneConfig& cfg_;
  Rng& rng_;
  std::vector<PlacedShape>& shapes_;
  std::vector<PlacedShape> objects_;
};

inline std::uint8_t pick(Rng& rng, const std::vector<int>& labels) {
  return std::uint8_t(labels[rng.uniform_int(0, int(labels.size()) - 1)]);
}

inline std::vector<int> present(const Palette& p, std::initializer_list<ClassRole> roles) {
  std::vector<int> out;
  for (ClassRole r : roles)
    if (int k = p.find(r); k >= 0) out.push_back(k);
  return out;
}

}  // namespace detail

// Deterministic synthetic aerial scene: painted shapes, noisy RGB rendering,
// and oracle-derived damage label and question answers.
inline Scene render_scene(std::uint64_t seed, const SceneConfig& cfg) {
  validate_scene_config(cfg);
  const Palette& pal = cfg.palette;
  Rng rng(seed, 0);
  Scene scene;
  detail::Placer place(cfg, rng, scene.shapes);

  const bool flood_palette = pal.has(ClassRole::building_flooded) || pal.has(ClassRole::road_flooded);
  const bool flooded_scene = flood_palette && rng.bernoulli(0.5);
  const int severity = rng.uniform_int(0, 2);

  auto roles = [&](std::initializer_list<ClassRole> r) { return detail::present(pal, r); };

  if (auto grass = roles({ClassRole::grass}); !grass.empty())
    for (int i = 0, n = cfg.water_count.draw(rng); i < n; ++i)
      place.blob(ShapeKind::ellipse, grass[0], cfg.water_size);
  if (auto water = roles({ClassRole::water}); !water.empty()) {
    const int n = cfg.water_count.draw(rng) + (flooded_scene && cfg.water_count.hi > 0 ? 1 : 0);
    for (int i = 0; i < n; ++i) place.blob(ShapeKind::ellipse, water[0], cfg.water_size);
  }
  {
    const auto dry = roles({ClassRole::road_clear});
    const auto wet = roles({ClassRole::road_blocked, ClassRole::road_flooded});
    for (int i = 0, n = cfg.road_count.draw(rng); i < n; ++i) {
      const double p_wet = flood_palette ? (flooded_scene ? 0.7 : 0.0) : 0.35;
      const auto& from = (!wet.empty() && (dry.empty() || rng.bernoulli(p_wet))) ? wet : dry;
      if (!from.empty()) place.strip(detail::pick(rng, from), cfg.road_width.draw(rng));
    }
  }

  const int buildings = cfg.building_count.draw(rng);
  std::vector<int> building_labels;
  if (flood_palette) {
    const auto intact = roles({ClassRole::building_intact});
    const auto wet = roles({ClassRole::building_flooded});
    for (int i = 0; i < buildings; ++i) {
      const bool w = !wet.empty() && (intact.empty() || (flooded_scene && rng.bernoulli(0.7)));
      const auto& from = w ? wet : intact;
      if (!from.empty()) building_labels.push_back(detail::pick(rng, from));
    }
  } else {
    const auto intact = roles({ClassRole::building_intact});
    const auto partial = roles({ClassRole::building_minor, ClassRole::building_major});
    const auto destroyed = roles({ClassRole::building_destroyed});
    for (int i = 0; i < buildings; ++i) {
      std::vector<int> from = intact;
      if (severity >= 1) from.insert(from.end(), partial.begin(), partial.end());
      if (!from.empty()) building_labels.push_back(detail::pick(rng, from));
    }
    // Make the drawn severity visible in at least one building.
    if (!building_labels.empty()) {
      const int i = rng.uniform_int(0, int(building_labels.size()) - 1);
      if (severity == 1 && !partial.empty()) building_labels[i] = detail::pick(rng, partial);
      if (severity == 2 && !destroyed.empty()) building_labels[i] = destroyed[0];
    }
  }
  for (int label : building_labels) place.object(ShapeKind::rect, std::uint8_t(label), cfg.building_size);
  if (auto pool = roles({ClassRole::pool}); !pool.empty() && rng.bernoulli(0.3))
    place.object(ShapeKind::rect, pool[0], cfg.vehicle_size);
  if (auto tree = roles({ClassRole::tree}); !tree.empty())
    for (int i = 0, n = cfg.tree_count.draw(rng); i < n; ++i) place.object(ShapeKind::ellipse, tree[0], cfg.tree_size);
  if (auto car = roles({ClassRole::vehicle}); !car.empty())
    for (int i = 0, n = cfg.vehicle_count.draw(rng); i < n; ++i) place.object(ShapeKind::rect, car[0], cfg.vehicle_size);

  Sample& s = scene.sample;
  const int bg = std::max(pal.find(ClassRole::background), 0);
  s.labels = LabelMap(cfg.height, cfg.width, std::uint8_t(bg));
  for (const auto& sh : scene.shapes)
    for (int y = std::max(sh.y0, 0); y < std::min(sh.y0 + sh.h, cfg.height); ++y)
      for (int x = std::max(sh.x0, 0); x < std::min(sh.x0 + sh.w, cfg.width); ++x)
        if (sh.covers(y, x)) s.labels.at(y, x) = sh.label;

  s.image = RgbImage(cfg.height, cfg.width);
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) {
      const Rgb c = pal.color(s.labels.at(y, x));
      for (int ch = 0; ch < 3; ++ch) {
        double v = c[ch] / 255.0 + (cfg.noise_std > 0 ? rng.normal(0.0, cfg.noise_std) : 0.0);
        v = std::clamp(v, 0.0, 1.0);
        s.image.pixel(y, x)[ch] = std::uint8_t(std::lround(v * 255.0));
      }
    }

  s.damage = damage_oracle(s.labels, pal, cfg.damage);
  const QuestionSet questions(pal);
  std::vector<int> pool = questions.ids_of(cfg.question_kinds);
  const int nq = std::min<int>(cfg.questions_per_scene, int(pool.size()));
  for (int i = 0; i < nq; ++i) {
    const int j = rng.uniform_int(i, int(pool.size()) - 1);
    std::swap(pool[i], pool[j]);
    const int qid = pool[i];
    s.qa.push_back({qid, questions.at(qid).text, answer_oracle(s.labels, qid, questions, pal, cfg.vocabulary)});
  }
  return scene;
}

inline Sample generate_scene(std::uint64_t seed, const SceneConfig& cfg) { return render_scene(seed, cfg).sample; }

inline std::uint64_t corpus_seed(std::uint64_t base, int index) {
  return base * 1000003ULL + std::uint64_t(index) + 1;
}

inline std::vector<Sample> generate_corpus(int count, std::uint64_t base_seed, const SceneConfig& cfg) {
  require(count >= 0, Errc::invalid_argument, "negative corpus size");
  std::vector<Sample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Sample s = generate_scene(corpus_seed(base_seed, i), cfg);
    char stem[32];
    std::snprintf(stem, sizeof stem, "scene_%05d", i);
    s.stem = stem;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace semmask
