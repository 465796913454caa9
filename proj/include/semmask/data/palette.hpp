#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semmask/data/types.hpp"
#include "semmask/error.hpp"

namespace semmask {

using Rgb = std::array<std::uint8_t, 3>;

// What a class means to the scene generator and the answer oracles.
enum class ClassRole {
  background,
  water,
  building_intact,
  building_minor,
  building_major,
  building_destroyed,
  building_flooded,
  road_clear,
  road_blocked,
  road_flooded,
  tree,
  vehicle,
  pool,
  grass,
  other,
};

inline ClassRole role_from_name(const std::string& name) {
  static const std::vector<std::pair<std::string, ClassRole>> table = {
      {"background", ClassRole::background},
      {"water", ClassRole::water},
      {"building-no-damage", ClassRole::building_intact},
      {"building-non-flooded", ClassRole::building_intact},
      {"building-minor-damage", ClassRole::building_minor},
      {"building-major-damage", ClassRole::building_major},
      {"building-total-destruction", ClassRole::building_destroyed},
      {"building-flooded", ClassRole::building_flooded},
      {"road-clear", ClassRole::road_clear},
      {"road-non-flooded", ClassRole::road_clear},
      {"road-blocked", ClassRole::road_blocked},
      {"road-flooded", ClassRole::road_flooded},
      {"tree", ClassRole::tree},
      {"vehicle", ClassRole::vehicle},
      {"pool", ClassRole::pool},
      {"grass", ClassRole::grass},
  };
  for (const auto& [n, r] : table)
    if (n == name) return r;
  return ClassRole::other;
}

struct PaletteEntry {
  std::string name;
  Rgb color{};
  ClassRole role = ClassRole::other;
};

class Palette {
 public:
  Palette() = default;
  explicit Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) { validate(); }

  int size() const { return int(entries_.size()); }
  const PaletteEntry& operator[](int k) const { return entries_.at(k); }
  const std::vector<PaletteEntry>& entries() const { return entries_; }

  // Label index reserved for pixels dropped by a binary mask.
  int dropped_label() const { return size(); }

  // Colour for a label; the dropped label renders black.
  Rgb color(int label) const { return label == dropped_label() ? Rgb{0, 0, 0} : entries_.at(label).color; }

  int find(ClassRole role) const {
    for (int k = 0; k < size(); ++k)
      if (entries_[k].role == role) return k;
    return -1;
  }
  bool has(ClassRole role) const { return find(role) >= 0; }

  // Inverse of colour rendering; -1 for colours outside the palette.
  int label_of(const Rgb& c) const {
    for (int k = 0; k < size(); ++k)
      if (entries_[k].color == c) return k;
    return -1;
  }

  nlohmann::json to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& e : entries_) arr.push_back({{"name", e.name}, {"color", {e.color[0], e.color[1], e.color[2]}}});
    return arr;
  }

  static Palette from_json(const nlohmann::json& j) {
    require(j.is_array(), Errc::format, "palette: expected a JSON array");
    std::vector<PaletteEntry> entries;
    for (const auto& e : j) {
      require(e.is_object() && e.contains("name") && e.contains("color"), Errc::format,
              "palette: entries need 'name' and 'color'");
      const auto& c = e.at("color");
      require(c.is_array() && c.size() == 3, Errc::format, "palette: color must be [r,g,b]");
      PaletteEntry pe;
      pe.name = e.at("name").get<std::string>();
      for (int i = 0; i < 3; ++i) {
        int v = c[i].get<int>();
        require(v >= 0 && v <= 255, Errc::format, "palette: color component out of range");
        pe.color[i] = std::uint8_t(v);
      }
      pe.role = role_from_name(pe.name);
      entries.push_back(std::move(pe));
    }
    return Palette(std::move(entries));
  }

  static Palette load(const std::string& path) {
    std::ifstream in(path);
    require(bool(in), Errc::io, "cannot open palette file " + path);
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::format, path + ": " + e.what());
    }
  }

  // Background plus the nine RescueNet object classes (pool omitted).
  static Palette rescuenet() {
    return make({{"background", {0, 0, 0}},
                 {"water", {61, 230, 250}},
                 {"building-no-damage", {180, 120, 120}},
                 {"building-minor-damage", {235, 255, 7}},
                 {"building-major-damage", {255, 184, 6}},
                 {"building-total-destruction", {255, 0, 0}},
                 {"vehicle", {255, 0, 245}},
                 {"road-clear", {140, 140, 140}},
                 {"road-blocked", {160, 150, 20}},
                 {"tree", {4, 250, 7}}});
  }

  static Palette floodnet() {
    return make({{"background", {0, 0, 0}},
                 {"building-flooded", {255, 0, 0}},
                 {"building-non-flooded", {180, 120, 120}},
                 {"road-flooded", {160, 150, 20}},
                 {"road-non-flooded", {140, 140, 140}},
                 {"water", {61, 230, 250}},
                 {"tree", {0, 82, 255}},
                 {"vehicle", {255, 0, 245}},
                 {"pool", {255, 235, 0}},
                 {"grass", {4, 250, 7}}});
  }

  static Palette preset(const std::string& name) {
    if (name == "rescuenet") return rescuenet();
    if (name == "floodnet") return floodnet();
    throw Error(Errc::config, "unknown palette preset '" + name + "'");
  }

 private:
  static Palette make(std::initializer_list<std::pair<const char*, Rgb>> items) {
    std::vector<PaletteEntry> entries;
    for (const auto& [n, c] : items) entries.push_back({n, c, role_from_name(n)});
    return Palette(std::move(entries));
  }

  void validate() const {
    require(!entries_.empty(), Errc::invalid_argument, "palette is empty");
    require(entries_.size() < 255, Errc::invalid_argument, "palette has too many classes");
    std::set<Rgb> seen;
    for (const auto& e : entries_)
      require(seen.insert(e.color).second, Errc::invalid_argument, "palette colour repeated for '" + e.name + "'");
  }

  std::vector<PaletteEntry> entries_;
};

// Renders a label map as a (1, 3, H, W) tensor of palette colours in [0, 1].
template <typename T>
Tensor<T> render_labels(const LabelMap& labels, const Palette& palette) {
  Tensor<T> t(Shape{1, 3, labels.height, labels.width});
  for (int y = 0; y < labels.height; ++y)
    for (int x = 0; x < labels.width; ++x) {
      const Rgb c = palette.color(labels.at(y, x));
      for (int ch = 0; ch < 3; ++ch) t(0, ch, y, x) = T(c[ch]) / T(255);
    }
  return t;
}

inline RgbImage render_labels_rgb(const LabelMap& labels, const Palette& palette) {
  RgbImage img(labels.height, labels.width);
  for (int y = 0; y < labels.height; ++y)
    for (int x = 0; x < labels.width; ++x) {
      const Rgb c = palette.color(labels.at(y, x));
      std::copy(c.begin(), c.end(), img.pixel(y, x));
    }
  return img;
}

}  // namespace semmask
