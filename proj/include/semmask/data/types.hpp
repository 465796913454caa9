#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "semmask/error.hpp"
#include "semmask/tensor.hpp"

namespace semmask {

// Row-major per-pixel class indices.
struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  LabelMap() = default;
  LabelMap(int h, int w, std::uint8_t fill = 0) : height(h), width(w), data(std::size_t(h) * w, fill) {}

  std::uint8_t& at(int y, int x) { return data[std::size_t(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return data[std::size_t(y) * width + x]; }
  std::size_t size() const { return data.size(); }
  bool operator==(const LabelMap&) const = default;
};

// 8-bit interleaved RGB; channel values map to [0, 1] by division by 255.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int h, int w) : height(h), width(w), data(std::size_t(h) * w * 3, 0) {}

  std::uint8_t* pixel(int y, int x) { return &data[(std::size_t(y) * width + x) * 3]; }
  const std::uint8_t* pixel(int y, int x) const { return &data[(std::size_t(y) * width + x) * 3]; }
  bool operator==(const RgbImage&) const = default;

  template <typename T>
  Tensor<T> to_tensor() const {
    Tensor<T> t(Shape{1, 3, height, width});
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        for (int c = 0; c < 3; ++c) t(0, c, y, x) = T(pixel(y, x)[c]) / T(255);
    return t;
  }
};

enum class DamageClass : int { Superficial = 0, Medium = 1, Major = 2 };

inline constexpr int kNumDamageClasses = 3;

inline std::string damage_name(DamageClass d) {
  switch (d) {
    case DamageClass::Superficial: return "Superficial";
    case DamageClass::Medium: return "Medium";
    case DamageClass::Major: return "Major";
  }
  return "?";
}

inline DamageClass parse_damage(const std::string& s) {
  if (s == "Superficial" || s == "0") return DamageClass::Superficial;
  if (s == "Medium" || s == "1") return DamageClass::Medium;
  if (s == "Major" || s == "2") return DamageClass::Major;
  throw Error(Errc::format, "unknown damage class '" + s + "'");
}

struct QaPair {
  int question_id = 0;
  std::string question;
  int answer_id = 0;
  bool operator==(const QaPair&) const = default;
};

struct Sample {
  std::string stem;
  RgbImage image;
  LabelMap labels;
  DamageClass damage = DamageClass::Superficial;
  std::vector<QaPair> qa;
  bool operator==(const Sample&) const = default;
};

struct CorpusSplit {
  std::vector<int> train, val, test;
};

}  // namespace semmask
