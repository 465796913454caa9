#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semmask/data/palette.hpp"
#include "semmask/data/types.hpp"

namespace semmask {

enum class QuestionKind { count, presence, condition };

inline std::string kind_name(QuestionKind k) {
  switch (k) {
    case QuestionKind::count: return "count";
    case QuestionKind::presence: return "presence";
    case QuestionKind::condition: return "condition";
  }
  return "?";
}

inline QuestionKind parse_kind(const std::string& s) {
  if (s == "count") return QuestionKind::count;
  if (s == "presence") return QuestionKind::presence;
  if (s == "condition") return QuestionKind::condition;
  throw Error(Errc::config, "unknown question kind '" + s + "'");
}

struct QuestionTemplate {
  int id = 0;
  QuestionKind kind = QuestionKind::presence;
  int target_class = -1;  // unused for condition questions
  std::string text;
};

// The closed question set for a palette: count and presence questions for
// every non-background class, plus an overall-condition question when the
// palette distinguishes flooded from non-flooded structures.
class QuestionSet {
 public:
  QuestionSet() = default;
  explicit QuestionSet(const Palette& palette) {
    for (int k = 0; k < palette.size(); ++k) {
      if (palette[k].role == ClassRole::background) continue;
      const std::string name = spaced(palette[k].name);
      add(QuestionKind::count, k, "how many " + name + " regions are there");
      add(QuestionKind::presence, k, "is there any " + name);
    }
    if (palette.has(ClassRole::building_flooded) || palette.has(ClassRole::road_flooded))
      add(QuestionKind::condition, -1, "what is the overall condition of the scene");
  }

  int size() const { return int(items_.size()); }
  const std::vector<QuestionTemplate>& items() const { return items_; }

  const QuestionTemplate& at(int id) const {
    if (id < 0 || id >= size()) throw Error(Errc::unknown_question, "unknown question id " + std::to_string(id));
    return items_[id];
  }

  int find(const std::string& text) const {
    const std::string norm = normalize(text);
    for (const auto& q : items_)
      if (q.text == norm) return q.id;
    throw Error(Errc::unknown_question, "question not in template set: '" + text + "'");
  }

  std::vector<int> ids_of(const std::vector<QuestionKind>& kinds) const {
    std::vector<int> out;
    for (const auto& q : items_)
      if (std::find(kinds.begin(), kinds.end(), q.kind) != kinds.end()) out.push_back(q.id);
    return out;
  }

  // Lower-case words with punctuation stripped.
  static std::string normalize(const std::string& text) {
    std::string out;
    bool space = false;
    for (char ch : text) {
      const unsigned char c = static_cast<unsigned char>(ch);
      if (std::isalnum(c)) {
        if (space && !out.empty()) out += ' ';
        out += char(std::tolower(c));
        space = false;
      } else {
        space = true;
      }
    }
    return out;
  }

 private:
  static std::string spaced(std::string s) {
    std::replace(s.begin(), s.end(), '-', ' ');
    return s;
  }

  void add(QuestionKind kind, int cls, const std::string& text) {
    items_.push_back({int(items_.size()), kind, cls, normalize(text)});
  }

  std::vector<QuestionTemplate> items_;
};

class AnswerVocabulary {
 public:
  AnswerVocabulary() = default;
  explicit AnswerVocabulary(std::vector<std::string> answers) : answers_(std::move(answers)) {
    for (std::size_t i = 0; i < answers_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        require(answers_[i] != answers_[j], Errc::invalid_argument, "duplicate answer '" + answers_[i] + "'");
    for (const auto& a : answers_)
      if (!a.empty() && std::all_of(a.begin(), a.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        max_count_ = std::max(max_count_, std::stoi(a));
  }

  // no, yes, 0..10, flooded, non-flooded.
  static AnswerVocabulary synthetic() {
    std::vector<std::string> a = {"no", "yes"};
    for (int i = 0; i <= 10; ++i) a.push_back(std::to_string(i));
    a.push_back("flooded");
    a.push_back("non-flooded");
    return AnswerVocabulary(std::move(a));
  }

  int size() const { return int(answers_.size()); }
  const std::string& operator[](int id) const { return answers_.at(id); }
  const std::vector<std::string>& answers() const { return answers_; }
  int max_count() const { return max_count_; }

  int id_of(const std::string& answer) const {
    for (int i = 0; i < size(); ++i)
      if (answers_[i] == answer) return i;
    throw Error(Errc::invalid_argument, "answer '" + answer + "' not in vocabulary");
  }

  nlohmann::json to_json() const { return answers_; }
  static AnswerVocabulary from_json(const nlohmann::json& j) {
    require(j.is_array(), Errc::format, "answer vocabulary must be a JSON list");
    return AnswerVocabulary(j.get<std::vector<std::string>>());
  }
  static AnswerVocabulary load(const std::string& path) {
    std::ifstream in(path);
    require(bool(in), Errc::io, "cannot open answer vocabulary " + path);
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::format, path + ": " + e.what());
    }
  }

 private:
  std::vector<std::string> answers_;
  int max_count_ = -1;
};

// Number of 4-connected components of pixels labelled `cls`.
inline int count_components(const LabelMap& labels, int cls) {
  std::vector<int> seen(labels.size(), 0);
  std::vector<std::pair<int, int>> stack;
  int count = 0;
  for (int y = 0; y < labels.height; ++y)
    for (int x = 0; x < labels.width; ++x) {
      const std::size_t i = std::size_t(y) * labels.width + x;
      if (labels.data[i] != cls || seen[i]) continue;
      ++count;
      seen[i] = 1;
      stack.push_back({y, x});
      while (!stack.empty()) {
        auto [cy, cx] = stack.back();
        stack.pop_back();
        const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
          const int ny = cy + dy[d], nx = cx + dx[d];
          if (ny < 0 || nx < 0 || ny >= labels.height || nx >= labels.width) continue;
          const std::size_t j = std::size_t(ny) * labels.width + nx;
          if (labels.data[j] == cls && !seen[j]) {
            seen[j] = 1;
            stack.push_back({ny, nx});
          }
        }
      }
    }
  return count;
}

inline std::vector<std::size_t> class_histogram(const LabelMap& labels, int num_labels) {
  std::vector<std::size_t> h(num_labels, 0);
  for (auto v : labels.data)
    if (v < num_labels) ++h[v];
  return h;
}

inline int answer_oracle(const LabelMap& labels, int question_id, const QuestionSet& questions,
                         const Palette& palette, const AnswerVocabulary& vocab) {
  const QuestionTemplate& q = questions.at(question_id);
  switch (q.kind) {
    case QuestionKind::count: {
      const int n = count_components(labels, q.target_class);
      return vocab.id_of(std::to_string(std::min(n, vocab.max_count())));
    }
    case QuestionKind::presence: {
      const bool present = std::find(labels.data.begin(), labels.data.end(), q.target_class) != labels.data.end();
      return vocab.id_of(present ? "yes" : "no");
    }
    case QuestionKind::condition: {
      const auto hist = class_histogram(labels, palette.size());
      std::size_t flooded = 0, dry = 0;
      for (int k = 0; k < palette.size(); ++k) {
        const ClassRole r = palette[k].role;
        if (r == ClassRole::building_flooded || r == ClassRole::road_flooded || r == ClassRole::water) flooded += hist[k];
        if (r == ClassRole::building_intact || r == ClassRole::road_clear || r == ClassRole::grass) dry += hist[k];
      }
      return vocab.id_of(flooded > dry ? "flooded" : "non-flooded");
    }
  }
  throw Error(Errc::unknown_question, "unhandled question kind");
}

struct DamageThresholds {
  double debris_fraction = 0.5;
};

// Superficial: no damaged-building pixels. Major: any totally destroyed
// building, or debris covering at least the threshold fraction. Medium otherwise.
inline DamageClass damage_oracle(const LabelMap& labels, const Palette& palette, DamageThresholds th = {}) {
  const auto hist = class_histogram(labels, palette.size());
  auto pixels = [&](ClassRole role) {
    const int k = palette.find(role);
    return k < 0 ? std::size_t(0) : hist[k];
  };
  const std::size_t minor = pixels(ClassRole::building_minor);
  const std::size_t major = pixels(ClassRole::building_major);
  const std::size_t destroyed = pixels(ClassRole::building_destroyed);
  const std::size_t debris = major + destroyed + pixels(ClassRole::road_blocked);
  if (minor + major + destroyed == 0) return DamageClass::Superficial;
  if (destroyed > 0) return DamageClass::Major;
  if (double(debris) / double(labels.size()) >= th.debris_fraction) return DamageClass::Major;
  return DamageClass::Medium;
}

}  // namespace semmask
