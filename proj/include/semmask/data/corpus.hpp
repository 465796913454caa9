#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semmask/data/oracles.hpp"
#include "semmask/data/palette.hpp"
#include "semmask/data/png_io.hpp"
#include "semmask/data/types.hpp"
#include "semmask/random.hpp"

namespace semmask {

namespace fs = std::filesystem;

// Seeded 60/20/20 partition of [0, n).
inline CorpusSplit make_split(int n, std::uint64_t seed = 0) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed, 0x5711);
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  const int n_train = int(std::floor(0.6 * n + 1e-9));
  const int n_val = int(std::floor(0.2 * n + 1e-9));
  CorpusSplit s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  s.test.assign(idx.begin() + n_train + n_val, idx.end());
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

struct CorpusLayout {
  int num_classes = 10;
  std::uint64_t split_seed = 0;
  // Used to resolve string answers in qa.jsonl when answers.json is absent.
  AnswerVocabulary vocabulary = AnswerVocabulary::synthetic();
};

struct Corpus {
  std::vector<Sample> samples;
  CorpusSplit split;
};

inline void write_corpus(const fs::path& root, const std::vector<Sample>& samples, const Palette& palette,
                         const AnswerVocabulary& vocab) {
  fs::create_directories(root / "images");
  fs::create_directories(root / "masks");
  std::ofstream qa(root / "qa.jsonl", std::ios::binary);
  std::ofstream labels(root / "labels.csv", std::ios::binary);
  require(bool(qa) && bool(labels), Errc::io, "cannot write corpus metadata under " + root.string());
  labels << "stem,damage\n";
  for (const auto& s : samples) {
    png::write((root / "images" / (s.stem + ".png")).string(), {s.image.height, s.image.width, 3, s.image.data});
    png::write((root / "masks" / (s.stem + ".png")).string(), {s.labels.height, s.labels.width, 1, s.labels.data});
    labels << s.stem << ',' << damage_name(s.damage) << '\n';
    for (const auto& q : s.qa) {
      nlohmann::json rec = {{"stem", s.stem}, {"question_id", q.question_id}, {"question", q.question},
                            {"answer", vocab[q.answer_id]}};
      qa << rec.dump() << '\n';
    }
  }
  std::ofstream(root / "palette.json", std::ios::binary) << palette.to_json().dump(2) << '\n';
  std::ofstream(root / "answers.json", std::ios::binary) << vocab.to_json().dump(2) << '\n';
}

namespace detail {

inline std::vector<std::string> read_split_file(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> stems;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) stems.push_back(line);
  return stems;
}

}  // namespace detail

// Reads images/, masks/, optional qa.jsonl, labels.csv and splits/*.txt.
inline Corpus load_corpus(const fs::path& root, const CorpusLayout& layout) {
  Corpus corpus;
  if (!fs::exists(root / "images")) return corpus;

  AnswerVocabulary vocab = layout.vocabulary;
  if (fs::exists(root / "answers.json")) vocab = AnswerVocabulary::load((root / "answers.json").string());

  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(root / "images"))
    if (e.is_regular_file() && e.path().extension() == ".png") stems.push_back(e.path().stem().string());
  std::sort(stems.begin(), stems.end());

  std::map<std::string, int> index;
  for (const auto& stem : stems) {
    Sample s;
    s.stem = stem;
    const fs::path img_path = root / "images" / (stem + ".png");
    const fs::path mask_path = root / "masks" / (stem + ".png");
    require(fs::exists(mask_path), Errc::io, "missing mask for image " + img_path.string());
    png::Image img = png::read(img_path.string());
    require(img.channels == 3, Errc::format, "expected RGB image: " + img_path.string());
    png::Image mask = png::read(mask_path.string());
    require(mask.channels == 1, Errc::format, "expected single-channel label mask: " + mask_path.string());
    require(mask.height == img.height && mask.width == img.width, Errc::shape_mismatch,
            "mask size differs from image: " + mask_path.string());
    for (auto v : mask.data)
      require(v < layout.num_classes, Errc::format,
              "label value " + std::to_string(v) + " >= " + std::to_string(layout.num_classes) + " in " + mask_path.string());
    s.image = RgbImage(img.height, img.width);
    s.image.data = std::move(img.data);
    s.labels = LabelMap(mask.height, mask.width);
    s.labels.data = std::move(mask.data);
    index[stem] = int(corpus.samples.size());
    corpus.samples.push_back(std::move(s));
  }

  if (const fs::path p = root / "labels.csv"; fs::exists(p)) {
    std::ifstream in(p);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || (lineno == 1 && line.rfind("stem,", 0) == 0)) continue;
      const auto comma = line.find(',');
      require(comma != std::string::npos, Errc::format, p.string() + ":" + std::to_string(lineno) + ": expected stem,damage");
      const std::string stem = line.substr(0, comma);
      auto it = index.find(stem);
      require(it != index.end(), Errc::format, p.string() + ":" + std::to_string(lineno) + ": unknown stem " + stem);
      try {
        corpus.samples[it->second].damage = parse_damage(line.substr(comma + 1));
      } catch (const Error& e) {
        throw Error(Errc::format, p.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }

  if (const fs::path p = root / "qa.jsonl"; fs::exists(p)) {
    std::ifstream in(p);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::string where = p.string() + ":" + std::to_string(lineno);
      try {
        const auto rec = nlohmann::json::parse(line);
        const std::string stem = rec.at("stem").get<std::string>();
        auto it = index.find(stem);
        require(it != index.end(), Errc::format, "unknown stem " + stem);
        QaPair q;
        q.question_id = rec.at("question_id").get<int>();
        q.question = rec.at("question").get<std::string>();
        const auto& a = rec.at("answer");
        q.answer_id = a.is_number_integer() ? a.get<int>() : vocab.id_of(a.get<std::string>());
        require(q.answer_id >= 0 && q.answer_id < vocab.size(), Errc::format, "answer id out of range");
        corpus.samples[it->second].qa.push_back(std::move(q));
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::format, where + ": malformed qa record: " + e.what());
      } catch (const Error& e) {
        throw Error(Errc::format, where + ": malformed qa record: " + e.what());
      }
    }
  }

  const fs::path sd = root / "splits";
  if (fs::exists(sd / "train.txt") && fs::exists(sd / "val.txt") && fs::exists(sd / "test.txt")) {
    auto resolve = [&](const char* name, std::vector<int>& out) {
      for (const auto& stem : detail::read_split_file(sd / name)) {
        auto it = index.find(stem);
        require(it != index.end(), Errc::format, (sd / name).string() + ": unknown stem " + stem);
        out.push_back(it->second);
      }
    };
    resolve("train.txt", corpus.split.train);
    resolve("val.txt", corpus.split.val);
    resolve("test.txt", corpus.split.test);
  } else {
    corpus.split = make_split(int(corpus.samples.size()), layout.split_seed);
  }
  return corpus;
}

}  // namespace semmask
