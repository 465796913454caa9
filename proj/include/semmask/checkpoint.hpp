#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "semmask/error.hpp"
#include "semmask/nn/layers.hpp"

namespace semmask {

// Binary container; layout documented in docs/checkpoint_format.md.
struct Checkpoint {
  static constexpr char kMagic[4] = {'S', 'M', 'C', 'K'};
  static constexpr std::uint32_t kVersion = 1;

  struct Array {
    Shape shape;
    std::vector<double> data;
  };

  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, Array> arrays;

  bool has(const std::string& name) const { return arrays.count(name) > 0; }
};

template <typename T>
void store_module(Checkpoint& ck, const std::string& ns, nn::Module<T>& m) {
  for (auto& [name, p] : m.named_params())
    ck.arrays[ns + "/" + name] = {p->value.shape(), std::vector<double>(p->value.vec().begin(), p->value.vec().end())};
}

template <typename T>
void load_module(const Checkpoint& ck, const std::string& ns, nn::Module<T>& m) {
  for (auto& [name, p] : m.named_params()) {
    const std::string key = ns + "/" + name;
    auto it = ck.arrays.find(key);
    require(it != ck.arrays.end(), Errc::format, "checkpoint: missing array " + key);
    require(it->second.shape == p->value.shape(), Errc::shape_mismatch,
            "checkpoint: " + key + " has shape " + it->second.shape.str() + ", model expects " + p->value.shape().str());
    for (std::size_t i = 0; i < it->second.data.size(); ++i) p->value[i] = T(it->second.data[i]);
  }
}

namespace detail {

template <typename V>
void put(std::ostream& os, V v) {
  unsigned char b[sizeof(V)];
  std::memcpy(b, &v, sizeof(V));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(V));
  os.write(reinterpret_cast<const char*>(b), sizeof(V));
}

template <typename V>
V get(std::istream& is, const std::string& path) {
  unsigned char b[sizeof(V)];
  is.read(reinterpret_cast<char*>(b), sizeof(V));
  require(bool(is), Errc::format, path + ": truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(V));
  V v;
  std::memcpy(&v, b, sizeof(V));
  return v;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary);
  require(bool(os), Errc::io, path + ": cannot open for writing");
  os.write(Checkpoint::kMagic, 4);
  detail::put<std::uint32_t>(os, Checkpoint::kVersion);
  const std::string cfg = ck.config.dump();
  detail::put<std::uint64_t>(os, cfg.size());
  os.write(cfg.data(), std::streamsize(cfg.size()));
  detail::put<std::uint32_t>(os, std::uint32_t(ck.arrays.size()));
  for (const auto& [name, a] : ck.arrays) {
    detail::put<std::uint32_t>(os, std::uint32_t(name.size()));
    os.write(name.data(), std::streamsize(name.size()));
    for (int d : {a.shape.n, a.shape.c, a.shape.h, a.shape.w}) detail::put<std::int32_t>(os, d);
    for (double v : a.data) detail::put<double>(os, v);
  }
  require(bool(os), Errc::io, path + ": write failed");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), Errc::io, path + ": cannot open checkpoint");
  char magic[4];
  is.read(magic, 4);
  require(bool(is) && std::memcmp(magic, Checkpoint::kMagic, 4) == 0, Errc::format, path + ": not a checkpoint");
  const auto version = detail::get<std::uint32_t>(is, path);
  require(version == Checkpoint::kVersion, Errc::format, path + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  std::string cfg(detail::get<std::uint64_t>(is, path), '\0');
  is.read(cfg.data(), std::streamsize(cfg.size()));
  require(bool(is), Errc::format, path + ": truncated config");
  try {
    ck.config = nlohmann::json::parse(cfg);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, path + ": bad embedded config: " + e.what());
  }
  const auto count = detail::get<std::uint32_t>(is, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(detail::get<std::uint32_t>(is, path), '\0');
    is.read(name.data(), std::streamsize(name.size()));
    Checkpoint::Array a;
    a.shape.n = detail::get<std::int32_t>(is, path);
    a.shape.c = detail::get<std::int32_t>(is, path);
    a.shape.h = detail::get<std::int32_t>(is, path);
    a.shape.w = detail::get<std::int32_t>(is, path);
    require(a.shape.n >= 0 && a.shape.c >= 0 && a.shape.h >= 0 && a.shape.w >= 0, Errc::format, path + ": negative dims");
    a.data.resize(a.shape.size());
    for (auto& v : a.data) v = detail::get<double>(is, path);
    ck.arrays.emplace(std::move(name), std::move(a));
  }
  return ck;
}

}  // namespace semmask
