#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "semmask/data/types.hpp"
#include "semmask/error.hpp"

namespace semmask {

// Run-length label-map container:
//   magic "S1" | width u16 LE | height u16 LE | num_labels u8
//   then row-major runs of (label u8, length u32 LE), each run maximal.
inline constexpr std::array<std::uint8_t, 2> kCodecMagic{'S', '1'};
inline constexpr std::size_t kCodecHeaderBytes = 7;
inline constexpr std::size_t kCodecRunBytes = 5;

struct EncodedMask {
  std::vector<std::uint8_t> bytes;

  std::size_t size() const { return bytes.size(); }
  std::uint64_t bits() const { return std::uint64_t(bytes.size()) * 8; }
};

namespace detail {

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

inline std::uint64_t get_le(const std::vector<std::uint8_t>& in, std::size_t at, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= std::uint64_t(in[at + i]) << (8 * i);
  return v;
}

}  // namespace detail

// num_labels is the label alphabet size stored in the header; every label in
// the map must be below it. By default it is inferred as max label + 1.
inline EncodedMask encode_label_map(const LabelMap& m, int num_labels = -1) {
  require(m.height > 0 && m.width > 0 && m.height < 65536 && m.width < 65536, Errc::invalid_argument,
          "encode: dimensions must be in [1, 65535], got " + std::to_string(m.height) + "x" + std::to_string(m.width));
  require(m.data.size() == std::size_t(m.height) * m.width, Errc::shape_mismatch, "encode: label buffer size mismatch");
  int max_label = 0;
  for (auto v : m.data) max_label = std::max<int>(max_label, v);
  require(max_label < 255, Errc::invalid_argument, "encode: label " + std::to_string(max_label) + " exceeds 254");
  if (num_labels < 0) num_labels = max_label + 1;
  require(num_labels > max_label && num_labels <= 255, Errc::invalid_argument, "encode: num_labels too small for map");

  EncodedMask e;
  e.bytes.assign(kCodecMagic.begin(), kCodecMagic.end());
  detail::put_le(e.bytes, std::uint64_t(m.width), 2);
  detail::put_le(e.bytes, std::uint64_t(m.height), 2);
  e.bytes.push_back(std::uint8_t(num_labels));
  std::size_t i = 0;
  while (i < m.data.size()) {
    std::size_t j = i + 1;
    while (j < m.data.size() && m.data[j] == m.data[i]) ++j;
    e.bytes.push_back(m.data[i]);
    detail::put_le(e.bytes, j - i, 4);
    i = j;
  }
  return e;
}

struct DecodedMask {
  LabelMap labels;
  int num_labels = 0;
};

inline DecodedMask decode_label_map_full(const EncodedMask& e) {
  const auto& b = e.bytes;
  require(b.size() >= kCodecHeaderBytes && b[0] == kCodecMagic[0] && b[1] == kCodecMagic[1], Errc::format,
          "decode: bad header");
  DecodedMask d;
  d.labels.width = int(detail::get_le(b, 2, 2));
  d.labels.height = int(detail::get_le(b, 4, 2));
  d.num_labels = b[6];
  require((b.size() - kCodecHeaderBytes) % kCodecRunBytes == 0, Errc::format, "decode: truncated run");
  const std::size_t total = std::size_t(d.labels.width) * d.labels.height;
  d.labels.data.reserve(total);
  for (std::size_t at = kCodecHeaderBytes; at < b.size(); at += kCodecRunBytes) {
    const std::uint8_t label = b[at];
    const std::uint64_t len = detail::get_le(b, at + 1, 4);
    require(len > 0 && label < d.num_labels, Errc::format, "decode: invalid run");
    require(d.labels.data.size() + len <= total, Errc::format, "decode: runs overflow the header dimensions");
    d.labels.data.insert(d.labels.data.end(), len, label);
  }
  require(d.labels.data.size() == total, Errc::format, "decode: runs do not cover the header dimensions");
  return d;
}

inline LabelMap decode_label_map(const EncodedMask& e) { return decode_label_map_full(e).labels; }

enum class ArtifactKind { raw_image, rgb_mask, masked_map };

inline std::string artifact_name(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::raw_image: return "raw_image";
    case ArtifactKind::rgb_mask: return "rgb_mask";
    case ArtifactKind::masked_map: return "masked_map";
  }
  return "?";
}

struct Payload {
  std::uint64_t size_bits = 0;
  std::string description;
};

inline Payload raw_image_payload(int height, int width) {
  require(height >= 0 && width >= 0, Errc::invalid_argument, "payload: negative dimensions");
  return {std::uint64_t(height) * std::uint64_t(width) * 3 * 8, "raw_image"};
}

// Semantic masks (full or masked) are sized by their run-length encoding.
inline Payload label_map_payload(const LabelMap& m, ArtifactKind kind = ArtifactKind::rgb_mask, int num_labels = -1) {
  return {encode_label_map(m, num_labels).bits(), artifact_name(kind)};
}

}  // namespace semmask
