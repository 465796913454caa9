#include <gtest/gtest.h>

#include "semmask/codec.hpp"
#include "semmask/data/scene.hpp"
#include "semmask/random.hpp"

using namespace semmask;

namespace {

std::size_t count_runs(const LabelMap& m) {
  std::size_t runs = 0;
  for (std::size_t i = 0; i < m.data.size(); ++i)
    if (i == 0 || m.data[i] != m.data[i - 1]) ++runs;
  return runs;
}

LabelMap random_map(Rng& rng) {
  LabelMap m(rng.uniform_int(1, 40), rng.uniform_int(1, 40));
  const int k = rng.uniform_int(1, 12);
  // Mix of short and long runs.
  std::uint8_t cur = 0;
  for (auto& v : m.data) {
    if (rng.bernoulli(0.3)) cur = std::uint8_t(rng.uniform_int(0, k - 1));
    v = cur;
  }
  return m;
}

}  // namespace

TEST(Codec, AllDroppedMapIsTwelveBytes) {
  LabelMap m(96, 96, 10);
  const EncodedMask e = encode_label_map(m, 11);
  EXPECT_EQ(e.size(), 12u);
  EXPECT_EQ(label_map_payload(m, ArtifactKind::masked_map, 11).size_bits, 96u);
}

TEST(Codec, AllZerosIsTwelveBytes) { EXPECT_EQ(encode_label_map(LabelMap(96, 96, 0)).size(), 12u); }

TEST(Codec, AlternatingRowWorstCase) {
  LabelMap m(1, 8);
  for (int x = 0; x < 8; ++x) m.data[x] = std::uint8_t(x % 2);
  EXPECT_EQ(encode_label_map(m).size(), 7u + 40u);
}

TEST(Codec, HeaderLayout) {
  LabelMap m(3, 258, 2);
  const auto b = encode_label_map(m, 5).bytes;
  ASSERT_GE(b.size(), 12u);
  EXPECT_EQ(b[0], 'S');
  EXPECT_EQ(b[1], '1');
  EXPECT_EQ(b[2], 2);  // width 258 little-endian
  EXPECT_EQ(b[3], 1);
  EXPECT_EQ(b[4], 3);
  EXPECT_EQ(b[5], 0);
  EXPECT_EQ(b[6], 5);
  EXPECT_EQ(b[7], 2);
  EXPECT_EQ(b[8], 0x06);  // 774 = 0x0306
  EXPECT_EQ(b[9], 0x03);
}

TEST(Codec, RandomRoundTripAndSizeOracle) {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const LabelMap m = random_map(rng);
    const EncodedMask e = encode_label_map(m);
    ASSERT_EQ(decode_label_map(e), m) << "map " << i;
    ASSERT_EQ(e.size(), kCodecHeaderBytes + kCodecRunBytes * count_runs(m));
  }
}

TEST(Codec, GeneratedScenesRoundTrip) {
  SceneConfig cfg;
  for (const auto& s : generate_corpus(5, 7, cfg)) {
    const EncodedMask e = encode_label_map(s.labels, 11);
    EXPECT_EQ(decode_label_map(e), s.labels);
    EXPECT_EQ(e.size(), kCodecHeaderBytes + kCodecRunBytes * count_runs(s.labels));
  }
}

TEST(Codec, SizeInvariantUnderRelabelling) {
  Rng rng(5);
  const LabelMap m = random_map(rng);
  LabelMap renamed = m;
  for (auto& v : renamed.data) v = std::uint8_t(20 - v);
  EXPECT_EQ(encode_label_map(m, 30).size(), encode_label_map(renamed, 30).size());
}

TEST(Codec, RejectsOverflowAndCorruptInput) {
  EXPECT_THROW(encode_label_map(LabelMap(1, 70000, 0)), Error);
  EXPECT_THROW(encode_label_map(LabelMap(2, 2, 255)), Error);
  EXPECT_THROW(encode_label_map(LabelMap(2, 2, 4), 3), Error);
  EncodedMask e = encode_label_map(LabelMap(4, 4, 1));
  e.bytes.pop_back();
  EXPECT_THROW(decode_label_map(e), Error);
  e = encode_label_map(LabelMap(4, 4, 1));
  e.bytes[8] = 17;  // run longer than the map
  EXPECT_THROW(decode_label_map(e), Error);
  e = encode_label_map(LabelMap(4, 4, 1));
  e.bytes[0] = 'X';
  try {
    decode_label_map(e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::format);
  }
}

TEST(Payload, RawImageBits) { EXPECT_EQ(raw_image_payload(96, 96).size_bits, 221184u); }

TEST(Payload, ClassSubsetMasksNeverExceedFullMapPlusOneRun) {
  SceneConfig cfg;
  Rng rng(3);
  for (const auto& s : generate_corpus(30, 11, cfg)) {
    // Keep a random subset of classes; drop the rest.
    std::vector<bool> keep(10);
    for (auto&& k : keep) k = rng.bernoulli(0.4);
    LabelMap masked = s.labels;
    bool dropped_any = false;
    for (auto& v : masked.data)
      if (!keep[v]) v = 10, dropped_any = true;
    const auto full = label_map_payload(s.labels, ArtifactKind::rgb_mask, 11).size_bits;
    const auto part = label_map_payload(masked, ArtifactKind::masked_map, 11).size_bits;
    EXPECT_LE(part, full + 40);
    if (dropped_any && count_runs(masked) < count_runs(s.labels)) EXPECT_LT(part, full);
  }
}
