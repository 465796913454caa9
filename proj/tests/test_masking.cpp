#include <gtest/gtest.h>

#include "semmask/downstream.hpp"
#include "semmask/masking.hpp"
#include "semmask/training.hpp"
#include "support.hpp"

using namespace semmask;
using semmask::testing::check_param_grads;
using semmask::testing::random_tensor;

TEST(Gumbel, ZeroLogitKeepsHalf) {
  Rng rng(42);
  Tensor<double> z(Shape{1, 1, 100, 100});
  const auto b = gumbel_binary(z, 1.0, MaskMode::hard, rng);
  EXPECT_NEAR(b.density(), 0.5, 0.02);
}

TEST(Gumbel, SaturatedLogitsAreDeterministic) {
  Rng rng(1);
  Tensor<double> hi(Shape{1, 1, 64, 64}, 20.0), lo(Shape{1, 1, 64, 64}, -20.0);
  EXPECT_EQ(gumbel_binary(hi, 0.1, MaskMode::hard, rng).density(), 1.0);
  EXPECT_EQ(gumbel_binary(lo, 0.1, MaskMode::hard, rng).density(), 0.0);
}

TEST(Gumbel, RangesAndArgmaxAgreement) {
  Rng data(2);
  auto z = random_tensor<double>(Shape{2, 1, 16, 16}, data, -3, 3);
  Rng a(9), b(9);
  const auto soft = gumbel_binary(z, 0.5, MaskMode::soft, a);
  const auto hard = gumbel_binary(z, 0.5, MaskMode::hard, b);
  for (std::size_t i = 0; i < z.size(); ++i) {
    EXPECT_GE(soft.values[i], 0.0);
    EXPECT_LE(soft.values[i], 1.0);
    EXPECT_TRUE(hard.values[i] == 0.0 || hard.values[i] == 1.0);
    EXPECT_EQ(hard.values[i] == 1.0, soft.values[i] >= 0.5);
  }
}

TEST(Gumbel, DeterministicGivenSeedAndRejectsBadTemperature) {
  Rng data(3);
  auto z = random_tensor<double>(Shape{1, 1, 8, 8}, data);
  Rng a(5), b(5);
  EXPECT_EQ(gumbel_binary(z, 1.0, MaskMode::soft, a).values, gumbel_binary(z, 1.0, MaskMode::soft, b).values);
  EXPECT_THROW(gumbel_binary(z, 0.0, MaskMode::soft, a), Error);
  EXPECT_THROW(gumbel_binary(z, -1.0, MaskMode::hard, a), Error);
}

TEST(Gumbel, StraightThroughMatchesSoftPath) {
  Rng rng(4);
  MaskPredictor<double> mp(MaskPredictorConfig{.widths = {4, 3, 2}}, rng);
  auto x = random_tensor<double>(Shape{2, 3, 3, 3}, rng, 0, 1);
  auto upstream = random_tensor<double>(Shape{2, 1, 24, 24}, rng);
  auto grads = [&](MaskMode mode) {
    Rng noise(77);
    BinaryGate<double> gate;
    mp.zero_grad();
    gate.forward(mp.forward(x, 24, 24), 0.5, mode, GateNoise::sampled, noise);
    const Tensor<double> g = gate.backward(upstream);
    mp.backward(g);
    std::vector<double> out(g.vec());
    for (auto* p : mp.trainable_params()) out.insert(out.end(), p->grad.vec().begin(), p->grad.vec().end());
    return out;
  };
  const auto h = grads(MaskMode::hard), s = grads(MaskMode::soft);
  ASSERT_EQ(h.size(), s.size());
  // gate gradients bit-identical; parameter gradients up to GEMM summation order
  for (std::size_t i = 0; i < upstream.size(); ++i) ASSERT_EQ(h[i], s[i]) << i;
  for (std::size_t i = upstream.size(); i < h.size(); ++i) ASSERT_NEAR(h[i], s[i], 1e-12 * (1 + std::abs(s[i]))) << i;
}

TEST(Temperature, ExponentialAnneal) {
  MaskPredictorConfig c;
  EXPECT_DOUBLE_EQ(temperature(c, 0, 100), 1.0);
  EXPECT_NEAR(temperature(c, 100, 100), 0.1, 1e-15);
  EXPECT_NEAR(temperature(c, 50, 100), std::sqrt(0.1), 1e-15);
  EXPECT_NEAR(temperature(c, 500, 100), 0.1, 1e-15);
}

TEST(MaskPredictor, ShapeContract) {
  Rng rng(5);
  MaskPredictorConfig cfg;
  MaskPredictor<float> mp(cfg, rng);
  Tensor<float> rgb(Shape{1, 3, 96, 96}, 0.3f);
  const auto in = predictor_input(rgb, cfg);
  EXPECT_EQ(in.shape(), (Shape{1, 3, 12, 12}));
  EXPECT_EQ(mp.forward(in, 96, 96).shape(), (Shape{1, 1, 96, 96}));
  EXPECT_THROW(mp.forward(Tensor<float>(Shape{1, 4, 12, 12}), 96, 96), Error);
}

TEST(MaskPredictor, FullResolutionGeometryResizesBack) {
  Rng rng(6);
  MaskPredictorConfig cfg{.widths = {4, 4, 4}, .geometry = MaskGeometry::full_resolution};
  MaskPredictor<double> mp(cfg, rng);
  // zero biases put dead ReLU regions exactly on the kink
  for (auto& [name, p] : mp.named_params())
    if (name.ends_with("bias")) p->value = random_tensor<double>(p->value.shape(), rng, 0.05, 0.2);
  auto rgb = random_tensor<double>(Shape{1, 3, 8, 8}, rng, 0, 1);
  const auto in = predictor_input(rgb, cfg);
  EXPECT_EQ(in.shape(), rgb.shape());
  const auto z = mp.forward(in, 8, 8);
  EXPECT_EQ(z.shape(), (Shape{1, 1, 8, 8}));
  auto up = random_tensor<double>(z.shape(), rng);
  mp.zero_grad();
  mp.backward(up);
  const auto gc = check_param_grads(mp, [&] { return semmask::testing::dot(mp.forward(in, 8, 8), up); }, 4);
  EXPECT_LT(gc.max_rel, 1e-4) << gc.worst;
}

TEST(MaskPredictor, ZeroWeightsGiveHalfMask) {
  Rng rng(7);
  MaskPredictor<double> mp(MaskPredictorConfig{}, rng);
  for (auto* p : mp.trainable_params()) p->value.zero();
  Rng data(1);
  const auto z = mp.forward(random_tensor<double>(Shape{1, 3, 12, 12}, data, 0, 1), 96, 96);
  for (auto v : z.vec()) ASSERT_EQ(v, 0.0);
  for (double tau : {0.1, 1.0, 3.0}) {
    Rng noise(1);
    const auto b = gumbel_binary(z, tau, MaskMode::soft, noise, GateNoise::none);
    for (auto v : b.values.vec()) ASSERT_EQ(v, 0.5);
  }
}

TEST(ApplyMask, IdentityNullAndCheckerboard) {
  const Palette pal = Palette::rescuenet();
  LabelMap labels(4, 6, 2);
  labels.at(1, 1) = 5;
  const auto m = SemanticMask<double>::from_labels(labels, pal);
  BinaryMask<double> ones{Tensor<double>(Shape{1, 1, 4, 6}, 1.0), MaskMode::hard};
  const auto same = apply_mask(m, ones);
  EXPECT_EQ(same.rgb, m.rgb);
  EXPECT_EQ(same.labels, labels);

  BinaryMask<double> zeros{Tensor<double>(Shape{1, 1, 4, 6}, 0.0), MaskMode::hard};
  const auto none = apply_mask(m, zeros);
  for (auto v : none.rgb.vec()) EXPECT_EQ(v, 0.0);
  for (auto v : none.labels.data) EXPECT_EQ(v, 10);

  Tensor<double> red(Shape{1, 3, 4, 6});
  for (int i = 0; i < 24; ++i) red.plane(0, 0)[i] = 1.0;
  BinaryMask<double> checker{Tensor<double>(Shape{1, 1, 4, 6}), MaskMode::hard};
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) checker.values(0, 0, y, x) = (x + y) % 2;
  const auto y = apply_mask(SemanticMask<double>{{}, labels, red, 10}, checker);
  for (int yy = 0; yy < 4; ++yy)
    for (int x = 0; x < 6; ++x) {
      EXPECT_EQ(y.rgb(0, 0, yy, x), (x + yy) % 2 ? 1.0 : 0.0);
      EXPECT_EQ(y.rgb(0, 1, yy, x), 0.0);
      EXPECT_EQ(y.labels.at(yy, x), (x + yy) % 2 ? labels.at(yy, x) : 10);
    }
  const auto twice = apply_mask(y.as_mask(), checker);
  EXPECT_EQ(twice.rgb, y.rgb);
  EXPECT_EQ(twice.labels, y.labels);
  EXPECT_THROW(apply_mask(m, BinaryMask<double>{Tensor<double>(Shape{1, 1, 4, 5}), MaskMode::hard}), Error);
}

// End-to-end: total loss through the soft Gumbel mask into the mask
// predictor and classifier weights on a 2-class 24x24 toy.
TEST(EndToEnd, JointLossGradientsMatchFiniteDifferences) {
  Rng rng(8);
  const Palette pal = Palette::rescuenet();
  MaskPredictorConfig mcfg{.widths = {4, 3, 2}};
  MaskPredictor<double> mp(mcfg, rng);
  ClassifierConfig ccfg{.backbone = {.stem_channels = 3, .widths = {4}, .stem_stride = 2}, .dropout = 0.0,
                        .num_classes = 2};
  DamageClassifier<double> head(ccfg, rng);
  head.set_training(true);

  std::vector<SemanticMask<double>> masks;
  std::vector<std::vector<TaskItem>> items;
  for (int i = 0; i < 3; ++i) {
    LabelMap l(24, 24, 0);
    for (int y = 4 + i; y < 14 + i; ++y)
      for (int x = 3 * i; x < 10 + 3 * i; ++x) l.at(y, x) = std::uint8_t(2 + i);
    masks.push_back(SemanticMask<double>::from_labels(l, pal));
    items.push_back({{-1, i % 2, "c"}});
  }
  const auto data = make_task_data(masks, items, mcfg);
  const std::vector<int> batch{0, 1, 2};
  const LossWeights w{0.7, 1.3};
  auto loss = [&] {
    Rng noise(11);
    return joint_loss<double>(&mp, head, data, batch, w, 0.5, noise, MaskMode::soft, false).total;
  };
  Rng noise(11);
  mp.zero_grad();
  head.zero_grad();
  const auto sl = joint_loss<double>(&mp, head, data, batch, w, 0.5, noise, MaskMode::soft, true);
  EXPECT_NEAR(sl.total, 0.7 * sl.sparsity + 1.3 * sl.categorical, 1e-15);
  const auto gp = check_param_grads(mp, loss, 6);
  EXPECT_LT(gp.max_rel, 1e-4) << gp.worst;
  const auto gh = check_param_grads(head, loss, 4);
  EXPECT_LT(gh.max_rel, 1e-4) << gh.worst;
}
