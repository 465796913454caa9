#include <gtest/gtest.h>

#include "semmask/nn/adam.hpp"
#include "semmask/nn/blocks.hpp"
#include "semmask/nn/loss.hpp"
#include "support.hpp"

using namespace semmask;
using semmask::testing::check_input_grad;
using semmask::testing::check_param_grads;
using semmask::testing::dot;
using semmask::testing::random_tensor;

namespace {

// Direct convolution; weight (out, in, k, k).
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>* b,
                          const nn::ConvGeometry& g) {
  const int ho = g.out_size(x.h()), wo = g.out_size(x.w());
  Tensor<double> y(x.n(), w.n(), ho, wo);
  for (int n = 0; n < x.n(); ++n)
    for (int o = 0; o < w.n(); ++o)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          double s = b ? (*b)[o] : 0.0;
          for (int c = 0; c < x.c(); ++c)
            for (int ky = 0; ky < g.kernel; ++ky)
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int iy = oy * g.stride - g.pad + ky * g.dilation;
                const int ix = ox * g.stride - g.pad + kx * g.dilation;
                if (iy >= 0 && ix >= 0 && iy < x.h() && ix < x.w()) s += x(n, c, iy, ix) * w(o, c, ky, kx);
              }
          y(n, o, oy, ox) = s;
        }
  return y;
}

// Scatter form of the transposed convolution; weight (in, out, k, k).
Tensor<double> naive_deconv(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b,
                            const nn::ConvGeometry& g) {
  const int ho = (x.h() - 1) * g.stride - 2 * g.pad + g.kernel;
  const int wo = (x.w() - 1) * g.stride - 2 * g.pad + g.kernel;
  Tensor<double> y(x.n(), w.c(), ho, wo);
  for (int n = 0; n < x.n(); ++n)
    for (int o = 0; o < w.c(); ++o)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) y(n, o, oy, ox) = b[o];
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c)
      for (int iy = 0; iy < x.h(); ++iy)
        for (int ix = 0; ix < x.w(); ++ix)
          for (int o = 0; o < w.c(); ++o)
            for (int ky = 0; ky < g.kernel; ++ky)
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int oy = iy * g.stride - g.pad + ky, ox = ix * g.stride - g.pad + kx;
                if (oy >= 0 && ox >= 0 && oy < ho && ox < wo) y(n, o, oy, ox) += x(n, c, iy, ix) * w(c, o, ky, kx);
              }
  return y;
}

void expect_close(const Tensor<double>& a, const Tensor<double>& b, double tol = 1e-12) {
  ASSERT_EQ(a.shape(), b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], tol) << "at " << i;
}

}  // namespace

TEST(Conv2d, MatchesDirectConvolution) {
  Rng rng(1);
  for (auto g : {nn::ConvGeometry{3, 1, 1, 1}, nn::ConvGeometry{3, 2, 1, 1}, nn::ConvGeometry{3, 1, 2, 2},
                 nn::ConvGeometry{1, 1, 0, 1}, nn::ConvGeometry{4, 2, 1, 1}}) {
    nn::Conv2d<double> conv(3, 5, g, rng, true);
    auto x = random_tensor<double>(Shape{2, 3, 9, 8}, rng);
    expect_close(conv.forward(x), naive_conv(x, conv.weight().value, &conv.bias().value, g));
  }
}

TEST(Conv2d, GradientsMatchFiniteDifferences) {
  Rng rng(2);
  for (auto g : {nn::ConvGeometry{3, 2, 1, 1}, nn::ConvGeometry{3, 1, 2, 2}, nn::ConvGeometry{1, 1, 0, 1}}) {
    nn::Conv2d<double> conv(3, 4, g, rng, true);
    auto x = random_tensor<double>(Shape{2, 3, 7, 6}, rng);
    auto y = conv.forward(x);
    auto r = random_tensor<double>(y.shape(), rng);
    conv.zero_grad();
    auto gx = conv.backward(r);
    auto loss = [&] { return dot(conv.forward(x), r); };
    EXPECT_LT(check_param_grads(conv, loss).max_rel, 1e-6);
    EXPECT_LT(check_input_grad(x, gx, loss).max_rel, 1e-6);
  }
}

TEST(ConvTranspose2d, MatchesScatterOracleAndDoublesSize) {
  Rng rng(3);
  nn::ConvGeometry g{4, 2, 1, 1};
  nn::ConvTranspose2d<double> d(3, 4, g, rng);
  auto x = random_tensor<double>(Shape{2, 3, 5, 6}, rng);
  auto y = d.forward(x);
  EXPECT_EQ(y.shape(), (Shape{2, 4, 10, 12}));
  expect_close(y, naive_deconv(x, d.weight().value, d.bias().value, g));
}

TEST(ConvTranspose2d, GradientsMatchFiniteDifferences) {
  Rng rng(4);
  nn::ConvTranspose2d<double> d(3, 2, nn::ConvGeometry{4, 2, 1, 1}, rng);
  auto x = random_tensor<double>(Shape{2, 3, 4, 3}, rng);
  auto r = random_tensor<double>(d.forward(x).shape(), rng);
  d.zero_grad();
  auto gx = d.backward(r);
  auto loss = [&] { return dot(d.forward(x), r); };
  EXPECT_LT(check_param_grads(d, loss).max_rel, 1e-6);
  EXPECT_LT(check_input_grad(x, gx, loss).max_rel, 1e-6);
}

TEST(BatchNorm2d, TrainingModeNormalisesPerChannel) {
  Rng rng(5);
  nn::BatchNorm2d<double> bn(3);
  bn.set_training(true);
  auto y = bn.forward(random_tensor<double>(Shape{4, 3, 5, 5}, rng, -3, 7));
  for (int c = 0; c < 3; ++c) {
    double m = 0, v = 0;
    for (int n = 0; n < 4; ++n)
      for (int i = 0; i < 25; ++i) m += y.plane(n, c)[i];
    m /= 100;
    for (int n = 0; n < 4; ++n)
      for (int i = 0; i < 25; ++i) v += (y.plane(n, c)[i] - m) * (y.plane(n, c)[i] - m);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v / 100, 1.0, 1e-3);
  }
}

TEST(BatchNorm2d, GradientsMatchFiniteDifferences) {
  Rng rng(6);
  nn::BatchNorm2d<double> bn(3);
  bn.set_training(true);
  for (auto& [name, p] : bn.named_params())
    if (!p->buffer) p->value = random_tensor<double>(p->value.shape(), rng, 0.5, 1.5);
  auto x = random_tensor<double>(Shape{3, 3, 4, 4}, rng);
  auto r = random_tensor<double>(x.shape(), rng);
  bn.forward(x);
  bn.zero_grad();
  auto gx = bn.backward(r);
  auto loss = [&] { return dot(bn.forward(x), r); };
  EXPECT_LT(check_param_grads(bn, loss).max_rel, 1e-5);
  EXPECT_LT(check_input_grad(x, gx, loss).max_rel, 1e-5);
}

TEST(BatchNorm2d, EvalModeUsesRunningStatistics) {
  nn::BatchNorm2d<double> bn(1);
  Tensor<double> x(Shape{2, 1, 1, 2});
  x.vec() = {1, 3, 5, 7};
  bn.set_training(true);
  bn.forward(x);
  bn.set_training(false);
  // running mean 0.1*4, running var 0.9 + 0.1*(unbiased 6.6667)
  const double mean = 0.4, var = 0.9 + 0.1 * (20.0 / 3.0);
  auto y = bn.forward(x);
  EXPECT_NEAR(y[0], (1 - mean) / std::sqrt(var + 1e-5), 1e-12);
}

TEST(Linear, GradientsMatchFiniteDifferences) {
  Rng rng(7);
  nn::Linear<double> fc(6, 4, rng);
  auto x = random_tensor<double>(Shape{3, 6, 1, 1}, rng);
  auto r = random_tensor<double>(Shape{3, 4, 1, 1}, rng);
  fc.forward(x);
  fc.zero_grad();
  auto gx = fc.backward(r);
  auto loss = [&] { return dot(fc.forward(x), r); };
  EXPECT_LT(check_param_grads(fc, loss).max_rel, 1e-7);
  EXPECT_LT(check_input_grad(x, gx, loss).max_rel, 1e-7);
}

TEST(MeanEmbedding, AveragesTokenRowsAndBackpropagates) {
  Rng rng(8);
  nn::MeanEmbedding<double> emb(5, 3, rng);
  std::vector<std::vector<int>> toks{{0, 2}, {4}, {1, 1, 3}};
  auto y = emb.forward(toks);
  auto& table = emb.named_params()[0].second->value;
  for (int d = 0; d < 3; ++d) EXPECT_NEAR(y(0, d, 0, 0), (table(0, d, 0, 0) + table(2, d, 0, 0)) / 2, 1e-15);
  auto r = random_tensor<double>(y.shape(), rng);
  emb.zero_grad();
  emb.backward(r);
  EXPECT_LT(check_param_grads(emb, [&] { return dot(emb.forward(toks), r); }, 15).max_rel, 1e-7);
}

TEST(Dropout, InvertedScalingAndEvalIdentity) {
  nn::Dropout<double> drop(0.5, 9);
  Tensor<double> x(Shape{1, 1, 100, 100}, 1.0);
  drop.set_training(true);
  auto y = drop.forward(x);
  double kept = 0;
  for (auto v : y.vec()) {
    EXPECT_TRUE(v == 0.0 || v == 2.0);
    kept += v > 0;
  }
  EXPECT_NEAR(kept / 1e4, 0.5, 0.03);
  drop.set_training(false);
  EXPECT_EQ(drop.forward(x), x);
}

TEST(Blocks, ResidualBlockGradients) {
  Rng rng(10);
  nn::BasicBlock<double> block(3, 4, 2, 1, rng);
  block.set_training(true);
  auto x = random_tensor<double>(Shape{2, 3, 6, 6}, rng);
  auto r = random_tensor<double>(block.forward(x).shape(), rng);
  block.zero_grad();
  auto gx = block.backward(r);
  auto loss = [&] { return dot(block.forward(x), r); };
  EXPECT_LT(check_param_grads(block, loss).max_rel, 1e-4);
  EXPECT_LT(check_input_grad(x, gx, loss).max_rel, 1e-4);
}

TEST(Ops, AdaptivePoolMatchesBruteForce) {
  Rng rng(11);
  auto x = random_tensor<double>(Shape{1, 2, 12, 10}, rng);
  for (int bins : {1, 2, 3, 5, 6}) {
    auto y = nn::adaptive_avg_pool(x, bins, bins);
    for (int c = 0; c < 2; ++c)
      for (int by = 0; by < bins; ++by)
        for (int bx = 0; bx < bins; ++bx) {
          const int y0 = int(std::floor(by * 12.0 / bins)), y1 = int(std::ceil((by + 1) * 12.0 / bins));
          const int x0 = int(std::floor(bx * 10.0 / bins)), x1 = int(std::ceil((bx + 1) * 10.0 / bins));
          double s = 0;
          for (int yy = y0; yy < y1; ++yy)
            for (int xx = x0; xx < x1; ++xx) s += x(0, c, yy, xx);
          EXPECT_NEAR(y(0, c, by, bx), s / ((y1 - y0) * (x1 - x0)), 1e-12);
        }
  }
}

TEST(Ops, BilinearMatchesHalfPixelFormula) {
  Rng rng(12);
  auto x = random_tensor<double>(Shape{1, 1, 3, 4}, rng);
  auto y = nn::resize_bilinear(x, 7, 9);
  auto src = [](int o, int in, int out) { return std::max(0.0, (o + 0.5) * in / out - 0.5); };
  for (int oy = 0; oy < 7; ++oy)
    for (int ox = 0; ox < 9; ++ox) {
      const double sy = src(oy, 3, 7), sx = src(ox, 4, 9);
      const int y0 = int(sy), x0 = int(sx);
      const int y1 = std::min(y0 + 1, 2), x1 = std::min(x0 + 1, 3);
      const double fy = sy - y0, fx = sx - x0;
      const double v = (1 - fy) * ((1 - fx) * x(0, 0, y0, x0) + fx * x(0, 0, y0, x1)) +
                       fy * ((1 - fx) * x(0, 0, y1, x0) + fx * x(0, 0, y1, x1));
      EXPECT_NEAR(y(0, 0, oy, ox), v, 1e-12);
    }
}

TEST(Ops, ResizeAndPoolAdjointsAreConsistent) {
  Rng rng(13);
  auto x = random_tensor<double>(Shape{2, 2, 5, 6}, rng);
  auto g = random_tensor<double>(Shape{2, 2, 11, 8}, rng);
  EXPECT_NEAR(dot(nn::resize_bilinear(x, 11, 8), g), dot(x, nn::resize_bilinear_backward(g, x.shape())), 1e-10);
  auto big = random_tensor<double>(Shape{1, 2, 12, 12}, rng);
  auto gp = random_tensor<double>(Shape{1, 2, 3, 3}, rng);
  EXPECT_NEAR(dot(nn::adaptive_avg_pool(big, 3, 3), gp), dot(big, nn::adaptive_avg_pool_backward(gp, big.shape())),
              1e-10);
}

TEST(Loss, SoftmaxCrossEntropyGradient) {
  Rng rng(14);
  Tensor<double> z = random_tensor<double>(Shape{2, 3, 2, 2}, rng, -2, 2);
  std::vector<int> t{0, 1, 2, 1, 2, 2, 0, 0};
  auto lg = nn::softmax_cross_entropy(z, t);
  auto gc = check_input_grad(z, lg.grad, [&] { return nn::softmax_cross_entropy(z, t).loss; }, 24);
  EXPECT_LT(gc.max_rel, 1e-6);
}

TEST(Loss, SingleClassIsZero) {
  Tensor<double> z(Shape{1, 1, 3, 3}, 4.0);
  std::vector<int> t(9, 0);
  auto lg = nn::softmax_cross_entropy(z, t);
  EXPECT_EQ(lg.loss, 0.0);
  for (auto g : lg.grad.vec()) EXPECT_EQ(g, 0.0);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  nn::Param<double> p(Shape{1, 2, 1, 1});
  p.value.vec() = {1.0, -1.0};
  p.grad.vec() = {0.5, -3.0};
  nn::Adam<double> opt({&p}, {.lr = 0.1});
  opt.step();
  EXPECT_NEAR(p.value[0], 0.9, 1e-6);
  EXPECT_NEAR(p.value[1], -0.9, 1e-6);
}
