#include "sumreward/value_net.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sumreward;
using sumreward::rl::ValueNet;

TEST(ValueNet, ShapeAndInitialization) {
  Rng rng(91);
  const ValueNet net(7, rng);
  EXPECT_EQ(net.input_dim(), 7u);
  EXPECT_EQ(net.hidden_dim(), 64u);
  EXPECT_EQ(net.parameter_count(), 7u * 64 + 64 + 64 * 64 + 64 + 64 + 1);
  const Vector flat = net.flatten();
  EXPECT_EQ(static_cast<std::size_t>(flat.size()), net.parameter_count());
  // First layer weights are bounded by 1/sqrt(7); its biases start at zero.
  EXPECT_LE(flat.head(7 * 64).cwiseAbs().maxCoeff(), 1.0 / std::sqrt(7.0));
  EXPECT_EQ(flat.segment(7 * 64, 64).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ValueNet, ZeroInputGivesOutputBias) {
  Rng rng(92);
  ValueNet net(3, rng, 5);
  // With zero biases and zero input every hidden unit is tanh(0) = 0.
  EXPECT_EQ(net.value(Vector::Zero(3)), 0.0);
  Vector flat = net.flatten();
  flat(flat.size() - 1) = 0.75;
  net.unflatten(flat);
  EXPECT_EQ(net.value(Vector::Zero(3)), 0.75);
}

TEST(ValueNet, BatchMatchesSingle) {
  Rng rng(93);
  const ValueNet net(4, rng, 8);
  Matrix xs(4, 6);
  for (Eigen::Index c = 0; c < xs.cols(); ++c) xs.col(c) = testkit::random_vector(rng, 4);
  const Vector v = net.values(xs);
  for (Eigen::Index c = 0; c < xs.cols(); ++c) EXPECT_NEAR(v(c), net.value(xs.col(c)), 1e-14);
}

TEST(ValueNet, GradientMatchesCentralDifferences) {
  Rng rng(94);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t in = 1 + rng.index(6);
    const std::size_t hidden = 1 + rng.index(8);
    ValueNet net(in, rng, hidden);
    // Non-zero biases so every block is exercised.
    Vector flat = net.flatten();
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) += 0.1 * rng.normal();
    net.unflatten(flat);
    const Vector x = testkit::random_vector(rng, in);
    const Vector g = net.gradient(x);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      Vector p = flat, m = flat;
      p(i) += h;
      m(i) -= h;
      ValueNet a = net, b = net;
      a.unflatten(p);
      b.unflatten(m);
      const double numeric = (a.value(x) - b.value(x)) / (2 * h);
      const double scale = std::max({std::abs(g(i)), std::abs(numeric), 1e-6});
      EXPECT_LT(std::abs(g(i) - numeric) / scale, 1e-4) << "parameter " << i;
    }
  }
}

TEST(ValueNet, AscendMovesAlongGradient) {
  Rng rng(95);
  ValueNet net(3, rng, 6);
  const Vector x = testkit::random_vector(rng, 3);
  const Vector before = net.flatten();
  const Vector g = net.gradient(x);
  const double v0 = net.value(x);
  net.ascend(x, 1e-3);
  EXPECT_TRUE((net.flatten() - (before + 1e-3 * g)).cwiseAbs().maxCoeff() < 1e-15);
  EXPECT_GT(net.value(x), v0);
}

TEST(ValueNet, FlattenRoundTripAndDeterminism) {
  Rng a(96), b(96);
  ValueNet n1(5, a), n2(5, b);
  EXPECT_EQ(n1.flatten(), n2.flatten());
  Rng rng(97);
  Vector flat(static_cast<Eigen::Index>(n1.parameter_count()));
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = rng.normal();
  n1.unflatten(flat);
  EXPECT_EQ(n1.flatten(), flat);
  EXPECT_TRUE(n1.all_finite());
  EXPECT_THROW(n1.unflatten(Vector::Zero(3)), std::invalid_argument);
}
