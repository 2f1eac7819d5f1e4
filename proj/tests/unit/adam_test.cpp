#include <gtest/gtest.h>

#include <cmath>

#include "gesture/adam.hpp"
#include "../support/oracle.hpp"

using namespace gesture;

namespace {

// Runs the optimizer on one scalar with a constant gradient.
std::vector<double> run_scalar(double theta, double g, int steps, AdamParams params = {}) {
  AdamOptimizer opt({1}, params);
  std::vector<double> out;
  for (int i = 0; i < steps; ++i) {
    std::span<double> p{&theta, 1};
    std::span<const double> grad{&g, 1};
    opt.step(std::span<const std::span<double>>{&p, 1}, std::span<const std::span<const double>>{&grad, 1});
    out.push_back(theta);
  }
  return out;
}

}  // namespace

TEST(Adam, Defaults) {
  const AdamParams p;
  EXPECT_EQ(p.learning_rate, 0.01);
  EXPECT_EQ(p.beta1, 0.9);
  EXPECT_EQ(p.beta2, 0.999);
  EXPECT_EQ(p.epsilon, 1e-8);
}

TEST(Adam, ValidatesHyperparameters) {
  EXPECT_THROW((AdamOptimizer({1}, {0.01, 1.0, 0.999, 1e-8})), std::invalid_argument);
  EXPECT_THROW((AdamOptimizer({1}, {0.01, 0.9, 1.0, 1e-8})), std::invalid_argument);
  EXPECT_THROW((AdamOptimizer({1}, {0.0, 0.9, 0.999, 1e-8})), std::invalid_argument);
  EXPECT_THROW((AdamOptimizer({1}, {0.01, 0.9, 0.999, 0.0})), std::invalid_argument);
  EXPECT_NO_THROW((AdamOptimizer({1}, {0.01, 0.0, 0.0, 1e-8})));
}

TEST(Adam, FirstStepIsLearningRate) {
  for (double g : {1e-3, 0.5, 3.0, 1e4}) {
    const auto traj = run_scalar(1.0, g, 1);
    EXPECT_NEAR(traj[0], 1.0 - 0.01, 1e-6) << g;
    EXPECT_NEAR(run_scalar(1.0, -g, 1)[0], 1.0 + 0.01, 1e-6) << g;
  }
}

TEST(Adam, ZeroGradientLeavesParameterFixed) {
  const auto traj = run_scalar(0.75, 0.0, 5);
  for (double v : traj) EXPECT_EQ(v, 0.75);
}

TEST(Adam, ConstantGradientMatchesRecurrence) {
  for (double g : {0.2, -1.7, 40.0}) {
    const auto got = run_scalar(2.0, g, 10);
    const auto want = oracle::adam_scalar(2.0, g, 10);
    for (int t = 0; t < 10; ++t) {
      EXPECT_NEAR(got[t], want[t], 1e-12);
      // With a constant gradient m̂ = g and v̂ = g², so each step is lr·g/(|g|+eps).
      EXPECT_NEAR(got[t], 2.0 - (t + 1) * 0.01 * g / (std::abs(g) + 1e-8), 1e-12);
    }
  }
}

TEST(Adam, ZeroBetasReduceToSignDescent) {
  const AdamParams p{0.05, 0.0, 0.0, 1e-12};
  const auto traj = run_scalar(0.0, -3.0, 4, p);
  for (int t = 0; t < 4; ++t) EXPECT_NEAR(traj[t], 0.05 * (t + 1), 1e-12);
}

TEST(Adam, MomentsFollowDefinition) {
  AdamOptimizer opt({2});
  std::vector<double> theta{0.0, 0.0};
  const std::vector<double> g{1.0, -2.0};
  std::span<double> p{theta};
  std::span<const double> gs{g};
  opt.step(std::span<const std::span<double>>{&p, 1}, std::span<const std::span<const double>>{&gs, 1});
  EXPECT_EQ(opt.step_count(), 1u);
  EXPECT_NEAR(opt.first_moments()[0][1], 0.1 * -2.0, 1e-15);
  EXPECT_NEAR(opt.second_moments()[0][1], 0.001 * 4.0, 1e-15);
}

TEST(Adam, ModelStepIsDeterministicAndShapeChecked) {
  auto a = oracle::random_model({6, 4, 8}, 1);
  auto b = a;
  RowMatrix x = RowMatrix::Random(3, 6);
  const std::vector<std::size_t> y{1, 2, 7};
  auto oa = AdamOptimizer::for_model(a);
  auto ob = AdamOptimizer::for_model(b);
  for (int i = 0; i < 5; ++i) {
    oa.step(a, backward_batch(a, x, y).grads);
    ob.step(b, backward_batch(b, x, y).grads);
  }
  for (std::size_t k = 0; k < a.layers().size(); ++k) {
    EXPECT_EQ(a.layers()[k].weights, b.layers()[k].weights);
    EXPECT_EQ(a.layers()[k].bias, b.layers()[k].bias);
  }
  EXPECT_EQ(oa.first_moments().size(), 4u);

  auto other = oracle::random_model({6, 5, 8}, 1);
  EXPECT_THROW(oa.step(other, backward_batch(other, x, y).grads), DimensionError);
}

TEST(Adam, LossDecreasesOnToyProblem) {
  auto model = oracle::random_model({4, 8}, 3);
  RowMatrix x(4, 4);
  x << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  const std::vector<std::size_t> y{0, 1, 2, 3};
  auto opt = AdamOptimizer::for_model(model);
  const double start = mean_loss(model, x, y);
  for (int i = 0; i < 100; ++i) opt.step(model, backward_batch(model, x, y).grads);
  EXPECT_LT(mean_loss(model, x, y), start * 0.5);
}
