#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "losses/losses.hpp"
#include "numeric/ops.hpp"
#include "numeric/rng.hpp"
#include "numeric/tape.hpp"
#include "test_support.hpp"

using namespace princ;

namespace {

const double kOneHot = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));  // 0.31326...

std::vector<ad::Var> consts(ad::Tape& t, const std::vector<std::vector<double>>& vs) {
  std::vector<ad::Var> out;
  for (const auto& v : vs) out.push_back(t.constant(Tensor::vector(v)));
  return out;
}

std::vector<std::vector<double>> random_vectors(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<std::vector<double>> out(n, std::vector<double>(d));
  for (auto& v : out)
    for (auto& x : v) x = rng.uniform(-1, 1);
  return out;
}

}  // namespace

TEST(LossCls, HandValue) {
  ad::Tape t;
  const Batch b{consts(t, {{1, 0}}), {0}};
  const auto protos = consts(t, {{1, 0}, {0, 1}});
  EXPECT_NEAR(loss_cls(b, protos, 1.0).item(), kOneHot, 1e-12);
  EXPECT_NEAR(kOneHot, 0.31326, 1e-5);
}

TEST(LossCls, SinglePrototypeIsZero) {
  Rng rng(1);
  ad::Tape t;
  const Batch b{consts(t, random_vectors(rng, 4, 3)), {0, 0, 0, 0}};
  const auto protos = consts(t, {{0.2, 0.5, -1}});
  EXPECT_EQ(loss_cls(b, protos, 0.1).item(), 0.0);
}

TEST(LossCls, DuplicatingBatchKeepsMean) {
  Rng rng(2);
  const auto vs = random_vectors(rng, 3, 4);
  auto doubled = vs;
  doubled.insert(doubled.end(), vs.begin(), vs.end());
  ad::Tape t;
  const auto protos = consts(t, random_vectors(rng, 3, 4));
  const Batch b1{consts(t, vs), {0, 2, 1}};
  const Batch b2{consts(t, doubled), {0, 2, 1, 0, 2, 1}};
  EXPECT_NEAR(loss_cls(b1, protos, 0.1).item(), loss_cls(b2, protos, 0.1).item(), 1e-12);
}

TEST(LossIi, NoPositivesIsZero) {
  Rng rng(3);
  ad::Tape t;
  const Batch b{consts(t, random_vectors(rng, 3, 4)), {0, 1, 2}};
  EXPECT_EQ(loss_ii(b).item(), 0.0);
}

TEST(LossIi, PairIsZero) {
  Rng rng(4);
  ad::Tape t;
  const Batch b{consts(t, random_vectors(rng, 2, 5)), {3, 3}};
  EXPECT_NEAR(loss_ii(b).item(), 0.0, 1e-15);
}

TEST(LossIi, OrthogonalTriple) {
  ad::Tape t;
  const Batch b{consts(t, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), {0, 0, 1}};
  EXPECT_NEAR(loss_ii(b).item(), std::log(2.0), 1e-12);
}

TEST(LossIs, HandValues) {
  ad::Tape t;
  const Batch b{consts(t, {{1, 0}}), {0}};
  EXPECT_NEAR(loss_is(b, consts(t, {{1, 0}, {0, 1}})).item(), kOneHot / 2.0, 1e-12);
  EXPECT_EQ(loss_is(b, consts(t, {{0.4, 1}})).item(), 0.0);
}

TEST(LossIiIs, UniformRescalingInvariance) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto vs = random_vectors(rng, 5, 4);
    const auto ps = random_vectors(rng, 3, 4);
    const std::vector<std::size_t> labels{0, 1, 0, 2, 1};
    const double alpha = rng.uniform(0.01, 50.0);
    auto vs2 = vs, ps2 = ps;
    for (auto& v : vs2)
      for (auto& x : v) x *= alpha;
    for (auto& v : ps2)
      for (auto& x : v) x *= alpha;
    ad::Tape t;
    const Batch b1{consts(t, vs), labels}, b2{consts(t, vs2), labels};
    EXPECT_NEAR(loss_ii(b1).item(), loss_ii(b2).item(), 1e-12);
    EXPECT_NEAR(loss_is(b1, consts(t, ps)).item(), loss_is(b2, consts(t, ps2)).item(), 1e-12);
  }
}

TEST(LossL2, Examples) {
  ad::Tape t;
  const std::map<std::string, Tensor> ref{{"a", Tensor::vector({1, 2})}, {"b", Tensor::scalar(5)}};
  const std::vector<NamedVar> same{{"a", t.constant(Tensor::vector({1, 2}))}, {"b", t.constant(Tensor::scalar(5))}};
  EXPECT_EQ(loss_l2_penalty(same, ref).item(), 0.0);
  const std::vector<NamedVar> moved{{"a", t.constant(Tensor::vector({1, 3}))}, {"b", t.constant(Tensor::scalar(5))}};
  EXPECT_EQ(loss_l2_penalty(moved, ref).item(), 1.0);
  const double delta = 0.37;
  const std::map<std::string, Tensor> one{{"s", Tensor::scalar(1.0)}};
  const std::vector<NamedVar> shifted{{"s", t.constant(Tensor::scalar(1.0 + delta))}};
  EXPECT_NEAR(loss_l2_penalty(shifted, one).item(), delta * delta, 1e-15);
}

TEST(LossL2, UnreferencedParamsIgnored) {
  ad::Tape t;
  const std::map<std::string, Tensor> ref{{"a", Tensor::vector({1, 2})}};
  const std::vector<NamedVar> cur{{"a", t.constant(Tensor::vector({1, 2}))},
                                  {"prototype/new", t.constant(Tensor::vector({9, 9}))}};
  EXPECT_EQ(loss_l2_penalty(cur, ref).item(), 0.0);
}

TEST(LossL2, ZeroIffEqual) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng.between(1, 8);
    std::vector<double> a(n);
    for (auto& x : a) x = rng.uniform(-1, 1);
    auto b = a;
    const bool perturb = trial % 2 == 1;
    if (perturb) b[rng.below(n)] += rng.uniform(1e-6, 1.0);
    ad::Tape t;
    const std::map<std::string, Tensor> ref{{"p", Tensor::vector(a)}};
    const std::vector<NamedVar> cur{{"p", t.constant(Tensor::vector(b))}};
    const double v = loss_l2_penalty(cur, ref).item();
    if (perturb) {
      EXPECT_GT(v, 0.0);
    } else {
      EXPECT_EQ(v, 0.0);
    }
  }
  ad::Tape t;
  const std::map<std::string, Tensor> ref{{"p", Tensor::vector({0.0})}};
  const std::vector<NamedVar> cur{{"p", t.constant(Tensor::vector({-0.0}))}};
  EXPECT_EQ(loss_l2_penalty(cur, ref).item(), 0.0);
}

TEST(LossKd, UniformHandValue) {
  ad::Tape t;
  const std::vector<double> p{0.5, 0.5};
  EXPECT_NEAR(loss_kd(t.constant(Tensor::vector({0, 0})), p, 1.0).item(), -0.5 * std::log(0.5), 1e-15);
  EXPECT_NEAR(-0.5 * std::log(0.5), 0.34657, 1e-5);
}

TEST(LossKd, OneHotLimit) {
  ad::Tape t;
  const std::vector<double> p{0, 1, 0};
  const double far = loss_kd(t.constant(Tensor::vector({0, 40, 0})), p, 1.0).item();
  EXPECT_GE(far, 0.0);
  EXPECT_LT(far, 1e-15);
}

// Cross-entropy against any q is at least the cross-entropy against q = p.
TEST(LossKd, GibbsInequality) {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = rng.between(2, 8);
    std::vector<double> p_logits(n), q_logits(n);
    for (auto& x : p_logits) x = rng.uniform(-3, 3);
    for (auto& x : q_logits) x = rng.uniform(-3, 3);
    const double tau = rng.uniform(0.5, 2.0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = p_logits[i] / tau;
    const auto p = softmax(scaled);
    ad::Tape t;
    const double at_p = loss_kd(t.constant(Tensor::vector(p_logits)), p, tau).item();
    const double at_q = loss_kd(t.constant(Tensor::vector(q_logits)), p, tau).item();
    EXPECT_GE(at_q + 1e-12, at_p);
  }
}

TEST(Losses, NonNegativeAndFinite) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = rng.between(2, 8), n = rng.between(2, 6), c = rng.between(1, 4);
    std::vector<std::size_t> labels(n);
    for (auto& y : labels) y = rng.below(c);
    ad::Tape t;
    const Batch b{consts(t, random_vectors(rng, n, d)), labels};
    const auto protos = consts(t, random_vectors(rng, c, d));
    for (double v : {loss_cls(b, protos, 0.1).item(), loss_ii(b).item(), loss_is(b, protos).item()}) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
    }
  }
}
