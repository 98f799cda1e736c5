#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "snl/ambient.hpp"
#include "snl/random.hpp"
#include "snl/snn.hpp"
#include "support.hpp"

namespace snl {
namespace {

struct Problem {
  Matrix points;
  SymMatrix a;
};

Problem small_problem(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return {gaussian_matrix(n, d, rng), testing::random_spd(n, rng)};
}

// Central differences over every parameter.
NetGradient numeric_gradient(ReluNet net, const Matrix& x, const SymMatrix& a, double h) {
  NetGradient g;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    Matrix dw(net.weights[l].rows(), net.weights[l].cols());
    for (std::size_t i = 0; i < dw.rows(); ++i)
      for (std::size_t j = 0; j < dw.cols(); ++j) {
        const double w = net.weights[l](i, j);
        net.weights[l](i, j) = w + h;
        const double up = snn_loss(net, x, a);
        net.weights[l](i, j) = w - h;
        const double down = snn_loss(net, x, a);
        net.weights[l](i, j) = w;
        dw(i, j) = (up - down) / (2.0 * h);
      }
    g.dw.push_back(std::move(dw));
    std::vector<double> db(net.biases[l].size());
    for (std::size_t i = 0; i < db.size(); ++i) {
      const double b = net.biases[l][i];
      net.biases[l][i] = b + h;
      const double up = snn_loss(net, x, a);
      net.biases[l][i] = b - h;
      const double down = snn_loss(net, x, a);
      net.biases[l][i] = b;
      db[i] = (up - down) / (2.0 * h);
    }
    g.db.push_back(std::move(db));
  }
  return g;
}

double gradient_gap(const NetGradient& a, const NetGradient& b) {
  double gap = 0.0;
  for (std::size_t l = 0; l < a.dw.size(); ++l) {
    gap = std::max(gap, testing::max_abs_diff(a.dw[l], b.dw[l]));
    for (std::size_t i = 0; i < a.db[l].size(); ++i)
      gap = std::max(gap, std::abs(a.db[l][i] - b.db[l][i]));
  }
  return gap;
}

TEST(ReluNet, ArchitectureAndParameterCount) {
  EXPECT_EQ(architecture(3, 8, 3, 2), (std::vector<std::size_t>{3, 8, 8, 2}));
  const ReluNet net = make_relu_net({3, 8, 2}, 1);
  EXPECT_EQ(net.depth(), 2u);
  EXPECT_EQ(net.input_dim(), 3u);
  EXPECT_EQ(net.output_dim(), 2u);
  EXPECT_EQ(net.parameter_count(), 3u * 8 + 8 + 8 * 2 + 2);
  for (double w : net.weights[0].data()) EXPECT_LE(std::abs(w), 1.0 / std::sqrt(3.0));
}

TEST(ReluNet, ZeroNetOutputsZero) {
  const ReluNet net = zero_net({2, 4, 3});
  for (double v : forward(net, std::vector<double>{1.0, -2.0})) EXPECT_EQ(v, 0.0);
}

TEST(ReluNet, HandWiredForward) {
  ReluNet net = zero_net({2, 2, 1});
  net.weights[0] = Matrix{{1.0, 0.0}, {0.0, 1.0}};
  net.biases[0] = {0.0, -1.0};
  net.weights[1] = Matrix{{2.0, 3.0}};
  net.biases[1] = {0.5};
  // relu(1, -1 - 1) = (1, 0) -> 2 + 0.5
  EXPECT_DOUBLE_EQ(forward(net, std::vector<double>{1.0, -1.0})[0], 2.5);
  // relu(2, 2) -> 4 + 6 + 0.5
  EXPECT_DOUBLE_EQ(forward(net, std::vector<double>{2.0, 3.0})[0], 10.5);
}

TEST(ReluNet, BatchOutputRowsMatchForward) {
  const auto [x, a] = small_problem(6, 3, 2);
  const ReluNet net = make_relu_net({3, 5, 2}, 3);
  const Factor y = batch_output(net, x);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto f = forward(net, x.row(i));
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(y.mat()(i, j), f[j], 1e-14);
  }
}

TEST(SnnLoss, MatchesAmbientLossAndPairwiseSum) {
  const auto [x, a] = small_problem(7, 4, 4);
  const ReluNet net = make_relu_net({4, 6, 6, 3}, 5);
  const double l = snn_loss(net, x, a);
  EXPECT_NEAR(l, loss(batch_output(net, x), a), 1e-12 * (1.0 + l));
  EXPECT_NEAR(l, snn_loss_pairwise(net, x, a), 1e-10 * (1.0 + l));
}

TEST(Backprop, MatchesFiniteDifferences) {
  const auto [x, a] = small_problem(5, 3, 6);
  const ReluNet net = make_relu_net({3, 4, 4, 2}, 7);
  const LossAndNetGradient lg = backprop_grad(net, x, a);
  EXPECT_NEAR(lg.loss, snn_loss(net, x, a), 1e-12);
  const NetGradient fd = numeric_gradient(net, x, a, 1e-6);
  EXPECT_LE(gradient_gap(lg.grad, fd), 1e-5 * (1.0 + fd.norm()));
}

TEST(PairGradient, AllPairsSumToFullGradient) {
  const auto [x, a] = small_problem(5, 3, 8);
  const ReluNet net = make_relu_net({3, 6, 2}, 9);
  std::vector<IndexPair> all;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) all.emplace_back(i, j);
  const NetGradient sum = pair_gradient(net, x, a, all);
  const NetGradient full = backprop_grad(net, x, a).grad;
  EXPECT_LE(gradient_gap(sum, full), 1e-10 * (1.0 + full.norm()));
}

TEST(PairGradient, SamplePairsStayInRange) {
  std::mt19937_64 rng(1);
  const auto pairs = sample_pairs(4, 200, rng);
  ASSERT_EQ(pairs.size(), 200u);
  bool diagonal = false;
  for (const auto& [i, j] : pairs) {
    EXPECT_LT(i, 4u);
    EXPECT_LT(j, 4u);
    diagonal = diagonal || i == j;
  }
  EXPECT_TRUE(diagonal);
}

TEST(Training, FullGradientDescentLowersLoss) {
  const auto [x, a] = small_problem(8, 3, 10);
  const SpectralTarget target = optimal_factor(a, 2);
  TrainConfig cfg;
  cfg.method = TrainMethod::full_gd;
  cfg.lr = 1e-3;
  cfg.iters = 200;
  const ReluNet net = make_relu_net({3, 16, 2}, 11);
  const TrainResult r = train(net, x, a, target, cfg);
  ASSERT_FALSE(r.trajectory.records.empty());
  EXPECT_LT(r.trajectory.records.back().loss, r.trajectory.records.front().loss);
  EXPECT_EQ(r.iterations, 200u);
  EXPECT_EQ(r.trajectory.records.back().iter, 200u);
}

TEST(Training, ZeroLearningRateLeavesNetUnchanged) {
  const auto [x, a] = small_problem(6, 3, 12);
  const SpectralTarget target = optimal_factor(a, 2);
  TrainConfig cfg;
  cfg.method = TrainMethod::full_gd;
  cfg.lr = 0.0;
  cfg.iters = 5;
  const ReluNet net = make_relu_net({3, 4, 2}, 13);
  const TrainResult r = train(net, x, a, target, cfg);
  EXPECT_EQ(r.net.weights, net.weights);
  EXPECT_EQ(r.net.biases, net.biases);
}

TEST(Training, DivergenceReportsLastFiniteNet) {
  const auto [x, a] = small_problem(6, 3, 14);
  const SpectralTarget target = optimal_factor(a, 2);
  TrainConfig cfg;
  cfg.method = TrainMethod::full_gd;
  cfg.lr = 1e3;
  cfg.iters = 200;
  const ReluNet net = make_relu_net({3, 8, 2}, 15);
  try {
    train(net, x, a, target, cfg);
    FAIL() << "expected divergence";
  } catch (const NetDivergenceError& e) {
    EXPECT_TRUE(std::isfinite(snn_loss(e.last_net(), x, a)));
  }
}

TEST(Training, AdamPretrainFitsTarget) {
  const auto [x, a] = small_problem(10, 4, 16);
  Rng rng(17);
  const Matrix goal = gaussian_matrix(10, 2, rng);
  TrainConfig cfg;
  cfg.method = TrainMethod::adam;
  cfg.lr = 1e-2;
  cfg.iters = 2000;
  cfg.schedule = Schedule::cosine;
  const PretrainResult p = pretrain_to_target(make_relu_net({4, 64, 2}, 18), x, goal, cfg);
  EXPECT_LT(p.residual, 1e-3 * p.initial_residual);
}

TEST(Training, ClippingBoundsEveryParameter) {
  const auto [x, a] = small_problem(6, 3, 19);
  ReluNet net = make_relu_net({3, 8, 2}, 20);
  net.kappa = 0.05;
  net.clip = true;
  TrainConfig cfg;
  cfg.method = TrainMethod::adam;
  cfg.lr = 0.1;
  cfg.iters = 20;
  const SpectralTarget target = optimal_factor(a, 2);
  const TrainResult r = train(net, x, a, target, cfg);
  EXPECT_LE(pruning_report(r.net).max_abs_entry, 0.05);
  EXPECT_TRUE(pruning_report(r.net).kappa_respected);
}

TEST(Diagnostics, LipschitzBoundDominatesDifferenceQuotients) {
  const ReluNet net = make_relu_net({3, 10, 10, 2}, 21);
  const double bound = lipschitz_bound(net);
  Rng rng(22);
  for (int t = 0; t < 100; ++t) {
    const Matrix p = gaussian_matrix(2, 3, rng);
    const auto f0 = forward(net, p.row(0));
    const auto f1 = forward(net, p.row(1));
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < 2; ++j) num += (f0[j] - f1[j]) * (f0[j] - f1[j]);
    for (std::size_t j = 0; j < 3; ++j) den += (p(0, j) - p(1, j)) * (p(0, j) - p(1, j));
    EXPECT_LE(std::sqrt(num), bound * std::sqrt(den) * (1.0 + 1e-12));
  }
}

TEST(Diagnostics, PruningReportCountsNonzeros) {
  ReluNet net = zero_net({2, 3, 1});
  net.weights[0](0, 0) = 0.5;
  net.biases[1][0] = -2.0;
  net.sparsity_budget = 1;
  const PruningReport rep = pruning_report(net);
  EXPECT_EQ(rep.nonzeros, 2u);
  EXPECT_FALSE(rep.within_budget);
  EXPECT_DOUBLE_EQ(rep.max_abs_entry, 2.0);
  EXPECT_TRUE(rep.width_uniform);
}

TEST(Serialization, JsonKeepsParametersExactly) {
  ReluNet net = make_relu_net({3, 5, 2}, 23);
  net.kappa = 2.0;
  const ReluNet back = net_from_json(net_to_json(net));
  EXPECT_EQ(back.weights, net.weights);
  EXPECT_EQ(back.biases, net.biases);
  EXPECT_EQ(back.kappa, net.kappa);
  EXPECT_THROW(net_from_json(io::json{{"depth", 1}}), InputError);
}

}  // namespace
}  // namespace snl
