#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "snl/ambient.hpp"
#include "snl/error.hpp"
#include "snl/graph.hpp"
#include "snl/io.hpp"
#include "snl/optimizer.hpp"

namespace snl {

// f(x) = W_L relu(W_{L-1} ... relu(W_1 x + b_1) ... + b_{L-1}) + b_L.
// W_l is stored out x in; the last layer is affine.
struct ReluNet {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  std::optional<double> kappa;  // entrywise bound, enforced only when clip is set
  bool clip = false;
  std::optional<std::size_t> sparsity_budget;  // recorded, never enforced

  std::size_t depth() const { return weights.size(); }
  // (d, p, ..., p, r)
  std::vector<std::size_t> widths() const;
  std::size_t input_dim() const { return weights.front().cols(); }
  std::size_t output_dim() const { return weights.back().rows(); }
  std::size_t parameter_count() const;

  void validate() const;
};

// (d, p, ..., p, r) with depth - 1 hidden layers of width p.
std::vector<std::size_t> architecture(std::size_t d, std::size_t width, std::size_t depth,
                                      std::size_t r);

// Entries uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
ReluNet make_relu_net(const std::vector<std::size_t>& widths, std::uint64_t seed);
ReluNet zero_net(const std::vector<std::size_t>& widths);

std::vector<double> forward(const ReluNet& net, std::span<const double> x);

// Row i is forward(net, x_i).
Factor batch_output(const ReluNet& net, const Matrix& points);
inline Factor out_of_sample(const ReluNet& net, const PointCloud& cloud) {
  return batch_output(net, cloud.points);
}

// ||Y_theta Y_theta^T - A||_F^2 via ambient::loss.
double snn_loss(const ReluNet& net, const Matrix& points, const SymMatrix& a);
// sum_ij (A_ij - <f(x_i), f(x_j)>)^2, accumulated term by term.
double snn_loss_pairwise(const ReluNet& net, const Matrix& points, const SymMatrix& a);

// Gradient with the same layout as the net's parameters.
struct NetGradient {
  std::vector<Matrix> dw;
  std::vector<std::vector<double>> db;

  double norm() const;
  NetGradient& operator*=(double s);
};

// Reverse-mode pass for an arbitrary output gradient dL/dY (n x r).
NetGradient backprop(const ReluNet& net, const Matrix& points, const Matrix& output_grad);

struct LossAndNetGradient {
  double loss = 0.0;
  NetGradient grad;
};

// snn_loss and its exact parameter gradient (dL/dY = 4 (YY^T - A) Y).
LossAndNetGradient backprop_grad(const ReluNet& net, const Matrix& points, const SymMatrix& a);

using IndexPair = std::pair<std::size_t, std::size_t>;

// `count` pairs drawn uniformly with replacement from [n] x [n].
std::vector<IndexPair> sample_pairs(std::size_t n, std::size_t count, std::mt19937_64& rng);

// Gradient of sum over `pairs` of (A_ij - <f(x_i), f(x_j)>)^2, times `scale`.
NetGradient pair_gradient(const ReluNet& net, const Matrix& points, const SymMatrix& a,
                          std::span<const IndexPair> pairs, double scale = 1.0);

enum class TrainMethod { full_gd, minibatch_pairs, adam };

std::string to_string(TrainMethod m);
TrainMethod parse_train_method(const std::string& name);

struct TrainConfig {
  TrainMethod method = TrainMethod::adam;
  double lr = 1e-3;
  std::size_t iters = 1000;
  std::size_t batch_pairs = 1;
  // Multiply minibatch gradients by n^2 / batch_pairs (unbiased for the full gradient).
  bool scale_minibatch = false;
  Schedule schedule = Schedule::constant;
  std::uint64_t seed = 0;
  std::size_t record_every = 10;
  RegionParams regions;

  void validate() const;
};

// Parameter update rule with its state (Adam moments).
class NetStepper {
 public:
  explicit NetStepper(const TrainConfig& cfg) : cfg_(cfg) {}
  // Applies one update at iteration k, then clips when the net asks for it.
  void step(ReluNet& net, const NetGradient& g, std::size_t k);

 private:
  TrainConfig cfg_;
  std::optional<NetGradient> m_, v_;
  std::size_t t_ = 0;
};

// Entrywise clamp to [-kappa, kappa].
void clip_parameters(ReluNet& net, double kappa);

// One SGD step on `batch_pairs` sampled pairs.
void minibatch_step(ReluNet& net, const Matrix& points, const SymMatrix& a,
                    const TrainConfig& cfg, std::mt19937_64& rng, std::size_t k = 0);

struct PretrainResult {
  ReluNet net;
  double initial_residual = 0.0;  // ||Y_theta - T||_F^2 before training
  double residual = 0.0;          // after
  std::size_t iterations = 0;
};

// Minimizes ||Y_theta - target||_F^2 with full_gd or adam.
PretrainResult pretrain_to_target(ReluNet net, const Matrix& points, const Matrix& target,
                                  const TrainConfig& cfg);

class NetDivergenceError : public NumericalError {
 public:
  NetDivergenceError(const std::string& what, ReluNet last)
      : NumericalError(what), last_(std::move(last)) {}
  const ReluNet& last_net() const { return last_; }

 private:
  ReluNet last_;
};

struct TrainResult {
  ReluNet net;
  Trajectory trajectory;
  std::size_t iterations = 0;
};

// Trains on the contrastive loss. Each record holds snn_loss, the full
// parameter-gradient norm and the up-to-rotation distance of Y_theta to Y*;
// labels stay empty while Y_theta is rank deficient.
TrainResult train(ReluNet net, const Matrix& points, const SymMatrix& a,
                  const SpectralTarget& target, const TrainConfig& cfg);

// Product of the layers' spectral norms (ReLU is 1-Lipschitz).
double lipschitz_bound(const ReluNet& net);

struct SpectralNetDiagnostic {
  double loss = 0.0;                 // (1/n^2) sum_ij G_ij |f(x_i) - f(x_j)|^2
  double constraint_residual = 0.0;  // ||Y^T Y - n I||_F
};
SpectralNetDiagnostic spectralnet_loss(const ReluNet& net, const SimilarityGraph& g);

struct PruningReport {
  std::size_t nonzeros = 0;
  std::optional<std::size_t> budget;
  bool within_budget = true;
  double max_abs_entry = 0.0;
  bool width_uniform = true;  // all hidden widths equal
  bool kappa_respected = true;
};
// Counts entries with |value| > threshold against the sparsity budget.
PruningReport pruning_report(const ReluNet& net, double threshold = 0.0);

// {depth, widths, weights (row-major), biases, kappa}
io::json net_to_json(const ReluNet& net);
ReluNet net_from_json(const io::json& j);

}  // namespace snl
