#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "snl/graph.hpp"
#include "snl/io.hpp"
#include "snl/optimizer.hpp"
#include "snl/snn.hpp"

namespace snl {

// Eigenvector illustration: a ReLU net fitted to the first nontrivial
// eigenvector of the kNN-graph Laplacian of a sphere sample.
struct Fig1Config {
  std::size_t n = 200;
  std::size_t k = 10;
  std::size_t width = 256;
  std::size_t depth = 2;
  TrainMethod method = TrainMethod::adam;
  double lr = 1e-3;
  std::size_t iters = 3000;
  std::uint64_t seed = 0;

  void validate() const;
  io::json to_json() const;
};

struct Fig1Result {
  PointCloud cloud;
  double eigenvalue = 0.0;           // of the normalized Laplacian
  std::vector<double> eigensolver;   // unit eigenvector
  std::vector<double> network;       // net output / sqrt(n), sign-aligned
  double sup_discrepancy = 0.0;      // max_i |network_i - eigensolver_i|
  double relative_sup = 0.0;         // sup_discrepancy / max_i |eigensolver_i|
  double l2_discrepancy = 0.0;       // ||network - eigensolver||_2
  double trivial_deviation = 0.0;    // bottom eigenvector vs D^{1/2} 1 / |D^{1/2} 1|, up to sign
  double fit_residual = 0.0;
};

Fig1Result run_fig1(const Fig1Config& cfg);
// fig1_eigensolver.csv, fig1_snn.csv (x,y,z,value) and fig1_summary.json.
void write_fig1(const Fig1Result& result, const Fig1Config& cfg,
                const std::filesystem::path& dir);

// Ambient versus parameterized training from near the optimum and near a
// saddle, on a Gram operator.
struct Fig23Config {
  std::optional<Matrix> points;  // synthetic clusters when absent
  std::size_t n = 100;
  std::size_t d = 400;
  std::size_t clusters = 10;
  double noise = 1.0;

  std::size_t r = 10;
  // 0-based eigenpair indices; default swaps the r-th pair for the (r+1)-th.
  std::optional<std::vector<std::size_t>> saddle;
  double perturb = 1e-3;

  double ambient_lr = 1e-3;
  std::size_t ambient_iters = 5000;

  std::size_t width = 256;
  // Network arms: pretrain onto the start point, jitter every parameter,
  // then train on the factorization loss.
  TrainMethod pretrain_method = TrainMethod::adam;
  double pretrain_lr = 1e-3;
  std::size_t pretrain_optimal_iters = 1250;
  std::size_t pretrain_saddle_iters = 3000;
  double weight_perturb = 1e-6;
  TrainMethod nn_method = TrainMethod::full_gd;
  double nn_lr = 5e-5;
  std::size_t nn_iters = 15000;
  Schedule nn_schedule = Schedule::constant;

  Schedule schedule = Schedule::cosine;  // ambient arms and pretraining
  std::size_t record_every = 10;
  std::size_t plateau_min_length = 500;
  bool run_nn = true;
  std::uint64_t seed = 0;

  void validate() const;
  io::json to_json() const;
};

struct ArmSignature {
  double grad_reduction = 0.0;  // min grad_norm / initial grad_norm
  PlateauReport plateau;
};

ArmSignature arm_signature(const Trajectory& t, std::size_t plateau_min_length);

struct ArmResult {
  std::string name;
  Trajectory trajectory;
  std::optional<double> pretrain_residual;
  ArmSignature signature;
  bool ran = false;
};

struct Fig23Result {
  Operator op;
  SpectralTarget target;
  std::vector<std::size_t> saddle;
  // nn_optimal, nn_saddle, ambient_optimal, ambient_saddle
  std::array<ArmResult, 4> arms;
};

// The four arms run concurrently with per-arm seeds.
Fig23Result run_fig2_fig3(const Fig23Config& cfg);
// One trajectory CSV per arm plus fig23_summary.json.
void write_fig2_fig3(const Fig23Result& result, const Fig23Config& cfg,
                     const std::filesystem::path& dir);

}  // namespace snl
