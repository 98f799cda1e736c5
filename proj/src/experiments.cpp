#include "snl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>

#include "snl/kernels.hpp"
#include "snl/landscape.hpp"
#include "snl/linalg.hpp"
#include "snl/random.hpp"

namespace snl {

namespace {

io::Provenance provenance_for(std::uint64_t seed, const io::json& cfg) {
  io::Provenance p;
  p.seed = seed;
  p.config_hash = io::config_hash(cfg.dump());
  return p;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void write_point_values(const std::filesystem::path& path, const PointCloud& cloud,
                        const std::vector<double>& values, const io::Provenance& prov) {
  auto out = open_output(path);
  out << prov.csv_comment() << '\n';
  out << "x,y,z,value\n";
  for (std::size_t i = 0; i < cloud.n(); ++i) {
    for (double c : cloud.points.row(i)) out << io::format_double(c) << ',';
    out << io::format_double(values[i]) << '\n';
  }
}

}  // namespace

void Fig1Config::validate() const {
  if (n < 3) throw InputError("fig1: n must be at least 3");
  if (k < 1 || k >= n) throw InputError("fig1: k must be in [1, n)");
  if (depth < 1) throw InputError("fig1: depth must be at least 1");
  if (depth > 1 && width < 1) throw InputError("fig1: width must be positive");
  if (method == TrainMethod::minibatch_pairs)
    throw InputError("fig1: the fit supports full_gd and adam");
  if (!(lr > 0.0)) throw InputError("fig1: lr must be positive");
}

io::json Fig1Config::to_json() const {
  return {{"experiment", "fig1"}, {"n", n},   {"k", k},         {"width", width},
          {"depth", depth},       {"lr", lr}, {"iters", iters}, {"method", to_string(method)},
          {"seed", seed}};
}

Fig1Result run_fig1(const Fig1Config& cfg) {
  cfg.validate();
  Fig1Result res;
  res.cloud = sample_sphere(cfg.n, cfg.seed);
  const SimilarityGraph g = build_knn_graph(res.cloud, cfg.k);
  const EigDecomp eig = sym_eig(normalized_laplacian(g));
  const std::size_t n = cfg.n;

  // Bottom eigenvector should be D^{1/2} 1 up to sign and scale.
  const auto deg = g.degrees();
  std::vector<double> trivial(n);
  double tn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    trivial[i] = std::sqrt(deg[i]);
    tn += deg[i];
  }
  tn = std::sqrt(tn);
  const auto bottom = eig.vectors.column(n - 1);
  const double sgn = kernels::dot(bottom, trivial) < 0.0 ? -1.0 : 1.0;
  for (std::size_t i = 0; i < n; ++i)
    res.trivial_deviation = std::max(res.trivial_deviation, std::abs(sgn * bottom[i] - trivial[i] / tn));

  res.eigenvalue = eig.values[n - 2];
  res.eigensolver = eig.vectors.column(n - 2);

  // Fit sqrt(n) v so that entries are O(1).
  const double scale = std::sqrt(static_cast<double>(n));
  Matrix target(n, 1);
  for (std::size_t i = 0; i < n; ++i) target(i, 0) = scale * res.eigensolver[i];
  TrainConfig tc;
  tc.method = cfg.method;
  tc.lr = cfg.lr;
  tc.iters = cfg.iters;
  tc.seed = cfg.seed;
  const ReluNet net0 = make_relu_net(architecture(3, cfg.width, cfg.depth, 1), cfg.seed + 1);
  const PretrainResult fit = pretrain_to_target(net0, res.cloud.points, target, tc);
  res.fit_residual = fit.residual;

  const Matrix y = batch_output(fit.net, res.cloud.points).mat();
  res.network.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.network[i] = y(i, 0) / scale;
  if (kernels::dot(res.network, res.eigensolver) < 0.0)
    for (double& v : res.network) v = -v;

  double vmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = std::abs(res.network[i] - res.eigensolver[i]);
    res.sup_discrepancy = std::max(res.sup_discrepancy, diff);
    vmax = std::max(vmax, std::abs(res.eigensolver[i]));
  }
  res.relative_sup = res.sup_discrepancy / vmax;
  res.l2_discrepancy = std::sqrt(kernels::sqdist(res.network, res.eigensolver));
  return res;
}

void write_fig1(const Fig1Result& result, const Fig1Config& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const io::json cj = cfg.to_json();
  const io::Provenance prov = provenance_for(cfg.seed, cj);
  write_point_values(dir / "fig1_eigensolver.csv", result.cloud, result.eigensolver, prov);
  write_point_values(dir / "fig1_snn.csv", result.cloud, result.network, prov);
  io::json s;
  s["provenance"] = prov.to_json();
  s["config"] = cj;
  s["eigenvalue"] = result.eigenvalue;
  s["sup_discrepancy"] = result.sup_discrepancy;
  s["relative_sup_discrepancy"] = result.relative_sup;
  s["l2_discrepancy"] = result.l2_discrepancy;
  s["trivial_eigenvector_deviation"] = result.trivial_deviation;
  s["fit_residual"] = result.fit_residual;
  s["files"] = {"fig1_eigensolver.csv", "fig1_snn.csv"};
  io::write_json(dir / "fig1_summary.json", s);
}

void Fig23Config::validate() const {
  if (points) {
    if (points->rows() < 2) throw InputError("fig2_fig3: need at least 2 points");
  } else {
    if (n < 2 || d < 1) throw InputError("fig2_fig3: need n >= 2 and d >= 1");
  }
  const std::size_t npts = points ? points->rows() : n;
  if (r < 1 || r >= npts) throw InputError("fig2_fig3: r must be in [1, n)");
  if (saddle) {
    if (saddle->size() != r) throw InputError("fig2_fig3: saddle must list r indices");
    for (std::size_t i : *saddle)
      if (i >= npts) throw InputError("fig2_fig3: saddle index out of range");
  }
  if (!(perturb >= 0.0) || !(weight_perturb >= 0.0))
    throw InputError("fig2_fig3: perturbations must be nonnegative");
  if (!(ambient_lr > 0.0) || !(nn_lr > 0.0) || !(pretrain_lr > 0.0))
    throw InputError("fig2_fig3: learning rates must be positive");
  if (width < 1) throw InputError("fig2_fig3: width must be positive");
  if (nn_method == TrainMethod::minibatch_pairs ||
      pretrain_method == TrainMethod::minibatch_pairs)
    throw InputError("fig2_fig3: network arms use full_gd or adam");
  if (record_every < 1) throw InputError("fig2_fig3: record_every must be at least 1");
}

io::json Fig23Config::to_json() const {
  io::json j{{"experiment", "fig2_fig3"},
             {"r", r},
             {"perturb", perturb},
             {"ambient_lr", ambient_lr},
             {"ambient_iters", ambient_iters},
             {"width", width},
             {"pretrain_method", to_string(pretrain_method)},
             {"pretrain_lr", pretrain_lr},
             {"pretrain_optimal_iters", pretrain_optimal_iters},
             {"pretrain_saddle_iters", pretrain_saddle_iters},
             {"weight_perturb", weight_perturb},
             {"nn_method", to_string(nn_method)},
             {"nn_lr", nn_lr},
             {"nn_iters", nn_iters},
             {"nn_schedule", to_string(nn_schedule)},
             {"schedule", to_string(schedule)},
             {"record_every", record_every},
             {"plateau_min_length", plateau_min_length},
             {"run_nn", run_nn},
             {"seed", seed}};
  if (points) {
    j["points_hash"] = io::config_hash(io::matrix_to_json(*points).dump());
  } else {
    j["synthetic"] = {{"n", n}, {"d", d}, {"clusters", clusters}, {"noise", noise}};
  }
  if (saddle) j["saddle"] = *saddle;
  return j;
}

namespace {

void jitter(ReluNet& net, double stddev, std::uint64_t seed) {
  if (stddev == 0.0) return;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    net.weights[l] += gaussian_matrix(net.weights[l].rows(), net.weights[l].cols(), rng, stddev);
    const Matrix db = gaussian_matrix(1, net.biases[l].size(), rng, stddev);
    for (std::size_t i = 0; i < net.biases[l].size(); ++i) net.biases[l][i] += db(0, i);
  }
}

}  // namespace

ArmSignature arm_signature(const Trajectory& t, std::size_t plateau_min_length) {
  ArmSignature s;
  if (t.records.empty()) return s;
  double gmin = t.records.front().grad_norm;
  for (const auto& r : t.records) gmin = std::min(gmin, r.grad_norm);
  const double g0 = t.records.front().grad_norm;
  s.grad_reduction = g0 > 0.0 ? gmin / g0 : 0.0;
  s.plateau = detect_plateau(t, 10.0, plateau_min_length);
  return s;
}

Fig23Result run_fig2_fig3(const Fig23Config& cfg) {
  cfg.validate();
  Fig23Result res;
  const PointCloud cloud =
      cfg.points ? make_cloud(*cfg.points, CloudSource::file)
                 : sample_clusters(cfg.n, cfg.d, cfg.clusters, cfg.noise, cfg.seed);
  res.op = gram_operator(cloud);
  if (!res.op.positive_definite())
    throw InputError("fig2_fig3: Gram operator is not positive definite (need d >= n and distinct points)");
  if (!res.op.has_eigengap(cfg.r)) throw InputError("fig2_fig3: no eigengap at r");
  res.target = optimal_factor(res.op, cfg.r);
  if (cfg.saddle) {
    res.saddle = *cfg.saddle;
  } else {
    res.saddle.resize(cfg.r);
    std::iota(res.saddle.begin(), res.saddle.end(), std::size_t{0});
    res.saddle.back() = cfg.r;
  }
  const Factor saddle = enumerate_fosp(res.op, res.saddle, cfg.r);
  const SymMatrix& a = res.op.matrix;
  const SpectralTarget& target = res.target;
  // The network sees the same unit vectors whose Gram matrix is the operator.
  const Matrix x = unit_rows(cloud.points);

  auto perturbed = [&](const Factor& base, std::uint64_t seed) {
    Rng rng(seed);
    return Factor(base.mat() + gaussian_matrix(base.n(), base.r(), rng, cfg.perturb));
  };

  auto ambient_arm = [&](const Factor& base, std::uint64_t seed) {
    DescentConfig dc;
    dc.lr = cfg.ambient_lr;
    dc.iters = cfg.ambient_iters;
    dc.schedule = cfg.schedule;
    dc.record_every = cfg.record_every;
    dc.seed = seed;
    ArmResult arm;
    arm.trajectory = gradient_descent(perturbed(base, seed), a, target, dc).trajectory;
    arm.ran = true;
    return arm;
  };

  auto nn_arm = [&](const Matrix& goal, std::size_t pretrain_iters, std::uint64_t seed) {
    TrainConfig pre;
    pre.method = cfg.pretrain_method;
    pre.lr = cfg.pretrain_lr;
    pre.iters = pretrain_iters;
    pre.schedule = cfg.schedule;
    pre.seed = seed;
    const ReluNet net0 = make_relu_net(architecture(x.cols(), cfg.width, 2, cfg.r), seed);
    PretrainResult p = pretrain_to_target(net0, x, goal, pre);
    jitter(p.net, cfg.weight_perturb, seed);
    TrainConfig tc = pre;
    tc.method = cfg.nn_method;
    tc.lr = cfg.nn_lr;
    tc.iters = cfg.nn_iters;
    tc.schedule = cfg.nn_schedule;
    tc.record_every = cfg.record_every;
    ArmResult arm;
    arm.pretrain_residual = p.residual;
    arm.trajectory = train(std::move(p.net), x, a, target, tc).trajectory;
    arm.ran = true;
    return arm;
  };

  const std::uint64_t s = cfg.seed;
  std::array<std::future<ArmResult>, 4> jobs;
  if (cfg.run_nn) {
    jobs[0] = std::async(std::launch::async, nn_arm, target.factor.mat(),
                         cfg.pretrain_optimal_iters, s + 1);
    jobs[1] = std::async(std::launch::async, nn_arm, saddle.mat(), cfg.pretrain_saddle_iters, s + 2);
  }
  jobs[2] = std::async(std::launch::async, ambient_arm, target.factor, s + 3);
  jobs[3] = std::async(std::launch::async, ambient_arm, saddle, s + 4);

  static constexpr std::array<const char*, 4> names{"nn_optimal", "nn_saddle", "ambient_optimal",
                                                    "ambient_saddle"};
  for (std::size_t i = 0; i < 4; ++i) {
    if (jobs[i].valid()) res.arms[i] = jobs[i].get();
    res.arms[i].name = names[i];
    if (res.arms[i].ran)
      res.arms[i].signature = arm_signature(res.arms[i].trajectory, cfg.plateau_min_length);
  }
  return res;
}

void write_fig2_fig3(const Fig23Result& result, const Fig23Config& cfg,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const io::json cj = cfg.to_json();
  const io::Provenance prov = provenance_for(cfg.seed, cj);
  static constexpr std::array<const char*, 4> files{"fig2_nn_optimal.csv", "fig2_nn_saddle.csv",
                                                    "fig3_ambient_optimal.csv",
                                                    "fig3_ambient_saddle.csv"};
  io::json s;
  s["provenance"] = prov.to_json();
  s["config"] = cj;
  s["eigenvalues"] = std::vector<double>(result.op.eig.values.begin(),
                                         result.op.eig.values.begin() +
                                             std::min<std::size_t>(result.op.n(), cfg.r + 5));
  s["saddle"] = result.saddle;
  s["arms"] = io::json::array();
  for (std::size_t i = 0; i < 4; ++i) {
    const ArmResult& arm = result.arms[i];
    if (!arm.ran) continue;
    auto out = open_output(dir / files[i]);
    arm.trajectory.write_csv(out, &prov);
    const PlateauReport& p = arm.signature.plateau;
    io::json aj{{"name", arm.name},
                {"file", files[i]},
                {"grad_reduction", arm.signature.grad_reduction},
                {"plateau",
                 {{"found", p.found},
                  {"start_iter", p.start_iter},
                  {"end_iter", p.end_iter},
                  {"grad_min", p.grad_min},
                  {"dist_at_end", p.dist_at_end},
                  {"dist_final", p.dist_final},
                  {"drop_ratio", p.drop_ratio}}}};
    if (arm.pretrain_residual) aj["pretrain_residual"] = *arm.pretrain_residual;
    s["arms"].push_back(std::move(aj));
  }
  io::write_json(dir / "fig23_summary.json", s);
}

}  // namespace snl
