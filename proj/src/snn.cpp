#include "snl/snn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "snl/kernels.hpp"
#include "snl/landscape.hpp"
#include "snl/linalg.hpp"

namespace snl {

std::vector<std::size_t> ReluNet::widths() const {
  std::vector<std::size_t> w;
  if (weights.empty()) return w;
  w.push_back(weights.front().cols());
  for (const auto& m : weights) w.push_back(m.rows());
  return w;
}

std::size_t ReluNet::parameter_count() const {
  std::size_t c = 0;
  for (std::size_t l = 0; l < depth(); ++l) c += weights[l].size() + biases[l].size();
  return c;
}

void ReluNet::validate() const {
  if (weights.empty()) throw InputError("net: depth must be at least 1");
  if (biases.size() != weights.size()) throw InputError("net: one bias vector per layer");
  for (std::size_t l = 0; l < depth(); ++l) {
    if (weights[l].rows() == 0 || weights[l].cols() == 0)
      throw InputError("net: empty layer " + std::to_string(l + 1));
    if (biases[l].size() != weights[l].rows())
      throw InputError("net: bias length mismatch in layer " + std::to_string(l + 1));
    if (l > 0 && weights[l].cols() != weights[l - 1].rows())
      throw InputError("net: layer " + std::to_string(l + 1) + " input width mismatch");
  }
  if (kappa && !(*kappa > 0.0)) throw InputError("net: kappa must be positive");
}

std::vector<std::size_t> architecture(std::size_t d, std::size_t width, std::size_t depth,
                                      std::size_t r) {
  if (d == 0 || r == 0) throw InputError("architecture: input and output dims must be positive");
  if (depth == 0) throw InputError("architecture: depth must be at least 1");
  if (depth > 1 && width == 0) throw InputError("architecture: width must be positive");
  std::vector<std::size_t> w{d};
  for (std::size_t l = 1; l < depth; ++l) w.push_back(width);
  w.push_back(r);
  return w;
}

namespace {

ReluNet shaped_net(const std::vector<std::size_t>& widths) {
  if (widths.size() < 2) throw InputError("net: widths need at least input and output");
  ReluNet net;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    if (widths[l] == 0 || widths[l - 1] == 0) throw InputError("net: zero width");
    net.weights.emplace_back(widths[l], widths[l - 1]);
    net.biases.emplace_back(widths[l], 0.0);
  }
  return net;
}

void relu_inplace(Matrix& m) {
  for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
}

void add_bias(Matrix& z, const std::vector<double>& b) {
  for (std::size_t i = 0; i < z.rows(); ++i) kernels::axpy(1.0, b, z.row(i));
}

void require_points(const ReluNet& net, const Matrix& points) {
  if (points.cols() != net.input_dim())
    throw InputError("net: points have dimension " + std::to_string(points.cols()) +
                     ", net expects " + std::to_string(net.input_dim()));
}

// Post-activation of every layer; acts[0] = points, acts[L] = output.
std::vector<Matrix> forward_cache(const ReluNet& net, const Matrix& points) {
  require_points(net, points);
  std::vector<Matrix> acts;
  acts.reserve(net.depth() + 1);
  acts.push_back(points);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    Matrix z = matmul_nt(acts.back(), net.weights[l]);
    add_bias(z, net.biases[l]);
    if (l + 1 < net.depth()) relu_inplace(z);
    acts.push_back(std::move(z));
  }
  return acts;
}

NetGradient backprop_cached(const ReluNet& net, const std::vector<Matrix>& acts,
                            Matrix delta) {
  NetGradient g;
  g.dw.resize(net.depth());
  g.db.resize(net.depth());
  for (std::size_t l = net.depth(); l-- > 0;) {
    g.dw[l] = matmul_tn(delta, acts[l]);
    g.db[l].assign(delta.cols(), 0.0);
    for (std::size_t i = 0; i < delta.rows(); ++i) kernels::axpy(1.0, delta.row(i), g.db[l]);
    if (l == 0) break;
    Matrix prev = matmul(delta, net.weights[l]);
    const auto mask = acts[l].data();
    auto pd = prev.data();
    for (std::size_t k = 0; k < pd.size(); ++k)
      if (!(mask[k] > 0.0)) pd[k] = 0.0;
    delta = std::move(prev);
  }
  return g;
}

template <typename F>
void for_each_block(ReluNet& net, const NetGradient* g, F&& f) {
  for (std::size_t l = 0; l < net.depth(); ++l) {
    f(net.weights[l].data(), g ? std::span<const double>(g->dw[l].data()) : std::span<const double>{});
    f(std::span<double>(net.biases[l]), g ? std::span<const double>(g->db[l]) : std::span<const double>{});
  }
}

}  // namespace

ReluNet make_relu_net(const std::vector<std::size_t>& widths, std::uint64_t seed) {
  ReluNet net = shaped_net(widths);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& v : net.weights[l].data()) v = u(rng);
    for (double& v : net.biases[l]) v = u(rng);
  }
  return net;
}

ReluNet zero_net(const std::vector<std::size_t>& widths) { return shaped_net(widths); }

std::vector<double> forward(const ReluNet& net, std::span<const double> x) {
  Matrix row(1, x.size());
  std::copy(x.begin(), x.end(), row.data().begin());
  const Matrix y = batch_output(net, row).mat();
  return std::vector<double>(y.data().begin(), y.data().end());
}

Factor batch_output(const ReluNet& net, const Matrix& points) {
  auto acts = forward_cache(net, points);
  return Factor(std::move(acts.back()));
}

double snn_loss(const ReluNet& net, const Matrix& points, const SymMatrix& a) {
  if (points.rows() != a.dim()) throw InputError("snn_loss: point count differs from operator size");
  return loss(batch_output(net, points), a);
}

double snn_loss_pairwise(const ReluNet& net, const Matrix& points, const SymMatrix& a) {
  if (points.rows() != a.dim()) throw InputError("snn_loss: point count differs from operator size");
  std::vector<std::vector<double>> f;
  f.reserve(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) f.push_back(forward(net, points.row(i)));
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < f.size(); ++j) {
      double inner = 0.0;
      for (std::size_t k = 0; k < f[i].size(); ++k) inner += f[i][k] * f[j][k];
      const double e = a(i, j) - inner;
      total += e * e;
    }
  }
  return total;
}

double NetGradient::norm() const {
  double s = 0.0;
  for (const auto& m : dw) s += kernels::dot(m.data(), m.data());
  for (const auto& b : db) s += kernels::dot(b, b);
  return std::sqrt(s);
}

NetGradient& NetGradient::operator*=(double s) {
  for (auto& m : dw) m *= s;
  for (auto& b : db)
    for (double& v : b) v *= s;
  return *this;
}

NetGradient backprop(const ReluNet& net, const Matrix& points, const Matrix& output_grad) {
  auto acts = forward_cache(net, points);
  if (output_grad.rows() != acts.back().rows() || output_grad.cols() != acts.back().cols())
    throw InputError("backprop: output gradient shape mismatch");
  return backprop_cached(net, acts, output_grad);
}

LossAndNetGradient backprop_grad(const ReluNet& net, const Matrix& points, const SymMatrix& a) {
  if (points.rows() != a.dim()) throw InputError("backprop_grad: point count differs from operator size");
  auto acts = forward_cache(net, points);
  // evaluate() returns 2 (YY^T - A) Y, the gradient of half the loss.
  LossAndGrad lg = evaluate(Factor(acts.back()), a);
  lg.grad *= 2.0;
  return {lg.loss, backprop_cached(net, acts, std::move(lg.grad))};
}

std::vector<IndexPair> sample_pairs(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  if (n == 0) throw InputError("sample_pairs: empty index set");
  std::uniform_int_distribution<std::size_t> u(0, n - 1);
  std::vector<IndexPair> pairs(count);
  for (auto& p : pairs) {
    p.first = u(rng);
    p.second = u(rng);
  }
  return pairs;
}

NetGradient pair_gradient(const ReluNet& net, const Matrix& points, const SymMatrix& a,
                          std::span<const IndexPair> pairs, double scale) {
  if (points.rows() != a.dim()) throw InputError("pair_gradient: point count differs from operator size");
  // Forward only through the points the batch touches.
  std::map<std::size_t, std::size_t> local;
  for (const auto& [i, j] : pairs) {
    if (i >= points.rows() || j >= points.rows()) throw InputError("pair_gradient: index out of range");
    local.emplace(i, 0);
    local.emplace(j, 0);
  }
  Matrix sub(local.size(), points.cols());
  std::size_t row = 0;
  for (auto& [global, slot] : local) {
    slot = row;
    std::copy(points.row(global).begin(), points.row(global).end(), sub.row(row).begin());
    ++row;
  }
  auto acts = forward_cache(net, sub);
  const Matrix& f = acts.back();
  Matrix dy(f.rows(), f.cols());
  for (const auto& [i, j] : pairs) {
    const std::size_t li = local.at(i), lj = local.at(j);
    const double coeff = -2.0 * scale * (a(i, j) - kernels::dot(f.row(li), f.row(lj)));
    kernels::axpy(coeff, f.row(lj), dy.row(li));
    kernels::axpy(coeff, f.row(li), dy.row(lj));
  }
  return backprop_cached(net, acts, std::move(dy));
}

std::string to_string(TrainMethod m) {
  switch (m) {
    case TrainMethod::full_gd: return "full_gd";
    case TrainMethod::minibatch_pairs: return "minibatch_pairs";
    case TrainMethod::adam: return "adam";
  }
  return "adam";
}

TrainMethod parse_train_method(const std::string& name) {
  if (name == "full_gd") return TrainMethod::full_gd;
  if (name == "minibatch_pairs") return TrainMethod::minibatch_pairs;
  if (name == "adam") return TrainMethod::adam;
  throw InputError("unknown training method '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InputError("train: lr must be a nonnegative number");
  if (batch_pairs < 1) throw InputError("train: batch_pairs must be at least 1");
  if (record_every < 1) throw InputError("train: record_every must be at least 1");
  regions.validate();
}

void clip_parameters(ReluNet& net, double kappa) {
  for_each_block(net, nullptr, [kappa](std::span<double> p, std::span<const double>) {
    for (double& v : p) v = std::clamp(v, -kappa, kappa);
  });
}

void NetStepper::step(ReluNet& net, const NetGradient& g, std::size_t k) {
  const double eta = scheduled_step(cfg_.lr, cfg_.schedule, k, cfg_.iters);
  if (cfg_.method != TrainMethod::adam) {
    for_each_block(net, &g, [eta](std::span<double> p, std::span<const double> d) {
      kernels::axpy(-eta, d, p);
    });
  } else {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (!m_) {
      m_ = g;
      *m_ *= 0.0;
      v_ = *m_;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t l = 0; l < net.depth(); ++l) {
      auto update = [&](std::span<double> p, std::span<const double> d, std::span<double> m,
                        std::span<double> v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
          m[i] = b1 * m[i] + (1.0 - b1) * d[i];
          v[i] = b2 * v[i] + (1.0 - b2) * d[i] * d[i];
          p[i] -= eta * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
      };
      update(net.weights[l].data(), g.dw[l].data(), m_->dw[l].data(), v_->dw[l].data());
      update(net.biases[l], g.db[l], m_->db[l], v_->db[l]);
    }
  }
  if (net.clip && net.kappa) clip_parameters(net, *net.kappa);
}

void minibatch_step(ReluNet& net, const Matrix& points, const SymMatrix& a,
                    const TrainConfig& cfg, std::mt19937_64& rng, std::size_t k) {
  cfg.validate();
  const auto pairs = sample_pairs(points.rows(), cfg.batch_pairs, rng);
  const double n = static_cast<double>(points.rows());
  const double scale = cfg.scale_minibatch ? n * n / static_cast<double>(cfg.batch_pairs) : 1.0;
  const NetGradient g = pair_gradient(net, points, a, pairs, scale);
  TrainConfig sgd = cfg;
  sgd.method = TrainMethod::minibatch_pairs;
  NetStepper(sgd).step(net, g, k);
}

PretrainResult pretrain_to_target(ReluNet net, const Matrix& points, const Matrix& target,
                                  const TrainConfig& cfg) {
  cfg.validate();
  net.validate();
  if (cfg.method == TrainMethod::minibatch_pairs)
    throw InputError("pretrain: supported methods are full_gd and adam");
  if (target.rows() != points.rows() || target.cols() != net.output_dim())
    throw InputError("pretrain: target shape does not match the net output");
  PretrainResult out;
  NetStepper stepper(cfg);
  for (std::size_t k = 0;; ++k) {
    auto acts = forward_cache(net, points);
    Matrix diff = acts.back() - target;
    const double res = kernels::dot(diff.data(), diff.data());
    if (!std::isfinite(res)) throw NetDivergenceError("pretrain: residual diverged", net);
    if (k == 0) out.initial_residual = res;
    out.residual = res;
    if (res == 0.0 || k == cfg.iters) break;
    diff *= 2.0;
    stepper.step(net, backprop_cached(net, acts, std::move(diff)), k);
    ++out.iterations;
  }
  out.net = std::move(net);
  return out;
}

TrainResult train(ReluNet net, const Matrix& points, const SymMatrix& a,
                  const SpectralTarget& target, const TrainConfig& cfg) {
  cfg.validate();
  net.validate();
  if (net.output_dim() != target.r()) throw InputError("train: net output width differs from r");
  TrainResult out;
  NetStepper stepper(cfg);
  std::mt19937_64 rng(cfg.seed);
  ReluNet last_finite = net;
  const double n = static_cast<double>(points.rows());
  const double scale = cfg.scale_minibatch ? n * n / static_cast<double>(cfg.batch_pairs) : 1.0;

  for (std::size_t k = 0;; ++k) {
    const bool last = k == cfg.iters;
    const bool record = last || k % cfg.record_every == 0;
    const bool minibatch = cfg.method == TrainMethod::minibatch_pairs;
    std::optional<LossAndNetGradient> full;
    if (record || !minibatch) {
      full = backprop_grad(net, points, a);
      if (!std::isfinite(full->loss) || !std::isfinite(full->grad.norm()))
        throw NetDivergenceError("train: loss diverged at iteration " + std::to_string(k),
                                 last_finite);
      last_finite = net;
    }
    if (record) {
      const Factor y = batch_output(net, points);
      TrajectoryRecord r;
      r.iter = k;
      r.loss = full->loss;
      r.grad_norm = full->grad.norm();
      r.dist = procrustes_align(y.mat(), target.factor.mat()).dist;
      if (is_full_rank(y.mat())) r.labels = classify(y, a, target, cfg.regions).labels.joined();
      r.step = last ? 0.0 : scheduled_step(cfg.lr, cfg.schedule, k, cfg.iters);
      out.trajectory.records.push_back(std::move(r));
    }
    if (last) break;
    if (minibatch) {
      const auto pairs = sample_pairs(points.rows(), cfg.batch_pairs, rng);
      stepper.step(net, pair_gradient(net, points, a, pairs, scale), k);
    } else {
      stepper.step(net, full->grad, k);
    }
    ++out.iterations;
  }
  out.net = std::move(net);
  return out;
}

double lipschitz_bound(const ReluNet& net) {
  double l = 1.0;
  for (const auto& w : net.weights) l *= spectral_norm(w);
  return l;
}

SpectralNetDiagnostic spectralnet_loss(const ReluNet& net, const SimilarityGraph& g) {
  const Matrix y = batch_output(net, g.cloud.points).mat();
  const std::size_t n = y.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (g.weights(i, j) != 0.0) total += g.weights(i, j) * kernels::sqdist(y.row(i), y.row(j));
  SpectralNetDiagnostic out;
  const double nd = static_cast<double>(n);
  out.loss = total / (nd * nd);
  Matrix gram = matmul_tn(y, y);
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) -= nd;
  out.constraint_residual = frobenius_norm(gram);
  return out;
}

PruningReport pruning_report(const ReluNet& net, double threshold) {
  PruningReport rep;
  rep.budget = net.sparsity_budget;
  auto scan = [&](std::span<const double> p) {
    for (double v : p) {
      if (std::abs(v) > threshold) ++rep.nonzeros;
      rep.max_abs_entry = std::max(rep.max_abs_entry, std::abs(v));
    }
  };
  for (std::size_t l = 0; l < net.depth(); ++l) {
    scan(net.weights[l].data());
    scan(net.biases[l]);
  }
  if (rep.budget) rep.within_budget = rep.nonzeros <= *rep.budget;
  if (net.kappa) rep.kappa_respected = rep.max_abs_entry <= *net.kappa;
  const auto w = net.widths();
  for (std::size_t l = 2; l + 1 < w.size(); ++l)
    if (w[l] != w[1]) rep.width_uniform = false;
  return rep;
}

io::json net_to_json(const ReluNet& net) {
  io::json j;
  j["depth"] = net.depth();
  j["widths"] = net.widths();
  j["weights"] = io::json::array();
  for (const auto& w : net.weights)
    j["weights"].push_back(std::vector<double>(w.data().begin(), w.data().end()));
  j["biases"] = net.biases;
  j["kappa"] = net.kappa ? io::json(*net.kappa) : io::json(nullptr);
  if (net.clip) j["clip"] = true;
  if (net.sparsity_budget) j["sparsity_budget"] = *net.sparsity_budget;
  return j;
}

ReluNet net_from_json(const io::json& j) {
  try {
    const auto widths = j.at("widths").get<std::vector<std::size_t>>();
    ReluNet net = shaped_net(widths);
    if (j.at("depth").get<std::size_t>() != net.depth())
      throw InputError("net json: depth disagrees with widths");
    const auto& ws = j.at("weights");
    const auto& bs = j.at("biases");
    if (ws.size() != net.depth() || bs.size() != net.depth())
      throw InputError("net json: expected one weight and bias array per layer");
    for (std::size_t l = 0; l < net.depth(); ++l) {
      const auto w = ws[l].get<std::vector<double>>();
      if (w.size() != net.weights[l].size())
        throw InputError("net json: weight count mismatch in layer " + std::to_string(l + 1));
      std::copy(w.begin(), w.end(), net.weights[l].data().begin());
      net.biases[l] = bs[l].get<std::vector<double>>();
    }
    if (j.contains("kappa") && !j["kappa"].is_null()) net.kappa = j["kappa"].get<double>();
    net.clip = j.value("clip", false);
    if (j.contains("sparsity_budget")) net.sparsity_budget = j["sparsity_budget"].get<std::size_t>();
    net.validate();
    return net;
  } catch (const io::json::exception& e) {
    throw InputError(std::string("net json: ") + e.what());
  }
}

}  // namespace snl
