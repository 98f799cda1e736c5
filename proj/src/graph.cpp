#include "snl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "snl/error.hpp"
#include "snl/kernels.hpp"

namespace snl {

namespace {

void check_degrees(const Matrix& g) {
  for (std::size_t i = 0; i < g.rows(); ++i) {
    double deg = 0.0;
    for (double w : g.row(i)) deg += w;
    if (!(deg > 0.0)) {
      throw InputError("graph: vertex " + std::to_string(i) + " has zero degree (isolated)");
    }
  }
}

Matrix pairwise_sqdist(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = kernels::sqdist(x.row(i), x.row(j));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

// D^{-1/2} G D^{-1/2}
Matrix normalized_affinity(const SimilarityGraph& g) {
  const auto deg = g.degrees();
  const std::size_t n = deg.size();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(deg[i] > 0.0)) throw InputError("graph: vertex " + std::to_string(i) + " has zero degree");
    inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);
  }
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = inv_sqrt[i] * g.weights(i, j) * inv_sqrt[j];
  return m;
}

}  // namespace

PointCloud make_cloud(Matrix points, CloudSource source) {
  if (points.rows() < 2) throw InputError("point cloud: need at least 2 points");
  if (points.cols() < 1) throw InputError("point cloud: points must have dimension >= 1");
  if (!all_finite(points)) throw InputError("point cloud: non-finite coordinates");
  return PointCloud{std::move(points), source};
}

PointCloud sample_sphere(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InputError("sample_sphere: n must be at least 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix pts(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    do {
      for (double& v : pts.row(i)) v = normal(rng);
      norm = std::sqrt(kernels::dot(pts.row(i), pts.row(i)));
    } while (norm < 1e-12);
    for (double& v : pts.row(i)) v /= norm;
  }
  return PointCloud{std::move(pts), CloudSource::sphere};
}

PointCloud sample_clusters(std::size_t n, std::size_t d, std::size_t clusters, double noise,
                           std::uint64_t seed) {
  if (n < 2 || d < 1) throw InputError("sample_clusters: need n >= 2 and d >= 1");
  if (clusters < 1 || clusters > n) throw InputError("sample_clusters: clusters must be in [1, n]");
  if (!(noise >= 0.0)) throw InputError("sample_clusters: noise must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix centers(clusters, d);
  for (double& v : centers.data()) v = normal(rng);
  Matrix pts(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = pts.row(i);
    for (double& v : row) v = noise * normal(rng);
    kernels::axpy(1.0, centers.row(i % clusters), row);
  }
  return PointCloud{std::move(pts), CloudSource::synthetic};
}

std::string to_string(Kernel k) {
  switch (k) {
    case Kernel::indicator: return "indicator";
    case Kernel::gaussian: return "gaussian";
    case Kernel::exponential: return "exponential";
  }
  return "unknown";
}

Kernel parse_kernel(const std::string& name) {
  if (name == "indicator") return Kernel::indicator;
  if (name == "gaussian") return Kernel::gaussian;
  if (name == "exponential") return Kernel::exponential;
  throw InputError("unknown kernel '" + name + "'");
}

double kernel_profile(Kernel k, double t) {
  switch (k) {
    case Kernel::indicator: return t <= 1.0 ? 1.0 : 0.0;
    case Kernel::gaussian: return std::exp(-t * t);
    case Kernel::exponential: return std::exp(-t);
  }
  return 0.0;
}

std::vector<double> SimilarityGraph::degrees() const {
  std::vector<double> deg(weights.dim());
  for (std::size_t i = 0; i < deg.size(); ++i) {
    double s = 0.0;
    for (double w : weights.mat().row(i)) s += w;
    deg[i] = s;
  }
  return deg;
}

SimilarityGraph build_kernel_graph(const PointCloud& cloud, double epsilon, Kernel kernel) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InputError("build_kernel_graph: epsilon must be positive");
  const std::size_t n = cloud.n();
  const Matrix d2 = pairwise_sqdist(cloud.points);
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = kernel_profile(kernel, std::sqrt(d2(i, j)) / epsilon);
  check_degrees(g);
  SimilarityGraph out{cloud, SymMatrix(g), GraphRule::kernel, kernel, epsilon, 0};
  return out;
}

SimilarityGraph build_knn_graph(const PointCloud& cloud, std::size_t k) {
  const std::size_t n = cloud.n();
  if (k < 1 || k >= n) throw InputError("build_knn_graph: need 1 <= k < n");
  const Matrix d2 = pairwise_sqdist(cloud.points);
  Matrix g(n, n);
  std::vector<std::size_t> idx;
  idx.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    idx.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) idx.push_back(j);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (d2(i, a) != d2(i, b)) return d2(i, a) < d2(i, b);
                        return a < b;
                      });
    for (std::size_t m = 0; m < k; ++m) {
      g(i, idx[m]) = 1.0;
      g(idx[m], i) = 1.0;
    }
  }
  check_degrees(g);
  SimilarityGraph out{cloud, SymMatrix(g), GraphRule::knn, Kernel::indicator, 0.0, k};
  return out;
}

SymMatrix normalized_laplacian(const SimilarityGraph& g) {
  Matrix lap = normalized_affinity(g) * -1.0;
  for (std::size_t i = 0; i < lap.rows(); ++i) lap(i, i) += 1.0;
  return SymMatrix(lap);
}

std::string to_string(OperatorRule rule) {
  switch (rule) {
    case OperatorRule::kernel: return "kernel";
    case OperatorRule::knn: return "knn";
    case OperatorRule::gram: return "gram";
    case OperatorRule::custom: return "custom";
  }
  return "unknown";
}

double Operator::spectral_gap(std::size_t r) const {
  if (r < 1 || r > n()) throw InputError("spectral_gap: r out of range");
  const double next = r < n() ? eig.values[r] : 0.0;
  return eig.values[r - 1] - next;
}

Operator adjacency_operator(const SimilarityGraph& g, double a) {
  if (!(a > 1.0) || !std::isfinite(a)) throw InputError("adjacency_operator: shift a must exceed 1");
  Matrix affinity = normalized_affinity(g);
  const std::size_t n = affinity.rows();
  Matrix lap = affinity * -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    lap(i, i) += 1.0;
    affinity(i, i) += a;
  }
  Operator op;
  op.matrix = SymMatrix(affinity);
  op.rule = g.rule == GraphRule::knn ? OperatorRule::knn : OperatorRule::kernel;
  op.shift = a;
  op.laplacian = SymMatrix(lap);
  op.eig = sym_eig(op.matrix);
  op.kernel = g.kernel;
  op.epsilon = g.epsilon;
  op.k = g.k;
  return op;
}

Matrix unit_rows(const Matrix& points) {
  Matrix x = points;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double norm = std::sqrt(kernels::dot(x.row(i), x.row(i)));
    if (!(norm > 0.0)) throw InputError("unit_rows: point " + std::to_string(i) + " is zero");
    for (double& v : x.row(i)) v /= norm;
  }
  return x;
}

Operator gram_operator(const PointCloud& cloud) {
  const Matrix x = unit_rows(cloud.points);
  Operator op;
  op.matrix = SymMatrix(matmul_nt(x, x));
  op.rule = OperatorRule::gram;
  op.eig = sym_eig(op.matrix);
  return op;
}

Operator custom_operator(const SymMatrix& m) {
  Operator op;
  op.matrix = m;
  op.rule = OperatorRule::custom;
  op.eig = sym_eig(op.matrix);
  return op;
}

io::json operator_to_json(const Operator& op) {
  io::json j = io::matrix_to_json(op.matrix.mat());
  j["rule"] = to_string(op.rule);
  j["n"] = op.n();
  j["a"] = op.shift;
  if (op.rule == OperatorRule::kernel) {
    j["epsilon"] = op.epsilon;
    j["kernel"] = to_string(op.kernel);
  } else if (op.rule == OperatorRule::knn) {
    j["k"] = op.k;
  }
  return j;
}

Operator operator_from_json(const io::json& j) {
  const Matrix m = io::matrix_from_json(j);
  if (m.rows() != m.cols()) throw InputError("operator json: matrix is not square");
  if (j.contains("n") && j["n"].get<std::size_t>() != m.rows())
    throw InputError("operator json: \"n\" disagrees with data");
  const std::string rule = j.value("rule", std::string("custom"));
  Operator op = custom_operator(SymMatrix(m));
  if (rule == "kernel" || rule == "knn") {
    op.rule = rule == "kernel" ? OperatorRule::kernel : OperatorRule::knn;
    op.shift = j.value("a", 0.0);
    if (!(op.shift > 1.0)) throw InputError("operator json: graph operator needs a > 1");
    Matrix lap = m * -1.0;
    for (std::size_t i = 0; i < lap.rows(); ++i) lap(i, i) += 1.0 + op.shift;
    op.laplacian = SymMatrix(lap);
    op.epsilon = j.value("epsilon", 0.0);
    op.k = j.value("k", std::size_t{0});
    if (j.contains("kernel")) op.kernel = parse_kernel(j["kernel"].get<std::string>());
  } else if (rule == "gram") {
    op.rule = OperatorRule::gram;
  } else if (rule != "custom") {
    throw InputError("operator json: unknown rule '" + rule + "'");
  }
  return op;
}

}  // namespace snl
