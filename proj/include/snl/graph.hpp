#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snl/io.hpp"
#include "snl/linalg.hpp"
#include "snl/matrix.hpp"

namespace snl {

enum class CloudSource { sphere, file, synthetic };

struct PointCloud {
  Matrix points;  // n x d, one point per row
  CloudSource source = CloudSource::file;

  std::size_t n() const { return points.rows(); }
  std::size_t d() const { return points.cols(); }
};

// Validates finiteness and n >= 2.
PointCloud make_cloud(Matrix points, CloudSource source);

// n i.i.d. uniform points on the unit sphere S^2 in R^3 (normalized
// Gaussians). Deterministic for a fixed seed.
PointCloud sample_sphere(std::size_t n, std::uint64_t seed);

// Gaussian mixture: point i = c_{i mod clusters} + noise * N(0, I_d) with
// standard normal centers c_j.
PointCloud sample_clusters(std::size_t n, std::size_t d, std::size_t clusters, double noise,
                           std::uint64_t seed);

enum class Kernel { indicator, gaussian, exponential };
enum class GraphRule { kernel, knn };

std::string to_string(Kernel k);
Kernel parse_kernel(const std::string& name);

// eta(t) for the given profile.
double kernel_profile(Kernel k, double t);

struct SimilarityGraph {
  PointCloud cloud;
  SymMatrix weights;  // nonnegative, every row sum > 0
  GraphRule rule = GraphRule::kernel;
  Kernel kernel = Kernel::gaussian;
  double epsilon = 0.0;  // kernel rule only
  std::size_t k = 0;     // knn rule only

  std::vector<double> degrees() const;
};

// G_ij = eta(|x_i - x_j| / epsilon), diagonal included (eta(0)).
SimilarityGraph build_kernel_graph(const PointCloud& cloud, double epsilon,
                                   Kernel kernel = Kernel::gaussian);

// Binary, OR-symmetrized k-nearest-neighbour graph without self-loops.
// Distance ties are broken by the lower index.
SimilarityGraph build_knn_graph(const PointCloud& cloud, std::size_t k);

// I - D^{-1/2} G D^{-1/2}
SymMatrix normalized_laplacian(const SimilarityGraph& g);

enum class OperatorRule { kernel, knn, gram, custom };

std::string to_string(OperatorRule rule);

// The PSD/PD matrix the contrastive objective factorizes, with its cached
// eigendecomposition. For graph rules this is D^{-1/2} G D^{-1/2} + a I and
// `laplacian` holds the normalized Laplacian; for the gram rule it is the
// Gram matrix of row-normalized points and carries no shift or Laplacian.
struct Operator {
  SymMatrix matrix;
  OperatorRule rule = OperatorRule::custom;
  double shift = 0.0;
  std::optional<SymMatrix> laplacian;
  EigDecomp eig;
  Kernel kernel = Kernel::gaussian;
  double epsilon = 0.0;
  std::size_t k = 0;

  std::size_t n() const { return matrix.dim(); }
  double sigma(std::size_t i) const { return eig.values.at(i); }  // 0-based, descending
  bool positive_definite() const { return eig.values.back() > 0.0; }
  // sigma_r - sigma_{r+1} (1-based r); sigma_{n+1} is taken as 0.
  double spectral_gap(std::size_t r) const;
  bool has_eigengap(std::size_t r) const { return spectral_gap(r) > 0.0; }
};

Operator adjacency_operator(const SimilarityGraph& g, double a);
// Points scaled to unit norm; the Gram operator is built from these rows.
Matrix unit_rows(const Matrix& points);
Operator gram_operator(const PointCloud& cloud);
Operator custom_operator(const SymMatrix& m);

// Header {rule, epsilon|k, a, n} merged with the matrix envelope.
io::json operator_to_json(const Operator& op);
Operator operator_from_json(const io::json& j);

}  // namespace snl
