#include "snl/random.hpp"

#include <algorithm>
#include <cmath>

#include "snl/kernels.hpp"

namespace snl {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

Matrix random_orthogonal(std::size_t n, Rng& rng) {
  // Gram-Schmidt on Gaussian rows; R has a positive diagonal, so Q is Haar.
  Matrix q = gaussian_matrix(n, n, rng);
  for (std::size_t i = 0; i < n; ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < i; ++k) {
        const double proj = kernels::dot(q.row(k), q.row(i));
        kernels::axpy(-proj, q.row(k), q.row(i));
      }
    }
    const double norm = std::sqrt(kernels::dot(q.row(i), q.row(i)));
    for (double& v : q.row(i)) v /= norm;
  }
  return q;
}

Matrix random_symmetric_with_spectrum(const std::vector<double>& eigvals, Rng& rng) {
  const std::size_t n = eigvals.size();
  const Matrix q = random_orthogonal(n, rng);
  Matrix scaled = q;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scaled(i, j) *= eigvals[j];
  return matmul_nt(scaled, q);
}

Matrix random_pd(std::size_t n, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  std::vector<double> ev(n);
  const double min_gap = 0.05 * (hi - lo) / static_cast<double>(n);
  while (true) {
    for (double& v : ev) v = unif(rng);
    std::sort(ev.begin(), ev.end());
    bool ok = true;
    for (std::size_t i = 1; i < n; ++i) ok = ok && (ev[i] - ev[i - 1] > min_gap);
    if (ok) break;
  }
  return random_symmetric_with_spectrum(ev, rng);
}

}  // namespace snl
