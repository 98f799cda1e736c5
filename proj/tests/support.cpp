#include "support.hpp"

#include <cmath>

namespace snl::testing {

double max_abs_diff(const Matrix& a, const Matrix& b) {
  EXPECT_EQ(a.rows(), b.rows());
  EXPECT_EQ(a.cols(), b.cols());
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

::testing::AssertionResult matrices_near(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    return ::testing::AssertionFailure() << "shape mismatch";
  const double d = max_abs_diff(a, b);
  if (d <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "max abs difference " << d << " exceeds " << tol;
}

SymMatrix random_spd(std::size_t n, Rng& rng, double lo, double hi) {
  return SymMatrix(random_pd(n, rng, lo, hi));
}

Matrix random_unit(std::size_t n, std::size_t r, Rng& rng) {
  Matrix t = gaussian_matrix(n, r, rng);
  t *= 1.0 / frobenius_norm(t);
  return t;
}

}  // namespace snl::testing
