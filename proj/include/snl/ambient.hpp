#pragma once

#include <cstddef>
#include <vector>

#include "snl/graph.hpp"
#include "snl/linalg.hpp"
#include "snl/matrix.hpp"

namespace snl {

// An n x r matrix Y standing for the class [Y] = { Y O : O orthogonal }.
// Quotient-geometry operations require full column rank; plain loss and
// gradient evaluation accept any Y.
class Factor {
 public:
  Factor() = default;
  explicit Factor(Matrix y) : y_(std::move(y)) {}

  std::size_t n() const { return y_.rows(); }
  std::size_t r() const { return y_.cols(); }
  const Matrix& mat() const { return y_; }
  Matrix& mat() { return y_; }

 private:
  Matrix y_;
};

// sigma_r > 1e-12 * sigma_1
bool is_full_rank(const Matrix& y);

struct TangentDirection {
  Matrix entries;
  bool horizontal = false;  // Y^T entries symmetric
};

// ||Y Y^T - A||_F^2 (no 1/2).
double loss(const Factor& y, const SymMatrix& a);
double loss(const Factor& y, const Operator& a);

// H([Y]) = loss / 2; gradients and Hessians below are those of H.
inline double half_loss(const Factor& y, const SymMatrix& a) { return 0.5 * loss(y, a); }

// 2 (Y Y^T - A) Y. Always horizontal: Y^T grad is symmetric.
TangentDirection riem_grad(const Factor& y, const SymMatrix& a);

// Loss and gradient from one residual evaluation.
struct LossAndGrad {
  double loss = 0.0;  // ||Y Y^T - A||_F^2
  Matrix grad;        // 2 (Y Y^T - A) Y
};
LossAndGrad evaluate(const Factor& y, const SymMatrix& a);

// ||Y t^T + t Y^T||_F^2 + 2 <Y Y^T - A, t t^T>
double hess_form(const Factor& y, const SymMatrix& a, const Matrix& theta);

// min_Q ||y2 Q - y1||_F. Both factors must have full column rank.
double geodesic_distance(const Factor& y1, const Factor& y2);

// Y* (columns sqrt(sigma_i) v_i over the top-r eigenpairs) plus the spectral
// data the landscape predicates need.
struct SpectralTarget {
  Factor factor;
  std::vector<double> eigvals;      // top r, descending
  Matrix eigvecs;                   // n x r
  std::vector<double> all_eigvals;  // all n, descending
  double residual = 0.0;            // sum_{i>r} sigma_i^2
  double kappa_star = 1.0;          // sigma_1(Y*) / sigma_r(Y*)
  bool degenerate = false;          // repeated eigenvalue among the top r+1

  std::size_t r() const { return eigvals.size(); }
  double sigma_r_star() const;     // sigma_r(Y*) = sqrt(sigma_r(A))
  double norm_star() const;        // ||Y*|| = sqrt(sigma_1(A))
  double gram_norm_star() const;   // ||Y* Y*^T||_F
  double sigma_next() const;       // sigma_{r+1}(A), 0 when r = n
};

SpectralTarget optimal_factor(const Operator& a, std::size_t r);
SpectralTarget optimal_factor(const SymMatrix& a, std::size_t r);

// theta - Y Omega with Omega skew solving (Y^T Y) Omega + Omega (Y^T Y) =
// Y^T theta - theta^T Y, so that Y^T (theta - Y Omega) is symmetric.
TangentDirection horizontal_project(const Factor& y, const Matrix& theta);

}  // namespace snl
