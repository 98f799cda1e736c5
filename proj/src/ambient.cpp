#include "snl/ambient.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "snl/error.hpp"
#include "snl/kernels.hpp"

namespace snl {

namespace {

void require_conformable(const Factor& y, const SymMatrix& a, const char* what) {
  if (y.n() != a.dim()) {
    throw InputError(std::string(what) + ": factor has " + std::to_string(y.n()) +
                     " rows but operator has dimension " + std::to_string(a.dim()));
  }
}

// Y Y^T - A
Matrix residual(const Factor& y, const SymMatrix& a) {
  Matrix e = matmul_nt(y.mat(), y.mat());
  e -= a.mat();
  return e;
}

}  // namespace

bool is_full_rank(const Matrix& y) {
  if (y.cols() == 0 || y.rows() < y.cols()) return false;
  const auto s = thin_svd(y).s;
  return s.front() > 0.0 && s.back() > 1e-12 * s.front();
}

double loss(const Factor& y, const SymMatrix& a) {
  require_conformable(y, a, "loss");
  const Matrix e = residual(y, a);
  return kernels::dot(e.data(), e.data());
}

double loss(const Factor& y, const Operator& a) { return loss(y, a.matrix); }

TangentDirection riem_grad(const Factor& y, const SymMatrix& a) {
  require_conformable(y, a, "riem_grad");
  Matrix g = matmul(residual(y, a), y.mat());
  g *= 2.0;
  return {std::move(g), true};
}

LossAndGrad evaluate(const Factor& y, const SymMatrix& a) {
  require_conformable(y, a, "evaluate");
  const Matrix e = residual(y, a);
  LossAndGrad out{kernels::dot(e.data(), e.data()), matmul(e, y.mat())};
  out.grad *= 2.0;
  return out;
}

double hess_form(const Factor& y, const SymMatrix& a, const Matrix& theta) {
  require_conformable(y, a, "hess_form");
  if (theta.rows() != y.n() || theta.cols() != y.r())
    throw InputError("hess_form: direction shape differs from factor");
  // ||Y t^T + t Y^T||^2 = 2 <Y^T Y, t^T t> + 2 tr((Y^T t)^2)
  const Matrix yty = matmul_tn(y.mat(), y.mat());
  const Matrix ttt = matmul_tn(theta, theta);
  const Matrix ytt = matmul_tn(y.mat(), theta);
  const double sym_part = 2.0 * frobenius_dot(yty, ttt) + 2.0 * frobenius_dot(ytt, ytt.transposed());
  // <Y Y^T - A, t t^T> = ||Y^T t||^2 - <t, A t>
  const double curvature = frobenius_dot(ytt, ytt) - frobenius_dot(theta, matmul(a.mat(), theta));
  return sym_part + 2.0 * curvature;
}

double geodesic_distance(const Factor& y1, const Factor& y2) {
  if (!is_full_rank(y1.mat())) throw InputError("geodesic_distance: first factor is rank-deficient");
  if (!is_full_rank(y2.mat())) throw InputError("geodesic_distance: second factor is rank-deficient");
  return procrustes_align(y1.mat(), y2.mat()).dist;
}

double SpectralTarget::sigma_r_star() const { return std::sqrt(eigvals.back()); }
double SpectralTarget::norm_star() const { return std::sqrt(eigvals.front()); }
double SpectralTarget::gram_norm_star() const {
  double s = 0.0;
  for (double v : eigvals) s += v * v;
  return std::sqrt(s);
}
double SpectralTarget::sigma_next() const {
  const std::size_t k = r();
  return k < all_eigvals.size() ? all_eigvals[k] : 0.0;
}

namespace {

SpectralTarget target_from_eig(const EigDecomp& eig, std::size_t r) {
  const std::size_t n = eig.values.size();
  if (r < 1 || r > n) throw InputError("optimal_factor: need 1 <= r <= n");
  if (!(eig.values[r - 1] > 0.0))
    throw InputError("optimal_factor: sigma_r(A) must be positive, got " +
                     std::to_string(eig.values[r - 1]));
  SpectralTarget t;
  t.all_eigvals = eig.values;
  t.eigvals.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(r));
  t.eigvecs = leading_columns(eig.vectors, r);
  Matrix y = t.eigvecs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j) y(i, j) *= std::sqrt(t.eigvals[j]);
  t.factor = Factor(std::move(y));
  for (std::size_t i = r; i < n; ++i) t.residual += eig.values[i] * eig.values[i];
  t.kappa_star = std::sqrt(t.eigvals.front() / t.eigvals.back());
  const std::size_t last = std::min(r + 1, n);
  for (std::size_t i = 0; i + 1 < last; ++i) {
    const double tol = 1e-10 * (1.0 + std::abs(eig.values[i]));
    if (eig.values[i] - eig.values[i + 1] <= tol) t.degenerate = true;
  }
  return t;
}

}  // namespace

SpectralTarget optimal_factor(const Operator& a, std::size_t r) { return target_from_eig(a.eig, r); }

SpectralTarget optimal_factor(const SymMatrix& a, std::size_t r) {
  return target_from_eig(sym_eig(a), r);
}

TangentDirection horizontal_project(const Factor& y, const Matrix& theta) {
  if (theta.rows() != y.n() || theta.cols() != y.r())
    throw InputError("horizontal_project: direction shape differs from factor");
  if (!is_full_rank(y.mat())) throw InputError("horizontal_project: factor is rank-deficient");
  const std::size_t r = y.r();
  const EigDecomp m = sym_eig(SymMatrix(matmul_tn(y.mat(), y.mat())));
  const Matrix yt_theta = matmul_tn(y.mat(), theta);
  const Matrix skew = yt_theta - yt_theta.transposed();
  // In the eigenbasis of Y^T Y the Lyapunov equation is diagonal.
  Matrix rotated = matmul_tn(m.vectors, matmul(skew, m.vectors));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) rotated(i, j) /= (m.values[i] + m.values[j]);
  const Matrix omega = matmul_nt(matmul(m.vectors, rotated), m.vectors);
  return {theta - matmul(y.mat(), omega), true};
}

}  // namespace snl
