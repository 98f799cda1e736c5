#include "snl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "snl/error.hpp"
#include "snl/kernels.hpp"

namespace snl {

namespace {

constexpr double kJacobiTol = 1e-12;
constexpr int kMaxSweeps = 100;

void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) throw InputError(std::string(what) + ": non-finite entries");
}

double off_diagonal_norm(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) acc += a(i, j) * a(i, j);
  return std::sqrt(acc);
}

void fix_sign(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (v[best] < 0.0)
    for (double& x : v) x = -x;
}

std::vector<std::size_t> descending_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

// Orthonormalizes `v` against the first `count` rows of `basis` (rows are
// vectors). Two passes of modified Gram-Schmidt. Returns the remaining norm.
double orthogonalize_against(std::span<double> v, const Matrix& basis, std::size_t count) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t k = 0; k < count; ++k) {
      const double proj = kernels::dot(basis.row(k), v);
      kernels::axpy(-proj, basis.row(k), v);
    }
  }
  const double norm = std::sqrt(kernels::dot(v, v));
  if (norm > 0.0)
    for (double& x : v) x /= norm;
  return norm;
}

}  // namespace

EigDecomp sym_eig(const SymMatrix& m) {
  require_finite(m.mat(), "sym_eig");
  const std::size_t n = m.dim();
  Matrix a = m.mat();
  // Rows of vt are the eigenvectors; rotations then act on contiguous rows.
  Matrix vt = Matrix::identity(n);

  const double scale = frobenius_norm(a);
  const double target = kJacobiTol * (scale > 0.0 ? scale : 1.0);

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        kernels::rot(a.row(p), a.row(q), c, s);
        for (std::size_t r = 0; r < n; ++r) {
          a(r, p) = a(p, r);
          a(r, q) = a(q, r);
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        kernels::rot(vt.row(p), vt.row(q), c, s);
      }
    }
  }
  if (sweep == kMaxSweeps && off_diagonal_norm(a) > target)
    throw NumericalError("sym_eig: Jacobi did not converge in 100 sweeps");

  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  const auto order = descending_order(diag);

  EigDecomp out{std::vector<double>(n), Matrix(n, n)};
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = diag[order[k]];
    std::copy(vt.row(order[k]).begin(), vt.row(order[k]).end(), v.begin());
    fix_sign(v);
    out.vectors.set_column(k, v);
  }
  return out;
}

SvdDecomp thin_svd(const Matrix& m) {
  require_finite(m, "thin_svd");
  const std::size_t n = m.rows();
  const std::size_t r = m.cols();
  if (r == 0 || n < r) throw InputError("thin_svd: requires rows >= cols >= 1");

  // Rows of `w` are the columns of m; rows of `vt_work` accumulate V^T.
  Matrix w = m.transposed();
  Matrix v_rows = Matrix::identity(r);
  constexpr double tol = 4.0 * std::numeric_limits<double>::epsilon();

  bool rotated = true;
  for (int sweep = 0; sweep < kMaxSweeps && rotated; ++sweep) {
    rotated = false;
    for (std::size_t p = 0; p + 1 < r; ++p) {
      for (std::size_t q = p + 1; q < r; ++q) {
        const double alpha = kernels::dot(w.row(p), w.row(p));
        const double beta = kernels::dot(w.row(q), w.row(q));
        const double gamma = kernels::dot(w.row(p), w.row(q));
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::hypot(zeta, 1.0));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        kernels::rot(w.row(p), w.row(q), c, s);
        kernels::rot(v_rows.row(p), v_rows.row(q), c, s);
      }
    }
  }

  std::vector<double> norms(r);
  for (std::size_t i = 0; i < r; ++i) norms[i] = std::sqrt(kernels::dot(w.row(i), w.row(i)));
  const auto order = descending_order(norms);
  const double smax = norms[order[0]];
  const double zero_tol = smax * std::numeric_limits<double>::epsilon();

  SvdDecomp out{Matrix(n, r), std::vector<double>(r), Matrix(r, r)};
  Matrix u_rows(r, n);
  std::size_t filled = 0;
  std::vector<std::size_t> deficient;
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t src = order[k];
    std::copy(v_rows.row(src).begin(), v_rows.row(src).end(), out.vt.row(k).begin());
    if (norms[src] > zero_tol && norms[src] > 0.0) {
      out.s[k] = norms[src];
      auto dst = u_rows.row(k);
      for (std::size_t i = 0; i < n; ++i) dst[i] = w(src, i) / norms[src];
      ++filled;
    } else {
      out.s[k] = 0.0;
      deficient.push_back(k);
    }
  }

  // Complete U for zero singular values: try standard basis vectors in order
  // and keep the first with a substantial component outside the current span.
  if (!deficient.empty()) {
    Matrix basis(r, n);
    std::size_t count = 0;
    for (std::size_t k = 0; k < r; ++k) {
      if (out.s[k] > 0.0) {
        std::copy(u_rows.row(k).begin(), u_rows.row(k).end(), basis.row(count).begin());
        ++count;
      }
    }
    std::size_t next_e = 0;
    std::vector<double> cand(n);
    for (std::size_t k : deficient) {
      while (true) {
        if (next_e >= n) throw NumericalError("thin_svd: failed to complete orthonormal basis");
        std::fill(cand.begin(), cand.end(), 0.0);
        cand[next_e++] = 1.0;
        if (orthogonalize_against(cand, basis, count) > 0.5) break;
      }
      std::copy(cand.begin(), cand.end(), u_rows.row(k).begin());
      std::copy(cand.begin(), cand.end(), basis.row(count).begin());
      ++count;
    }
  }
  out.u = u_rows.transposed();
  return out;
}

ProcrustesResult procrustes_align(const Matrix& y1, const Matrix& y2) {
  if (y1.rows() != y2.rows() || y1.cols() != y2.cols())
    throw InputError("procrustes_align: factor shapes differ");
  const SvdDecomp svd = thin_svd(matmul_tn(y1, y2));
  // q = Q_V Q_U^T with y1^T y2 = Q_U S Q_V^T.
  Matrix q = matmul(svd.u, svd.vt).transposed();
  const double dist = frobenius_norm(matmul(y2, q) - y1);
  const double smax = svd.s.front();
  const double smin = svd.s.back();
  const bool unique = smax > 0.0 && smin > 1e-12 * smax;
  return {std::move(q), dist, unique};
}

std::vector<double> singular_values(const Matrix& m) {
  if (m.empty()) return {};
  return m.rows() >= m.cols() ? thin_svd(m).s : thin_svd(m.transposed()).s;
}

double spectral_norm(const Matrix& m) {
  const auto s = singular_values(m);
  return s.empty() ? 0.0 : s.front();
}

double max_principal_angle_sine(const Matrix& u1, const Matrix& u2) {
  if (u1.rows() != u2.rows()) throw InputError("max_principal_angle_sine: row count mismatch");
  // || (I - U1 U1^T) U2 ||_2
  const Matrix residual = u2 - matmul(u1, matmul_tn(u1, u2));
  return spectral_norm(residual);
}

Matrix leading_columns(const Matrix& m, std::size_t k) {
  if (k > m.cols()) throw InputError("leading_columns: k exceeds column count");
  Matrix out(m.rows(), k);
  for (std::size_t i = 0; i < m.rows(); ++i)
    std::copy_n(m.row(i).begin(), k, out.row(i).begin());
  return out;
}

}  // namespace snl
