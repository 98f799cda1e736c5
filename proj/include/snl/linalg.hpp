#pragma once

#include <cstddef>
#include <vector>

#include "snl/matrix.hpp"

namespace snl {

// Full symmetric eigendecomposition. values are non-increasing; column i of
// vectors is the unit eigenvector for values[i], with its largest-magnitude
// entry made positive (lowest index wins ties).
struct EigDecomp {
  std::vector<double> values;
  Matrix vectors;
};

// Thin SVD of an n x r matrix (n >= r): m = u * diag(s) * vt.
struct SvdDecomp {
  Matrix u;               // n x r, orthonormal columns
  std::vector<double> s;  // length r, non-increasing, >= 0
  Matrix vt;              // r x r, orthogonal
};

struct ProcrustesResult {
  Matrix q;      // r x r orthogonal, minimizes ||y2 q - y1||_F
  double dist;   // ||y2 q - y1||_F
  bool unique;   // false when y1^T y2 is singular (minimizer not unique)
};

// Cyclic Jacobi; deterministic sweep order (p < q, row by row).
EigDecomp sym_eig(const SymMatrix& m);

// One-sided (Hestenes) Jacobi on the columns of m. Columns of u belonging to
// zero singular values are completed by Gram-Schmidt.
SvdDecomp thin_svd(const Matrix& m);

ProcrustesResult procrustes_align(const Matrix& y1, const Matrix& y2);

// Largest singular value; works for any shape.
double spectral_norm(const Matrix& m);

// Singular values of any shape, non-increasing, length min(rows, cols).
std::vector<double> singular_values(const Matrix& m);

// Sine of the largest principal angle between the column spans of two
// matrices with orthonormal columns.
double max_principal_angle_sine(const Matrix& u1, const Matrix& u2);

// Columns [0, k) of a matrix.
Matrix leading_columns(const Matrix& m, std::size_t k);

}  // namespace snl
