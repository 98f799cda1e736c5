#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "snl/matrix.hpp"

namespace snl {

using Rng = std::mt19937_64;

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double stddev = 1.0);

// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the sign
// of R's diagonal folded in).
Matrix random_orthogonal(std::size_t n, Rng& rng);

// Q diag(eigvals) Q^T with Haar Q.
Matrix random_symmetric_with_spectrum(const std::vector<double>& eigvals, Rng& rng);

// Random PD matrix with distinct eigenvalues drawn from [lo, hi].
Matrix random_pd(std::size_t n, Rng& rng, double lo = 0.5, double hi = 5.0);

}  // namespace snl
