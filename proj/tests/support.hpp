#pragma once

#include <gtest/gtest.h>

#include <cstdint>
#include <string>

#include "snl/matrix.hpp"
#include "snl/random.hpp"

namespace snl::testing {

// Largest absolute entrywise difference; shapes must agree.
double max_abs_diff(const Matrix& a, const Matrix& b);

::testing::AssertionResult matrices_near(const Matrix& a, const Matrix& b, double tol);

// Symmetric positive definite with distinct eigenvalues in [lo, hi].
SymMatrix random_spd(std::size_t n, Rng& rng, double lo = 0.5, double hi = 5.0);

// Unit-Frobenius random direction.
Matrix random_unit(std::size_t n, std::size_t r, Rng& rng);

}  // namespace snl::testing

#define EXPECT_MATRIX_NEAR(a, b, tol) EXPECT_TRUE(::snl::testing::matrices_near((a), (b), (tol)))
