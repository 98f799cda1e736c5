#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "snl/kernels.hpp"

namespace snl::kernels {
namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::vector<const Table*> simd_tables() {
  std::vector<const Table*> out;
  if (const Table* t = avx2_table()) out.push_back(t);
  if (const Table* t = neon_table()) out.push_back(t);
  return out;
}

TEST(Kernels, ScalarReferenceValues) {
  const Table& s = scalar_table();
  const double x[] = {1.0, 2.0, 3.0};
  const double y[] = {4.0, -5.0, 6.0};
  EXPECT_DOUBLE_EQ(s.dot(x, y, 3), 12.0);
  EXPECT_DOUBLE_EQ(s.sqdist(x, y, 3), 9.0 + 49.0 + 9.0);
  double z[] = {1.0, 1.0, 1.0};
  s.axpy(2.0, x, z, 3);
  EXPECT_DOUBLE_EQ(z[2], 7.0);
  double a[] = {1.0}, b[] = {0.0};
  s.rot(a, b, 0.0, 1.0, 1);  // quarter turn
  EXPECT_DOUBLE_EQ(a[0], 0.0);
  EXPECT_DOUBLE_EQ(b[0], 1.0);
}

TEST(Kernels, ActiveTableIsStable) {
  EXPECT_EQ(&active(), &active());
  EXPECT_NE(active().name, nullptr);
}

TEST(Kernels, SimdMatchesScalarAcrossLengthsAndTails) {
  const auto tables = simd_tables();
  if (tables.empty()) GTEST_SKIP() << "no SIMD variant on this CPU";
  const Table& ref = scalar_table();
  std::mt19937_64 rng(11);
  for (const Table* t : tables) {
    for (std::size_t n = 0; n <= 67; ++n) {
      const auto x = random_vector(n, rng);
      const auto y = random_vector(n, rng);
      const double tol = 1e-14 * (1.0 + static_cast<double>(n)) * 4.0;
      EXPECT_NEAR(t->dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n), tol) << t->name << " n=" << n;
      EXPECT_NEAR(t->sqdist(x.data(), y.data(), n), ref.sqdist(x.data(), y.data(), n), 4.0 * tol);

      auto ya = y, yb = y;
      t->axpy(-0.7, x.data(), ya.data(), n);
      ref.axpy(-0.7, x.data(), yb.data(), n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ya[i], yb[i], 1e-15 * 8);

      auto xa = x, xb = x;
      ya = y;
      yb = y;
      const double c = std::cos(0.3), s = std::sin(0.3);
      t->rot(xa.data(), ya.data(), c, s, n);
      ref.rot(xb.data(), yb.data(), c, s, n);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(xa[i], xb[i], 1e-15 * 8);
        EXPECT_NEAR(ya[i], yb[i], 1e-15 * 8);
      }
    }
  }
}

TEST(Kernels, SimdHandlesUnalignedPointers) {
  const auto tables = simd_tables();
  if (tables.empty()) GTEST_SKIP() << "no SIMD variant on this CPU";
  std::mt19937_64 rng(3);
  const auto x = random_vector(41, rng);
  const auto y = random_vector(41, rng);
  for (const Table* t : tables)
    EXPECT_NEAR(t->dot(x.data() + 1, y.data() + 3, 37),
                scalar_table().dot(x.data() + 1, y.data() + 3, 37), 1e-12);
}

}  // namespace
}  // namespace snl::kernels
