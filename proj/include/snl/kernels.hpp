#pragma once

// Data-parallel inner loops shared by every module.
//
// Each kernel has a scalar reference implementation and, where the target
// supports it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The active
// table is chosen once at first use from the CPU feature bits; setting the
// environment variable SNL_KERNELS=scalar forces the reference path.
//
// SIMD variants reassociate sums, so results agree with the scalar path to
// rounding, not bitwise. All loads are unaligned; tails are handled scalar.

#include <cstddef>
#include <span>

namespace snl::kernels {

struct Table {
  const char* name;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // (x, y) <- (c*x - s*y, s*x + c*y)
  void (*rot)(double* x, double* y, double c, double s, std::size_t n);
  // sum_i (x[i] - y[i])^2
  double (*sqdist)(const double* x, const double* y, std::size_t n);
};

const Table& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks the feature.
const Table* avx2_table();
const Table* neon_table();

const Table& active();

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void rot(std::span<double> x, std::span<double> y, double c, double s) {
  active().rot(x.data(), y.data(), c, s, x.size());
}

inline double sqdist(std::span<const double> x, std::span<const double> y) {
  return active().sqdist(x.data(), y.data(), x.size());
}

}  // namespace snl::kernels
