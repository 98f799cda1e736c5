#include <cstdlib>
#include <string_view>

#include "snl/kernels.hpp"

namespace snl::kernels {

#if defined(SNL_HAVE_AVX2)
const Table& avx2_table_unchecked();
#endif
#if defined(SNL_HAVE_NEON)
const Table& neon_table_unchecked();
#endif

const Table* avx2_table() {
#if defined(SNL_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const Table* neon_table() {
#if defined(SNL_HAVE_NEON)
  // Advanced SIMD is mandatory on AArch64.
  return &neon_table_unchecked();
#else
  return nullptr;
#endif
}

namespace {

const Table& select() {
  if (const char* forced = std::getenv("SNL_KERNELS"); forced != nullptr) {
    if (std::string_view(forced) == "scalar") return scalar_table();
  }
  if (const Table* t = avx2_table()) return *t;
  if (const Table* t = neon_table()) return *t;
  return scalar_table();
}

}  // namespace

const Table& active() {
  static const Table& table = select();
  return table;
}

}  // namespace snl::kernels
