// Internal: per-backend kernel tables wired up by kernels_dispatch.cpp.

#pragma once

#include <cstddef>

namespace gasdrift::kernels::detail {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*gemm_nt)(const double*, const double*, double*, std::size_t,
                  std::size_t, std::size_t);
  void (*gemm_nn)(const double*, const double*, double*, std::size_t,
                  std::size_t, std::size_t);
  void (*gemm_tn)(const double*, const double*, double*, std::size_t,
                  std::size_t, std::size_t);
  void (*adam_step)(double*, const double*, double*, double*, std::size_t,
                    double, double, double, double, double, double);
};

const KernelTable& scalar_table();

#if defined(__x86_64__) || defined(_M_X64)
#define GASDRIFT_HAVE_AVX2_TU 1
const KernelTable& avx2_table();
#endif

#if defined(__aarch64__)
#define GASDRIFT_HAVE_NEON_TU 1
const KernelTable& neon_table();
#endif

}  // namespace gasdrift::kernels::detail
