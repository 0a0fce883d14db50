#include "gasdrift/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "kernels_detail.hpp"

namespace gasdrift::kernels {
namespace {

using detail::KernelTable;

const KernelTable* g_table = nullptr;
Backend g_backend = Backend::Scalar;

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(GASDRIFT_HAVE_AVX2_TU)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(GASDRIFT_HAVE_NEON_TU)
      return true;  // NEON is baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Backend b) {
  switch (b) {
#if defined(GASDRIFT_HAVE_AVX2_TU)
    case Backend::Avx2:
      return detail::avx2_table();
#endif
#if defined(GASDRIFT_HAVE_NEON_TU)
    case Backend::Neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

Backend pick_backend() {
  if (const char* env = std::getenv("GASDRIFT_KERNELS")) {
    Backend requested;
    if (std::strcmp(env, "scalar") == 0) {
      requested = Backend::Scalar;
    } else if (std::strcmp(env, "avx2") == 0) {
      requested = Backend::Avx2;
    } else if (std::strcmp(env, "neon") == 0) {
      requested = Backend::Neon;
    } else {
      throw std::invalid_argument(
          std::string("GASDRIFT_KERNELS: unknown backend '") + env + "'");
    }
    if (!cpu_supports(requested)) {
      throw std::invalid_argument(
          std::string("GASDRIFT_KERNELS: backend '") + env +
          "' not available on this machine");
    }
    return requested;
  }
  if (cpu_supports(Backend::Avx2)) return Backend::Avx2;
  if (cpu_supports(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

const KernelTable& table() {
  if (!g_table) {
    g_backend = pick_backend();
    g_table = &table_for(g_backend);
  }
  return *g_table;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "?";
}

bool backend_available(Backend b) { return cpu_supports(b); }

Backend active_backend() {
  table();
  return g_backend;
}

void set_backend(Backend b) {
  if (!cpu_supports(b)) {
    throw std::invalid_argument(std::string("kernel backend '") +
                                backend_name(b) + "' not available");
  }
  g_backend = b;
  g_table = &table_for(b);
}

double dot(const double* a, const double* b, std::size_t n) {
  return table().dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  table().axpy(alpha, x, y, n);
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
  table().gemm_nt(a, b, c, m, n, k);
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
  table().gemm_nn(a, b, c, m, n, k);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
  table().gemm_tn(a, b, c, m, n, k);
}

void adam_step(double* w, const double* g, double* m, double* v,
               std::size_t n, double lr, double b1, double b2, double eps,
               double b1t, double b2t) {
  table().adam_step(w, g, m, v, n, lr, b1, b2, eps, b1t, b2t);
}

void elu(const double* z, double* out, std::size_t n, double alpha) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = z[i] > 0.0 ? z[i] : alpha * std::expm1(z[i]);
  }
}

void elu_grad_from_output(const double* a, double* g, std::size_t n,
                          double alpha) {
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] <= 0.0) g[i] *= a[i] + alpha;
  }
}

}  // namespace gasdrift::kernels
