// Scalar reference kernels. These define the semantics the SIMD variants
// are tested against.

#include <cmath>
#include <cstring>

#include "kernels_detail.hpp"

namespace gasdrift::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nt_scalar(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      ci[j] = dot_scalar(ai, b + j * k, k);
    }
  }
}

void gemm_nn_scalar(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    std::memset(ci, 0, n * sizeof(double));
    const double* ai = a + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      axpy_scalar(ai[l], b + l * n, ci, n);
    }
  }
}

void gemm_tn_scalar(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t n, std::size_t k) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t l = 0; l < k; ++l) {
    const double* al = a + l * m;
    const double* bl = b + l * n;
    for (std::size_t i = 0; i < m; ++i) {
      axpy_scalar(al[i], bl, c + i * n, n);
    }
  }
}

void adam_step_scalar(double* w, const double* g, double* m, double* v,
                      std::size_t n, double lr, double b1, double b2,
                      double eps, double b1t, double b2t) {
  const double mc = 1.0 / (1.0 - b1t);
  const double vc = 1.0 / (1.0 - b2t);
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    w[i] -= lr * (m[i] * mc) / (std::sqrt(v[i] * vc) + eps);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{dot_scalar,     axpy_scalar, gemm_nt_scalar,
                             gemm_nn_scalar, gemm_tn_scalar, adam_step_scalar};
  return t;
}

}  // namespace gasdrift::kernels::detail
