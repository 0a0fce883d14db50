// NEON kernel variants for aarch64 (2 x f64 lanes).

#include "kernels_detail.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstring>

namespace gasdrift::kernels::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nt_neon(const double* a, const double* b, double* c,
                  std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = dot_neon(ai, b + j * k, k);
  }
}

void gemm_nn_neon(const double* a, const double* b, double* c,
                  std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    std::memset(ci, 0, n * sizeof(double));
    const double* ai = a + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      axpy_neon(ai[l], b + l * n, ci, n);
    }
  }
}

void gemm_tn_neon(const double* a, const double* b, double* c,
                  std::size_t m, std::size_t n, std::size_t k) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t l = 0; l < k; ++l) {
    const double* al = a + l * m;
    const double* bl = b + l * n;
    for (std::size_t i = 0; i < m; ++i) {
      axpy_neon(al[i], bl, c + i * n, n);
    }
  }
}

void adam_step_neon(double* w, const double* g, double* m, double* v,
                    std::size_t n, double lr, double b1, double b2,
                    double eps, double b1t, double b2t) {
  const double mc = 1.0 / (1.0 - b1t);
  const double vc = 1.0 / (1.0 - b2t);
  const float64x2_t vb1 = vdupq_n_f64(b1);
  const float64x2_t vb2 = vdupq_n_f64(b2);
  const float64x2_t vb1c = vdupq_n_f64(1.0 - b1);
  const float64x2_t vb2c = vdupq_n_f64(1.0 - b2);
  const float64x2_t vmc = vdupq_n_f64(mc);
  const float64x2_t vvc = vdupq_n_f64(vc);
  const float64x2_t vlr = vdupq_n_f64(lr);
  const float64x2_t veps = vdupq_n_f64(eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vg = vld1q_f64(g + i);
    float64x2_t vm = vld1q_f64(m + i);
    float64x2_t vv = vld1q_f64(v + i);
    vm = vfmaq_f64(vmulq_f64(vb1c, vg), vb1, vm);
    vv = vfmaq_f64(vmulq_f64(vb2c, vmulq_f64(vg, vg)), vb2, vv);
    vst1q_f64(m + i, vm);
    vst1q_f64(v + i, vv);
    const float64x2_t mhat = vmulq_f64(vm, vmc);
    const float64x2_t denom =
        vaddq_f64(vsqrtq_f64(vmulq_f64(vv, vvc)), veps);
    float64x2_t vw = vld1q_f64(w + i);
    vw = vsubq_f64(vw, vdivq_f64(vmulq_f64(vlr, mhat), denom));
    vst1q_f64(w + i, vw);
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    w[i] -= lr * (m[i] * mc) / (std::sqrt(v[i] * vc) + eps);
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t{dot_neon,     axpy_neon,    gemm_nt_neon,
                             gemm_nn_neon, gemm_tn_neon, adam_step_neon};
  return t;
}

}  // namespace gasdrift::kernels::detail

#endif  // aarch64
