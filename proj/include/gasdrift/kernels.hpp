// Dispatched numeric kernels: scalar reference implementations plus SIMD
// variants (AVX2/FMA on x86-64, NEON on aarch64) selected at runtime.
//
// All kernels operate on contiguous double arrays. Matrices are row-major.
// The SIMD variants are equivalence-tested against the scalar reference;
// they may differ from it by normal floating-point reassociation error.
//
// Backend selection order: the GASDRIFT_KERNELS environment variable
// ("scalar", "avx2", "neon") if set and available, otherwise the widest
// instruction set the CPU supports. The choice is made once per process,
// so repeated runs on one machine are bit-reproducible.

#pragma once

#include <cstddef>
#include <string>

namespace gasdrift::kernels {

enum class Backend { Scalar, Avx2, Neon };

const char* backend_name(Backend b);
bool backend_available(Backend b);

/// Backend used by all dispatched kernels. Resolved on first call.
Backend active_backend();

/// Force a backend (tests use this to cross-check variants).
/// Throws std::invalid_argument if the backend is unavailable.
void set_backend(Backend b);

// ---- dispatched kernels ----------------------------------------------

/// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

/// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// C (m x n) = A (m x k) * B^T, where B is (n x k). Rows of A and B are
/// the contraction axis, so both sides stream contiguously.
void gemm_nt(const double* a, const double* b, double* c,
             std::size_t m, std::size_t n, std::size_t k);

/// C (m x n) = A (m x k) * B (k x n)
void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t n, std::size_t k);

/// C (m x n) = A^T * B, where A is (k x m) and B is (k x n)
void gemm_tn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t n, std::size_t k);

/// One adaptive-moment update step over a parameter block.
/// m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2;
/// w -= lr * (m / (1-b1t)) / (sqrt(v / (1-b2t)) + eps)
/// b1t/b2t are the decay coefficients raised to the step count.
void adam_step(double* w, const double* g, double* m, double* v,
               std::size_t n, double lr, double b1, double b2, double eps,
               double b1t, double b2t);

// ---- plain (non-dispatched) elementwise helpers ----------------------

/// ELU: z for z > 0, alpha*(e^z - 1) otherwise. In-place allowed (out == z).
void elu(const double* z, double* out, std::size_t n, double alpha);

/// Multiply g elementwise by ELU'(z) recovered from the activation
/// a = ELU(z): derivative is 1 for a > 0, a + alpha otherwise.
void elu_grad_from_output(const double* a, double* g, std::size_t n,
                          double alpha);

}  // namespace gasdrift::kernels
