// Out-of-distribution scoring: a Gaussian profile (mean + covariance) is
// fitted on training features and points are scored by Mahalanobis
// distance, with an empirical-percentile threshold calibrated on the
// training distances.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "gasdrift/datagen.hpp"
#include "gasdrift/matrix.hpp"

namespace gasdrift::ood {

inline constexpr std::size_t kDim = 3;  // (T, V, N)

using Vec3 = std::array<double, kDim>;

/// Mean and covariance of the training features, with the lower-triangular
/// Cholesky factor of the covariance kept for solves; the covariance is
/// never inverted explicitly.
struct GaussianProfile {
  Vec3 mean{};
  std::array<double, kDim * kDim> cov{};   // row-major, symmetric
  std::array<double, kDim * kDim> chol{};  // lower triangular, L L^T = cov
  std::size_t n_train = 0;
};

struct OodThreshold {
  double percentile = 95.0;
  double value = 0.0;
  std::size_t n_train = 0;
};

/// Fit mean and sample covariance (divisor n-1) on an n x 3 feature matrix
/// with columns (T, V, N). If the Cholesky factorization fails, a ridge of
/// 1e-9 * trace(S)/3 is added to the diagonal and the factorization is
/// retried once; if it still fails the features are degenerate and a
/// std::domain_error is thrown.
GaussianProfile fit_profile(const Matrix& features);

/// sqrt((x - mu)^T S^-1 (x - mu)) via two triangular solves.
double mahalanobis(const GaussianProfile& profile, const Vec3& x);

/// Elementwise mahalanobis over the (T, V, N) of each record.
std::vector<double> distances(const GaussianProfile& profile,
                              const datagen::Dataset& dataset);

/// Empirical percentile of the training distances, linearly interpolated
/// between order statistics (index h = (n-1) * p/100).
OodThreshold threshold_from_training(std::span<const double> train_distances,
                                     double percentile = 95.0);

/// Feature matrix (rows of T, V, N) from a record range.
Matrix feature_matrix(std::span<const datagen::GasRecord> records);

}  // namespace gasdrift::ood
