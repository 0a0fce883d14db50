#include "gasdrift/ood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gasdrift::ood {

namespace {

/// Lower Cholesky of a 3x3 symmetric matrix; false when a pivot is not
/// strictly positive.
bool cholesky3(const std::array<double, 9>& s, std::array<double, 9>& l) {
  l.fill(0.0);
  for (std::size_t i = 0; i < kDim; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = s[i * kDim + j];
      for (std::size_t k = 0; k < j; ++k) {
        sum -= l[i * kDim + k] * l[j * kDim + k];
      }
      if (i == j) {
        if (!(sum > 0.0)) return false;
        l[i * kDim + i] = std::sqrt(sum);
      } else {
        l[i * kDim + j] = sum / l[j * kDim + j];
      }
    }
  }
  return true;
}

}  // namespace

GaussianProfile fit_profile(const Matrix& features) {
  const std::size_t n = features.rows();
  if (features.cols() != kDim) {
    throw std::invalid_argument("fit_profile: features must have 3 columns");
  }
  if (n < 4) {
    throw std::invalid_argument("fit_profile: need at least 4 rows");
  }

  GaussianProfile prof;
  prof.n_train = n;
  for (std::size_t j = 0; j < kDim; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += features(i, j);
    prof.mean[j] = s / static_cast<double>(n);
  }
  for (std::size_t a = 0; a < kDim; ++a) {
    for (std::size_t b = a; b < kDim; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s += (features(i, a) - prof.mean[a]) * (features(i, b) - prof.mean[b]);
      }
      const double cov = s / static_cast<double>(n - 1);
      prof.cov[a * kDim + b] = cov;
      prof.cov[b * kDim + a] = cov;
    }
  }

  if (!cholesky3(prof.cov, prof.chol)) {
    const double trace = prof.cov[0] + prof.cov[4] + prof.cov[8];
    const double ridge = 1e-9 * trace / 3.0;
    auto regularized = prof.cov;
    for (std::size_t d = 0; d < kDim; ++d) regularized[d * kDim + d] += ridge;
    if (!cholesky3(regularized, prof.chol)) {
      throw std::domain_error(
          "fit_profile: covariance is degenerate (zero-variance feature)");
    }
    prof.cov = regularized;
  }
  return prof;
}

double mahalanobis(const GaussianProfile& profile, const Vec3& x) {
  // Forward solve L z = (x - mu); the quadratic form is then |z|^2.
  Vec3 d{x[0] - profile.mean[0], x[1] - profile.mean[1],
         x[2] - profile.mean[2]};
  Vec3 z{};
  const auto& l = profile.chol;
  for (std::size_t i = 0; i < kDim; ++i) {
    double sum = d[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l[i * kDim + k] * z[k];
    z[i] = sum / l[i * kDim + i];
  }
  return std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
}

std::vector<double> distances(const GaussianProfile& profile,
                              const datagen::Dataset& dataset) {
  std::vector<double> out;
  out.reserve(dataset.records.size());
  for (const auto& r : dataset.records) {
    out.push_back(mahalanobis(profile, {r.T, r.V, r.N}));
  }
  return out;
}

OodThreshold threshold_from_training(std::span<const double> train_distances,
                                     double percentile) {
  if (train_distances.empty()) {
    throw std::invalid_argument("threshold_from_training: empty distances");
  }
  if (!(percentile > 0.0 && percentile < 100.0)) {
    throw std::invalid_argument(
        "threshold_from_training: percentile must be in (0, 100)");
  }
  std::vector<double> sorted(train_distances.begin(), train_distances.end());
  std::sort(sorted.begin(), sorted.end());

  const double h =
      (static_cast<double>(sorted.size()) - 1.0) * (percentile / 100.0);
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  double value = sorted[lo];
  if (lo + 1 < sorted.size()) value += frac * (sorted[lo + 1] - sorted[lo]);

  return {percentile, value, sorted.size()};
}

Matrix feature_matrix(std::span<const datagen::GasRecord> records) {
  Matrix m(records.size(), kDim);
  for (std::size_t i = 0; i < records.size(); ++i) {
    m(i, 0) = records[i].T;
    m(i, 1) = records[i].V;
    m(i, 2) = records[i].N;
  }
  return m;
}

}  // namespace gasdrift::ood
