#include "gasdrift/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gasdrift::similarity {

void validate(const BinningConfig& c) {
  if (c.n_bins < 2) {
    throw std::invalid_argument("BinningConfig: n_bins must be >= 2");
  }
  if (!(c.smoothing_eps > 0.0) ||
      !(c.smoothing_eps < 1.0 / static_cast<double>(c.n_bins))) {
    throw std::invalid_argument(
        "BinningConfig: smoothing_eps must lie in (0, 1/n_bins)");
  }
}

namespace {

Histogram bin_samples(std::span<const double> xs, double lo, double hi,
                      const BinningConfig& config) {
  const std::size_t nb = config.n_bins;
  Histogram h;
  h.edges.resize(nb + 1);
  const double width = (hi - lo) / static_cast<double>(nb);
  for (std::size_t i = 0; i <= nb; ++i) {
    h.edges[i] = lo + width * static_cast<double>(i);
  }
  h.edges.back() = hi;

  std::vector<double> counts(nb, 0.0);
  for (double x : xs) {
    // clamp puts x == hi into the last bin
    const auto idx = static_cast<std::size_t>(
        std::clamp((x - lo) / width, 0.0, static_cast<double>(nb - 1)));
    counts[idx] += 1.0;
  }

  const double inv_n = 1.0 / static_cast<double>(xs.size());
  h.probs.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) h.probs[i] = counts[i] * inv_n;

  // Floor, renormalize, floor again: the second pass restores the epsilon
  // floor lost to renormalization; the leftover mass error is O(n_bins^2
  // * eps^2), far below the 1e-12 sum tolerance.
  const double eps = config.smoothing_eps;
  double total = 0.0;
  for (auto& p : h.probs) {
    p = std::max(p, eps);
    total += p;
  }
  for (auto& p : h.probs) p = std::max(p / total, eps);
  return h;
}

void require_shared_edges(const Histogram& p, const Histogram& q) {
  if (p.edges != q.edges || p.probs.size() != q.probs.size()) {
    throw std::invalid_argument("histograms do not share bin edges");
  }
}

}  // namespace

std::pair<Histogram, Histogram> build_shared_histograms(
    std::span<const double> xs, std::span<const double> ys,
    const BinningConfig& config) {
  validate(config);
  if (xs.empty() || ys.empty()) {
    throw std::invalid_argument("build_shared_histograms: empty sample set");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  for (double y : ys) {
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  if (!(lo < hi)) {
    throw std::domain_error(
        "build_shared_histograms: all values identical, support is a point");
  }
  return {bin_samples(xs, lo, hi, config), bin_samples(ys, lo, hi, config)};
}

double kl_divergence(const Histogram& p, const Histogram& q) {
  require_shared_edges(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double pi = p.probs[i];
    if (pi <= 0.0) continue;
    s += pi * std::log(pi / q.probs[i]);
  }
  return std::max(s, 0.0);
}

namespace {

/// Base-2 KL of p against the elementwise mixture (p+q)/2.
double kl2_against_mixture(const std::vector<double>& p,
                           const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    s += p[i] * std::log2(p[i] / (0.5 * (p[i] + q[i])));
  }
  return s;
}

}  // namespace

double js_distance(const Histogram& p, const Histogram& q) {
  require_shared_edges(p, q);
  const double jsd = 0.5 * kl2_against_mixture(p.probs, q.probs) +
                     0.5 * kl2_against_mixture(q.probs, p.probs);
  return std::sqrt(std::clamp(jsd, 0.0, 1.0));
}

DivergenceReport divergence_report(std::span<const double> sample_a,
                                   std::span<const double> sample_b,
                                   const BinningConfig& config) {
  auto [ha, hb] = build_shared_histograms(sample_a, sample_b, config);
  DivergenceReport rep;
  rep.kl_nats = kl_divergence(ha, hb);
  rep.js_distance = js_distance(ha, hb);
  rep.n_a = sample_a.size();
  rep.n_b = sample_b.size();
  rep.binning = config;
  return rep;
}

}  // namespace gasdrift::similarity
