// Histogram-based divergence estimation between two 1-D sample sets.
//
// Both samples are binned on shared edges spanning the union of the data,
// the bin masses are floored at a small epsilon (so disjoint tails stay
// finite), and KL divergence / Jensen-Shannon distance are computed on the
// resulting probability vectors. KL uses natural logs (nats); JS uses
// base-2 logs so the distance is bounded by [0, 1].

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gasdrift::similarity {

struct BinningConfig {
  std::size_t n_bins = 50;
  double smoothing_eps = 1e-10;
};

struct Histogram {
  std::vector<double> edges;  // n_bins + 1, strictly increasing
  std::vector<double> probs;  // n_bins, sums to 1

  std::size_t n_bins() const { return probs.size(); }
};

struct DivergenceReport {
  double kl_nats = 0.0;
  double js_distance = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  BinningConfig binning;
};

void validate(const BinningConfig& config);

/// Bin both sample sets on shared edges spanning [min(union), max(union)].
/// Throws std::invalid_argument on empty input and std::domain_error when
/// every value in the union is identical (no usable support).
std::pair<Histogram, Histogram> build_shared_histograms(
    std::span<const double> xs, std::span<const double> ys,
    const BinningConfig& config = {});

/// KL(p || q) in nats. Requires identical edges (std::invalid_argument).
/// Zero-probability bins of p contribute nothing.
double kl_divergence(const Histogram& p, const Histogram& q);

/// Jensen-Shannon distance: sqrt of the base-2 JS divergence against the
/// mixture M = (P+Q)/2. Symmetric, in [0, 1]. Requires identical edges.
double js_distance(const Histogram& p, const Histogram& q);

/// Histograms + both metrics in one call; KL direction is KL(a || b),
/// with a the reference (training) sample.
DivergenceReport divergence_report(std::span<const double> sample_a,
                                   std::span<const double> sample_b,
                                   const BinningConfig& config = {});

}  // namespace gasdrift::similarity
