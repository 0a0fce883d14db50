// End-to-end experiment pipelines.
//
// Experiment 1 (target drift): train on ideal-gas data, evaluate
// generalization to the other gases of the built-in table; report
// KL/JS divergence of the pressure marginal and prediction MAPE per gas,
// plus divergence-vs-error correlations.
//
// Experiment 2 (covariate shift): train on dataset 1, score an
// in-distribution holdout and the shifted dataset 2 with MC-dropout
// predictions and Mahalanobis distances against the training profile.
//
// Every random stream is derived from one master seed, so a run is a pure
// function of (seed, config) and repeated runs emit identical bytes.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gasdrift/datagen.hpp"
#include "gasdrift/mlp.hpp"
#include "gasdrift/ood.hpp"
#include "gasdrift/similarity.hpp"

namespace gasdrift::experiments {

/// 100 * mean(|pred - true| / |true|). Throws std::domain_error when a
/// true value is zero, std::invalid_argument on length mismatch.
double mape(std::span<const double> y_true, std::span<const double> y_pred);

/// Linear correlation. Throws std::domain_error when either input is
/// constant.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Rank correlation; ties get their average rank.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct CorrelationReport {
  double pearson_r = 0.0;
  double spearman_rho = 0.0;
  std::size_t n = 0;
};

struct ExperimentConfig {
  std::size_t samples_per_dataset = 10000;
  double holdout_fraction = 0.2;
  similarity::BinningConfig binning{};
  mlp::NetworkConfig net{};
  mlp::TrainConfig train{};  // .seed is ignored; derived from master
  std::size_t mc_passes = 100;
  double threshold_percentile = 95.0;
};

// Seed-stream tags used with rng::derive_seed(master_seed, tag).
inline constexpr std::uint64_t kSeedTrain = 1;
inline constexpr std::uint64_t kSeedMcBase = 2;
inline constexpr std::uint64_t kSeedData = 100;  // + dataset index

struct Exp1Row {
  std::string gas;
  double kl_nats = 0.0;
  double js_distance = 0.0;
  double mape_pct = 0.0;
};

struct Exp1Result {
  std::vector<Exp1Row> rows;  // Table order, "Ideal Gas (subset)" first
  CorrelationReport kl_vs_mape;
  CorrelationReport js_vs_mape;
  std::vector<double> loss_trace;
};

Exp1Result run_experiment1(std::uint64_t master_seed,
                           const ExperimentConfig& config = {});

struct Exp2PointRecord {
  bool out_of_distribution = false;
  double true_p = 0.0;
  double mc_mean = 0.0;
  double mc_std = 0.0;
  double mahalanobis = 0.0;
  double ape_pct = 0.0;
};

struct Exp2Summary {
  std::string dataset;
  double kl_nats = 0.0;
  double js_distance = 0.0;
  double mape_pct = 0.0;
};

struct Exp2Result {
  std::array<Exp2Summary, 2> summary;  // in-distribution, out-of-distribution
  std::vector<Exp2PointRecord> points;  // holdout points first, then OOD
  ood::OodThreshold threshold;
  std::vector<double> loss_trace;
};

Exp2Result run_experiment2(std::uint64_t master_seed,
                           const ExperimentConfig& config = {});

/// Write exp1_table.csv, exp1_correlation.json, run_manifest.json.
void write_exp1_outputs(const std::filesystem::path& dir,
                        std::uint64_t master_seed,
                        const ExperimentConfig& config,
                        const Exp1Result& result);

/// Write exp2_summary.csv, exp2_points.csv, exp2_threshold.json,
/// run_manifest.json.
void write_exp2_outputs(const std::filesystem::path& dir,
                        std::uint64_t master_seed,
                        const ExperimentConfig& config,
                        const Exp2Result& result);

}  // namespace gasdrift::experiments
