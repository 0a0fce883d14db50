// From-scratch feed-forward regression network.
//
// Architecture: dense hidden layers (default 64/64/32) with ELU
// activations, inverted dropout after the last hidden layer, and a single
// linear output unit. Training is minibatch gradient descent on mean
// squared error with adaptive per-parameter moments; inputs and target are
// z-score standardized. Monte-Carlo-Dropout inference keeps dropout active
// and aggregates many stochastic passes into a predictive mean and
// standard deviation.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gasdrift/datagen.hpp"
#include "gasdrift/matrix.hpp"
#include "gasdrift/rng.hpp"

namespace gasdrift::mlp {

struct NetworkConfig {
  std::size_t input_dim = 3;
  std::vector<std::size_t> hidden = {64, 64, 32};
  double elu_alpha = 1.0;
  double dropout_rate = 0.1;  // applied after the last hidden layer
};

void validate(const NetworkConfig& config);

/// Per-layer weights (out x in, row-major) and biases. Layer l maps
/// width(l-1) -> width(l); the final layer has a single output row.
struct NetworkParams {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;
  bool operator==(const NetworkParams&) const = default;
};

/// Per-feature and target z-score statistics fitted on training data.
/// Features or targets with (near-)zero spread standardize with std 1 so
/// the transform stays invertible.
struct Standardizer {
  std::array<double, 3> x_mean{0.0, 0.0, 0.0};
  std::array<double, 3> x_std{1.0, 1.0, 1.0};
  double y_mean = 0.0;
  double y_std = 1.0;

  static Standardizer fit(std::span<const datagen::GasRecord> records);

  std::array<double, 3> transform(const std::array<double, 3>& x) const;
  double transform_y(double y) const { return (y - y_mean) / y_std; }
  double inverse_y(double y_std_space) const {
    return y_mean + y_std * y_std_space;
  }

  bool operator==(const Standardizer&) const = default;
};

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

struct PredictiveSummary {
  double mean = 0.0;  // [atm]
  double std = 0.0;   // [atm]
  std::size_t n_passes = 0;
};

/// Weights from a fan-in-scaled symmetric uniform distribution,
/// U(-sqrt(3/fan_in), +sqrt(3/fan_in)); biases zero. Deterministic per
/// seed (draw order: layers in order, each weight matrix row-major).
NetworkParams init(const NetworkConfig& config, std::uint64_t seed);

/// Inverted-dropout mask over the last hidden layer: each entry is 0 with
/// probability dropout_rate, 1/(1 - dropout_rate) otherwise. Entries are
/// drawn row-major (sample-major, then unit).
Matrix make_dropout_mask(const NetworkConfig& config, std::size_t batch,
                         rng::Xoshiro256pp& gen);

/// Batched forward pass on standardized inputs (rows of X). dropout_mask
/// may be null for a deterministic pass; otherwise it must be
/// batch x last_hidden.
std::vector<double> forward_batch(const NetworkConfig& config,
                                  const NetworkParams& params,
                                  const Matrix& x,
                                  const Matrix* dropout_mask);

/// Single standardized input. When dropout_on, the mask is drawn from gen
/// exactly as make_dropout_mask would for a one-row batch.
double forward(const NetworkConfig& config, const NetworkParams& params,
               const std::array<double, 3>& x, bool dropout_on,
               rng::Xoshiro256pp* gen);

/// Gradient buffers shaped like NetworkParams.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

Gradients make_gradients(const NetworkParams& params);

/// Mean squared error over the batch (standardized units).
double mse_loss(const NetworkConfig& config, const NetworkParams& params,
                const Matrix& x, std::span<const double> y,
                const Matrix* dropout_mask);

/// Loss plus analytic gradients by backpropagation.
double mse_loss_and_gradients(const NetworkConfig& config,
                              const NetworkParams& params, const Matrix& x,
                              std::span<const double> y,
                              const Matrix* dropout_mask, Gradients& grads);

struct TrainResult {
  NetworkParams params;
  Standardizer standardizer;
  std::vector<double> loss_trace;  // per-epoch mean loss (standardized)
};

/// Train on a generated dataset. Weight init, epoch shuffling, and dropout
/// masks draw from streams derived from config.seed, so the result is a
/// pure function of (dataset, configs). Throws std::runtime_error if the
/// loss stops being finite.
TrainResult train(const datagen::Dataset& data, const NetworkConfig& config,
                  const TrainConfig& tconfig);

/// standardize -> forward without dropout -> inverse-standardize.
double predict_deterministic(const NetworkConfig& config,
                             const NetworkParams& params,
                             const Standardizer& standardizer,
                             const std::array<double, 3>& x_raw);

/// Deterministic predictions for every record of a dataset.
std::vector<double> predict_dataset(const NetworkConfig& config,
                                    const NetworkParams& params,
                                    const Standardizer& standardizer,
                                    std::span<const datagen::GasRecord> recs);

/// Monte-Carlo-Dropout inference: n_passes stochastic forwards with
/// dropout active, aggregated to mean and population standard deviation in
/// raw pressure units. The mask stream of pass i is seeded with
/// derive_seed(seed, i), so passes are schedule-independent.
PredictiveSummary mc_predict(const NetworkConfig& config,
                             const NetworkParams& params,
                             const Standardizer& standardizer,
                             const std::array<double, 3>& x_raw,
                             std::size_t n_passes, std::uint64_t seed);

// ---- checkpoint serialization -----------------------------------------
// Versioned little-endian binary: magic, version, config, standardizer,
// then each layer's dimensions and row-major 64-bit weights/biases.
// Round-trips are bit-exact.

void save_checkpoint(const std::filesystem::path& path,
                     const NetworkConfig& config,
                     const Standardizer& standardizer,
                     const NetworkParams& params);

struct Checkpoint {
  NetworkConfig config;
  Standardizer standardizer;
  NetworkParams params;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gasdrift::mlp
