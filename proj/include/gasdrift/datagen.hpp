// Synthetic gas dataset generation: state variables (T, V, N) drawn from
// Gaussians, pressure evaluated with the van der Waals equation of state.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gasdrift/rng.hpp"

namespace gasdrift::datagen {

/// Universal gas constant in L·atm/(mol·K).
inline constexpr double kGasConstant = 0.0821;

/// A gas with its van der Waals constants:
/// a [L^2·atm/mol^2] (intermolecular attraction), b [L/mol] (excluded
/// volume). a = b = 0 recovers the ideal gas law.
struct GasSpec {
  std::string name;
  double a = 0.0;
  double b = 0.0;
};

/// Ordered table of gas specs with name lookup.
class GasTable {
 public:
  explicit GasTable(std::vector<GasSpec> entries);

  const std::vector<GasSpec>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// nullopt when the name is unknown.
  std::optional<GasSpec> lookup(const std::string& name) const;

  std::vector<std::string> names() const;

 private:
  std::vector<GasSpec> entries_;
};

/// The built-in ten-gas table (Ideal Gas first).
const GasTable& builtin_gas_table();

/// Gaussian sampler parameters for the three state variables.
struct SamplerParams {
  double mu_T, sigma_T;  // temperature [K]
  double mu_V, sigma_V;  // volume [L]
  double mu_N, sigma_N;  // moles [mol]
};

/// Sampler parameters used by experiment 1.
SamplerParams exp1_params();

/// Sampler parameter pair (dataset 1, dataset 2) used by experiment 2.
std::pair<SamplerParams, SamplerParams> exp2_params();

/// One generated record.
struct GasRecord {
  double T;  // [K]
  double V;  // [L]
  double N;  // [mol]
  double P;  // [atm]

  bool operator==(const GasRecord&) const = default;
};

struct Dataset {
  std::vector<GasRecord> records;
  GasSpec gas;
  SamplerParams params;
  std::uint64_t seed = 0;

  std::size_t size() const { return records.size(); }
  std::vector<double> pressures() const;
  std::vector<double> temperatures() const;
  std::vector<double> volumes() const;
  std::vector<double> moles() const;
};

/// Pressure from the van der Waals equation solved for P:
///   P = N·R·T / (V - N·b) - a·N^2 / V^2
/// Throws std::domain_error unless T, V, N > 0 and V - N·b > 0.
double vdw_pressure(double T, double V, double N, const GasSpec& gas);

/// Draw (T, V, N) in that order from the params' Gaussians, one interleaved
/// stream. Nonpositive draws are rejected and redrawn (bounded retries).
struct StateSample {
  double T, V, N;
};
StateSample sample_state(const SamplerParams& params, rng::Xoshiro256pp& gen);

/// Generate n records. Records whose volume violates V - N·b > 0 are
/// rejected and resampled whole. Pure function of (gas, params, n, seed).
Dataset generate(const GasSpec& gas, const SamplerParams& params,
                 std::size_t n, std::uint64_t seed);

/// Retry cap shared by per-variable and per-record rejection.
inline constexpr int kMaxRejects = 1000;

void validate(const SamplerParams& params);

}  // namespace gasdrift::datagen
