#include "gasdrift/datagen.hpp"

#include <stdexcept>
#include <utility>

namespace gasdrift::datagen {

GasTable::GasTable(std::vector<GasSpec> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& g = entries_[i];
    if (g.name.empty()) throw std::invalid_argument("GasTable: empty name");
    if (g.a < 0.0 || g.b < 0.0) {
      throw std::invalid_argument("GasTable: negative constant for " + g.name);
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (entries_[j].name == g.name) {
        throw std::invalid_argument("GasTable: duplicate name " + g.name);
      }
    }
  }
}

std::optional<GasSpec> GasTable::lookup(const std::string& name) const {
  for (const auto& g : entries_) {
    if (g.name == name) return g;
  }
  return std::nullopt;
}

std::vector<std::string> GasTable::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& g : entries_) out.push_back(g.name);
  return out;
}

const GasTable& builtin_gas_table() {
  static const GasTable table{{
      {"Ideal Gas", 0.0, 0.0},
      {"Hydrogen", 0.244, 0.0266},
      {"Helium", 0.0346, 0.0237},
      {"Neon", 0.211, 0.0174},
      {"Argon", 1.355, 0.032},
      {"Xenon", 4.00, 0.051},
      {"Nitrogen", 1.390, 0.0391},
      {"Oxygen", 1.360, 0.0318},
      {"Carbon Dioxide", 3.610, 0.0427},
      {"Methane", 2.250, 0.0428},
  }};
  return table;
}

SamplerParams exp1_params() {
  return {.mu_T = 300.0,
          .sigma_T = 25.0,
          .mu_V = 50.0,
          .sigma_V = 5.0,
          .mu_N = 15.0,
          .sigma_N = 1.0};
}

std::pair<SamplerParams, SamplerParams> exp2_params() {
  SamplerParams first{.mu_T = 273.0,
                      .sigma_T = 50.0,
                      .mu_V = 10.0,
                      .sigma_V = 1.0,
                      .mu_N = 10.0,
                      .sigma_N = 1.0};
  SamplerParams second{.mu_T = 300.0,
                       .sigma_T = 50.0,
                       .mu_V = 9.0,
                       .sigma_V = 1.5,
                       .mu_N = 11.0,
                       .sigma_N = 1.0};
  return {first, second};
}

void validate(const SamplerParams& p) {
  const bool ok = p.mu_T > 0.0 && p.mu_V > 0.0 && p.mu_N > 0.0 &&
                  p.sigma_T > 0.0 && p.sigma_V > 0.0 && p.sigma_N > 0.0;
  if (!ok) {
    throw std::invalid_argument(
        "SamplerParams: means and sigmas must be positive");
  }
}

double vdw_pressure(double T, double V, double N, const GasSpec& gas) {
  if (!(T > 0.0) || !(V > 0.0) || !(N > 0.0)) {
    throw std::domain_error("vdw_pressure: T, V, N must be positive");
  }
  const double free_volume = V - N * gas.b;
  if (!(free_volume > 0.0)) {
    throw std::domain_error(
        "vdw_pressure: V - N*b must be positive (excluded volume exceeds V)");
  }
  return N * kGasConstant * T / free_volume - gas.a * N * N / (V * V);
}

namespace {

double draw_positive(double mu, double sigma, rng::Xoshiro256pp& gen) {
  for (int attempt = 0; attempt < kMaxRejects; ++attempt) {
    const double x = gen.normal(mu, sigma);
    if (x > 0.0) return x;
  }
  throw std::runtime_error(
      "sample_state: rejection cap hit, sampler params look nonphysical");
}

}  // namespace

StateSample sample_state(const SamplerParams& params, rng::Xoshiro256pp& gen) {
  validate(params);
  StateSample s;
  s.T = draw_positive(params.mu_T, params.sigma_T, gen);
  s.V = draw_positive(params.mu_V, params.sigma_V, gen);
  s.N = draw_positive(params.mu_N, params.sigma_N, gen);
  return s;
}

Dataset generate(const GasSpec& gas, const SamplerParams& params,
                 std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
  validate(params);

  Dataset ds;
  ds.gas = gas;
  ds.params = params;
  ds.seed = seed;
  ds.records.reserve(n);

  rng::Xoshiro256pp gen(seed);
  for (std::size_t i = 0; i < n; ++i) {
    GasRecord rec{};
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxRejects; ++attempt) {
      const StateSample s = sample_state(params, gen);
      if (s.V - s.N * gas.b > 0.0) {
        rec = {s.T, s.V, s.N, vdw_pressure(s.T, s.V, s.N, gas)};
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw std::runtime_error(
          "generate: record rejection cap hit (V - N*b <= 0 almost surely)");
    }
    ds.records.push_back(rec);
  }
  return ds;
}

namespace {

std::vector<double> column(const std::vector<GasRecord>& recs,
                           double GasRecord::* field) {
  std::vector<double> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back(r.*field);
  return out;
}

}  // namespace

std::vector<double> Dataset::pressures() const {
  return column(records, &GasRecord::P);
}
std::vector<double> Dataset::temperatures() const {
  return column(records, &GasRecord::T);
}
std::vector<double> Dataset::volumes() const {
  return column(records, &GasRecord::V);
}
std::vector<double> Dataset::moles() const {
  return column(records, &GasRecord::N);
}

}  // namespace gasdrift::datagen
