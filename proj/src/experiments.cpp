#include "gasdrift/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "gasdrift/io.hpp"

namespace gasdrift::experiments {

double mape(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw std::invalid_argument("mape: inputs must be equal-length, nonempty");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 0.0) {
      throw std::domain_error("mape: zero true value at index " +
                              std::to_string(i));
    }
    s += std::abs(y_pred[i] - y_true[i]) / std::abs(y_true[i]);
  }
  return 100.0 * s / static_cast<double>(y_true.size());
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw std::invalid_argument("pearson: need equal lengths >= 3");
  }
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::domain_error("pearson: constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

namespace {

/// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw std::invalid_argument("spearman: need equal lengths >= 3");
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

namespace {

struct TrainedModel {
  mlp::NetworkParams params;
  mlp::Standardizer standardizer;
  std::vector<double> loss_trace;
};

TrainedModel train_on(const datagen::Dataset& train_data,
                      const ExperimentConfig& config,
                      std::uint64_t master_seed) {
  mlp::TrainConfig tc = config.train;
  tc.seed = rng::derive_seed(master_seed, kSeedTrain);
  auto r = mlp::train(train_data, config.net, tc);
  return {std::move(r.params), r.standardizer, std::move(r.loss_trace)};
}

std::size_t holdout_count(std::size_t n, double fraction) {
  auto h = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * fraction));
  h = std::min(h, n - 1);
  return std::max<std::size_t>(h, 1);
}

}  // namespace

Exp1Result run_experiment1(std::uint64_t master_seed,
                           const ExperimentConfig& config) {
  const auto& table = datagen::builtin_gas_table();
  const auto params = datagen::exp1_params();
  const std::size_t n = config.samples_per_dataset;

  // Dataset index 0 is the ideal-gas (training) draw; the tail holdout is
  // the "in distribution" subset.
  const auto ideal =
      datagen::generate(table.entries().front(), params, n,
                        rng::derive_seed(master_seed, kSeedData + 0));
  const std::size_t n_hold = holdout_count(n, config.holdout_fraction);
  const std::size_t n_train = n - n_hold;

  datagen::Dataset train_data;
  train_data.gas = ideal.gas;
  train_data.params = params;
  train_data.seed = ideal.seed;
  train_data.records.assign(ideal.records.begin(),
                            ideal.records.begin() + n_train);
  std::span<const datagen::GasRecord> holdout{
      ideal.records.data() + n_train, n_hold};

  const auto model = train_on(train_data, config, master_seed);
  const auto train_pressures = train_data.pressures();

  Exp1Result result;
  result.loss_trace = model.loss_trace;

  auto add_row = [&](const std::string& label,
                     std::span<const datagen::GasRecord> recs) {
    std::vector<double> pressures;
    pressures.reserve(recs.size());
    for (const auto& r : recs) pressures.push_back(r.P);

    const auto rep =
        similarity::divergence_report(train_pressures, pressures,
                                      config.binning);
    const auto preds = mlp::predict_dataset(config.net, model.params,
                                            model.standardizer, recs);
    result.rows.push_back(
        {label, rep.kl_nats, rep.js_distance, mape(pressures, preds)});
  };

  add_row("Ideal Gas (subset)", holdout);
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto ds =
        datagen::generate(table.entries()[i], params, n,
                          rng::derive_seed(master_seed, kSeedData + i));
    add_row(table.entries()[i].name, ds.records);
  }

  std::vector<double> kls, jss, mapes;
  for (const auto& row : result.rows) {
    kls.push_back(row.kl_nats);
    jss.push_back(row.js_distance);
    mapes.push_back(row.mape_pct);
  }
  result.kl_vs_mape = {pearson(kls, mapes), spearman(kls, mapes), kls.size()};
  result.js_vs_mape = {pearson(jss, mapes), spearman(jss, mapes), jss.size()};
  return result;
}

Exp2Result run_experiment2(std::uint64_t master_seed,
                           const ExperimentConfig& config) {
  const auto [params1, params2] = datagen::exp2_params();
  const auto ideal = datagen::builtin_gas_table().entries().front();
  const std::size_t n = config.samples_per_dataset;

  const auto ds1 = datagen::generate(
      ideal, params1, n, rng::derive_seed(master_seed, kSeedData + 0));
  const auto ds2 = datagen::generate(
      ideal, params2, n, rng::derive_seed(master_seed, kSeedData + 1));

  const std::size_t n_hold = holdout_count(n, config.holdout_fraction);
  const std::size_t n_train = n - n_hold;

  datagen::Dataset train_data;
  train_data.gas = ideal;
  train_data.params = params1;
  train_data.seed = ds1.seed;
  train_data.records.assign(ds1.records.begin(),
                            ds1.records.begin() + n_train);
  std::span<const datagen::GasRecord> holdout{ds1.records.data() + n_train,
                                              n_hold};

  const auto model = train_on(train_data, config, master_seed);
  const auto train_pressures = train_data.pressures();

  const auto profile =
      ood::fit_profile(ood::feature_matrix(train_data.records));
  const auto train_dist = ood::distances(profile, train_data);

  Exp2Result result;
  result.loss_trace = model.loss_trace;
  result.threshold =
      ood::threshold_from_training(train_dist, config.threshold_percentile);

  const std::uint64_t mc_base = rng::derive_seed(master_seed, kSeedMcBase);
  std::size_t point_index = 0;
  auto score_points = [&](std::span<const datagen::GasRecord> recs,
                          bool is_ood) {
    std::vector<double> truths, preds;
    truths.reserve(recs.size());
    preds.reserve(recs.size());
    for (const auto& r : recs) {
      const auto summary = mlp::mc_predict(
          config.net, model.params, model.standardizer, {r.T, r.V, r.N},
          config.mc_passes, rng::derive_seed(mc_base, point_index));
      ++point_index;
      const double dist = ood::mahalanobis(profile, {r.T, r.V, r.N});
      const double ape =
          100.0 * std::abs(summary.mean - r.P) / std::abs(r.P);
      result.points.push_back(
          {is_ood, r.P, summary.mean, summary.std, dist, ape});
      truths.push_back(r.P);
      preds.push_back(summary.mean);
    }
    const auto rep = similarity::divergence_report(train_pressures, truths,
                                                   config.binning);
    return Exp2Summary{is_ood ? "out_of_distribution" : "in_distribution",
                       rep.kl_nats, rep.js_distance, mape(truths, preds)};
  };

  result.summary[0] = score_points(holdout, false);
  result.summary[1] = score_points(ds2.records, true);
  return result;
}

// ---- output files -------------------------------------------------------

namespace {

using io::format_double;

nlohmann::json config_json(const ExperimentConfig& c) {
  return {
      {"samples_per_dataset", c.samples_per_dataset},
      {"holdout_fraction", c.holdout_fraction},
      {"binning",
       {{"n_bins", c.binning.n_bins}, {"smoothing_eps", c.binning.smoothing_eps}}},
      {"network",
       {{"input_dim", c.net.input_dim},
        {"hidden", c.net.hidden},
        {"elu_alpha", c.net.elu_alpha},
        {"dropout_rate", c.net.dropout_rate}}},
      {"training",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"step_size", c.train.step_size},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"epsilon", c.train.epsilon}}},
      {"mc_passes", c.mc_passes},
      {"threshold_percentile", c.threshold_percentile},
  };
}

nlohmann::json manifest_json(const std::string& experiment,
                             std::uint64_t master_seed,
                             const ExperimentConfig& c,
                             std::size_t n_datasets) {
  nlohmann::json seeds{
      {"master", master_seed},
      {"train", rng::derive_seed(master_seed, kSeedTrain)},
      {"mc_base", rng::derive_seed(master_seed, kSeedMcBase)},
  };
  nlohmann::json data_seeds = nlohmann::json::array();
  for (std::size_t i = 0; i < n_datasets; ++i) {
    data_seeds.push_back(rng::derive_seed(master_seed, kSeedData + i));
  }
  seeds["data"] = data_seeds;
  return {{"experiment", experiment},
          {"seeds", seeds},
          {"config", config_json(c)}};
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + p.string());
  return out;
}

void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

}  // namespace

void write_exp1_outputs(const std::filesystem::path& dir,
                        std::uint64_t master_seed,
                        const ExperimentConfig& config,
                        const Exp1Result& result) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "exp1_table.csv");
    out << "gas,kl_nats,js_distance,mape_pct\n";
    for (const auto& row : result.rows) {
      out << row.gas << ',' << format_double(row.kl_nats) << ','
          << format_double(row.js_distance) << ','
          << format_double(row.mape_pct) << '\n';
    }
  }
  write_json(dir / "exp1_correlation.json",
             {{"kl_vs_mape",
               {{"pearson", result.kl_vs_mape.pearson_r},
                {"spearman", result.kl_vs_mape.spearman_rho},
                {"n", result.kl_vs_mape.n}}},
              {"js_vs_mape",
               {{"pearson", result.js_vs_mape.pearson_r},
                {"spearman", result.js_vs_mape.spearman_rho},
                {"n", result.js_vs_mape.n}}}});
  write_json(dir / "run_manifest.json",
             manifest_json("exp1", master_seed, config,
                           datagen::builtin_gas_table().size()));
}

void write_exp2_outputs(const std::filesystem::path& dir,
                        std::uint64_t master_seed,
                        const ExperimentConfig& config,
                        const Exp2Result& result) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "exp2_summary.csv");
    out << "dataset,kl_nats,js_distance,mape_pct\n";
    for (const auto& s : result.summary) {
      out << s.dataset << ',' << format_double(s.kl_nats) << ','
          << format_double(s.js_distance) << ',' << format_double(s.mape_pct)
          << '\n';
    }
  }
  {
    auto out = open_out(dir / "exp2_points.csv");
    out << "set,true_p,mc_mean,mc_std,mahalanobis,ape_pct\n";
    for (const auto& p : result.points) {
      out << (p.out_of_distribution ? "out_of_distribution"
                                    : "in_distribution")
          << ',' << format_double(p.true_p) << ',' << format_double(p.mc_mean)
          << ',' << format_double(p.mc_std) << ','
          << format_double(p.mahalanobis) << ',' << format_double(p.ape_pct)
          << '\n';
    }
  }
  write_json(dir / "exp2_threshold.json",
             {{"percentile", result.threshold.percentile},
              {"value", result.threshold.value},
              {"n_train", result.threshold.n_train}});
  write_json(dir / "run_manifest.json",
             manifest_json("exp2", master_seed, config, 2));
}

}  // namespace gasdrift::experiments
