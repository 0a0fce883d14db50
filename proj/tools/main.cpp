// gasdrift command-line driver.
//
// Subcommands: gases, generate, metrics, train, predict, exp1, exp2.
// Flags override values from an optional JSON --config file, which
// overrides built-in defaults (the paper-reproduction settings).
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gasdrift/datagen.hpp"
#include "gasdrift/errors.hpp"
#include "gasdrift/experiments.hpp"
#include "gasdrift/io.hpp"
#include "gasdrift/mlp.hpp"
#include "gasdrift/similarity.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

using gasdrift::io::format_double;
namespace datagen = gasdrift::datagen;
namespace experiments = gasdrift::experiments;
namespace mlp = gasdrift::mlp;
namespace similarity = gasdrift::similarity;

/// Fills option targets from a JSON config file for options the user did
/// not pass on the command line (flag > config > default).
class ConfigOverlay {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    in >> json_;
  }

  template <typename T>
  void apply(const CLI::Option* opt, const char* key, T& target) const {
    if (opt && opt->count() > 0) return;  // explicit flag wins
    if (json_.contains(key)) target = json_.at(key).get<T>();
  }

 private:
  nlohmann::json json_;
};

std::string known_gas_names() {
  std::string all;
  for (const auto& name : datagen::builtin_gas_table().names()) {
    if (!all.empty()) all += ", ";
    all += name;
  }
  return all;
}

datagen::GasSpec require_gas(const std::string& name) {
  auto gas = datagen::builtin_gas_table().lookup(name);
  if (!gas) {
    throw std::invalid_argument("unknown gas '" + name +
                                "'; known gases: " + known_gas_names());
  }
  return *gas;
}

int cmd_gases() {
  std::cout << "name,a_L2_atm_per_mol2,b_L_per_mol\n";
  char buf[64];
  for (const auto& g : datagen::builtin_gas_table().entries()) {
    std::snprintf(buf, sizeof(buf), "%s,%g,%g", g.name.c_str(), g.a, g.b);
    std::cout << buf << '\n';
  }
  return kExitOk;
}

void print_exp1(const experiments::Exp1Result& r) {
  std::cout << "gas,kl_nats,js_distance,mape_pct\n";
  for (const auto& row : r.rows) {
    std::cout << row.gas << ',' << format_double(row.kl_nats) << ','
              << format_double(row.js_distance) << ','
              << format_double(row.mape_pct) << '\n';
  }
  std::cout << "spearman(kl,mape)=" << format_double(r.kl_vs_mape.spearman_rho)
            << " pearson(kl,mape)=" << format_double(r.kl_vs_mape.pearson_r)
            << '\n';
  std::cout << "spearman(js,mape)=" << format_double(r.js_vs_mape.spearman_rho)
            << " pearson(js,mape)=" << format_double(r.js_vs_mape.pearson_r)
            << '\n';
}

void print_exp2(const experiments::Exp2Result& r) {
  std::cout << "dataset,kl_nats,js_distance,mape_pct\n";
  for (const auto& s : r.summary) {
    std::cout << s.dataset << ',' << format_double(s.kl_nats) << ','
              << format_double(s.js_distance) << ','
              << format_double(s.mape_pct) << '\n';
  }
  std::cout << "threshold(p" << r.threshold.percentile
            << ")=" << format_double(r.threshold.value)
            << " n_train=" << r.threshold.n_train << '\n';
}


struct GenState {
  std::string config_path, gas = "Ideal Gas", out = "dataset.csv";
  std::uint64_t seed = 42, n = 10000;
  datagen::SamplerParams params = datagen::exp1_params();
};

struct MetricsState {
  std::string config_path, file_a, file_b, column = "pressure_atm";
  std::size_t bins = 50;
  bool csv = false;
};

struct TrainState {
  std::string config_path, data, out = "model.ckpt";
  mlp::TrainConfig tc;
};

struct PredictState {
  std::string config_path, model, data, out = "predictions.csv";
  std::size_t mc_passes = 0;  // 0: deterministic only
  std::uint64_t seed = 42;
};

struct ExpState {
  std::string config_path, out;
  std::uint64_t seed = 42;
  experiments::ExperimentConfig cfg;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gasdrift: distribution-shift experiments on van der Waals "
               "gas data"};
  app.require_subcommand(1);

  int exit_code = kExitOk;
  std::function<int()> run;

  // ---- gases ----
  app.add_subcommand("gases", "List the built-in gas table")
      ->callback([&] { run = cmd_gases; });

  // ---- generate ----
  {
    auto* cmd = app.add_subcommand(
        "generate", "Generate a synthetic gas dataset (CSV + metadata)");
    auto state = std::make_shared<GenState>();
    cmd->add_option("--config", state->config_path, "JSON config file");
    auto* o_gas = cmd->add_option("--gas", state->gas, "Gas name (see `gases`)");
    auto* o_n = cmd->add_option("-n,--samples", state->n, "Record count");
    auto* o_seed = cmd->add_option("--seed", state->seed, "RNG seed");
    auto* o_out = cmd->add_option("--out", state->out, "Output CSV path");
    auto* o_mt = cmd->add_option("--mu-t", state->params.mu_T, "Mean T [K]");
    auto* o_st = cmd->add_option("--sigma-t", state->params.sigma_T, "Std T");
    auto* o_mv = cmd->add_option("--mu-v", state->params.mu_V, "Mean V [L]");
    auto* o_sv = cmd->add_option("--sigma-v", state->params.sigma_V, "Std V");
    auto* o_mn = cmd->add_option("--mu-n", state->params.mu_N, "Mean N [mol]");
    auto* o_sn = cmd->add_option("--sigma-n", state->params.sigma_N, "Std N");
    cmd->callback([&, state, o_gas, o_n, o_seed, o_out, o_mt, o_st, o_mv,
                   o_sv, o_mn, o_sn] {
      run = [=] {
        ConfigOverlay cfg;
        if (!state->config_path.empty()) cfg.load(state->config_path);
        cfg.apply(o_gas, "gas", state->gas);
        cfg.apply(o_n, "samples", state->n);
        cfg.apply(o_seed, "seed", state->seed);
        cfg.apply(o_out, "out", state->out);
        cfg.apply(o_mt, "mu_T", state->params.mu_T);
        cfg.apply(o_st, "sigma_T", state->params.sigma_T);
        cfg.apply(o_mv, "mu_V", state->params.mu_V);
        cfg.apply(o_sv, "sigma_V", state->params.sigma_V);
        cfg.apply(o_mn, "mu_N", state->params.mu_N);
        cfg.apply(o_sn, "sigma_N", state->params.sigma_N);

        const auto gas = require_gas(state->gas);
        const auto ds =
            datagen::generate(gas, state->params, state->n, state->seed);
        gasdrift::io::write_dataset_csv(state->out, ds);
        gasdrift::io::write_dataset_metadata(state->out, ds);
        std::cout << "wrote " << ds.size() << " records to " << state->out
                  << '\n';
        return kExitOk;
      };
    });
  }

  // ---- metrics ----
  {
    auto* cmd = app.add_subcommand(
        "metrics", "KL divergence and JS distance between two CSV columns");
    auto state = std::make_shared<MetricsState>();
    cmd->add_option("--config", state->config_path, "JSON config file");
    cmd->add_option("file_a", state->file_a, "Reference sample CSV")
        ->required();
    cmd->add_option("file_b", state->file_b, "Comparison sample CSV")
        ->required();
    auto* o_col = cmd->add_option("--column", state->column, "Column name");
    auto* o_bins = cmd->add_option("--bins", state->bins, "Histogram bins");
    cmd->add_flag("--csv", state->csv, "Emit a CSV report row");
    cmd->callback([&, state, o_col, o_bins] {
      run = [=] {
        ConfigOverlay cfg;
        if (!state->config_path.empty()) cfg.load(state->config_path);
        cfg.apply(o_col, "column", state->column);
        cfg.apply(o_bins, "bins", state->bins);

        auto column_of = [&](const std::string& path) {
          const auto table = gasdrift::io::read_csv(path);
          const int idx = table.column_index(state->column);
          if (idx < 0) {
            std::string names;
            for (const auto& h : table.header) {
              if (!names.empty()) names += ", ";
              names += h;
            }
            throw std::invalid_argument("column '" + state->column +
                                        "' not in " + path +
                                        "; available: " + names);
          }
          return table.columns[static_cast<std::size_t>(idx)];
        };

        const auto a = column_of(state->file_a);
        const auto b = column_of(state->file_b);
        similarity::BinningConfig bc;
        bc.n_bins = state->bins;
        const auto rep = similarity::divergence_report(a, b, bc);
        if (state->csv) {
          std::cout << "dataset,kl_nats,js_distance,n_a,n_b,n_bins\n"
                    << std::filesystem::path(state->file_b).stem().string()
                    << ',' << format_double(rep.kl_nats) << ','
                    << format_double(rep.js_distance) << ',' << rep.n_a << ','
                    << rep.n_b << ',' << rep.binning.n_bins << '\n';
        } else {
          std::cout << "kl_nats " << format_double(rep.kl_nats) << '\n'
                    << "js_distance " << format_double(rep.js_distance)
                    << '\n';
        }
        return kExitOk;
      };
    });
  }

  // ---- train ----
  {
    auto* cmd = app.add_subcommand(
        "train", "Train the dropout MLP on a dataset CSV, save a checkpoint");
    auto state = std::make_shared<TrainState>();
    state->tc.seed = 42;
    cmd->add_option("--config", state->config_path, "JSON config file");
    cmd->add_option("--data", state->data, "Training dataset CSV")
        ->required();
    auto* o_out = cmd->add_option("--out", state->out, "Checkpoint path");
    auto* o_epochs = cmd->add_option("--epochs", state->tc.epochs, "Epochs");
    auto* o_batch =
        cmd->add_option("--batch-size", state->tc.batch_size, "Batch size");
    auto* o_lr = cmd->add_option("--step-size", state->tc.step_size,
                                 "Optimizer step size");
    auto* o_seed = cmd->add_option("--seed", state->tc.seed, "Training seed");
    cmd->callback([&, state, o_out, o_epochs, o_batch, o_lr, o_seed] {
      run = [=] {
        ConfigOverlay cfg;
        if (!state->config_path.empty()) cfg.load(state->config_path);
        cfg.apply(o_out, "out", state->out);
        cfg.apply(o_epochs, "epochs", state->tc.epochs);
        cfg.apply(o_batch, "batch_size", state->tc.batch_size);
        cfg.apply(o_lr, "step_size", state->tc.step_size);
        cfg.apply(o_seed, "seed", state->tc.seed);

        const auto ds = gasdrift::io::read_dataset_csv(state->data);
        const mlp::NetworkConfig net;
        const auto result = mlp::train(ds, net, state->tc);
        mlp::save_checkpoint(state->out, net, result.standardizer,
                             result.params);
        std::cout << "trained " << state->tc.epochs << " epochs on "
                  << ds.size() << " records; final loss "
                  << format_double(result.loss_trace.back()) << "; wrote "
                  << state->out << '\n';
        return kExitOk;
      };
    });
  }

  // ---- predict ----
  {
    auto* cmd = app.add_subcommand(
        "predict", "Predict pressures for a dataset CSV with a checkpoint");
    auto state = std::make_shared<PredictState>();
    cmd->add_option("--config", state->config_path, "JSON config file");
    cmd->add_option("--model", state->model, "Checkpoint path")->required();
    cmd->add_option("--data", state->data, "Input dataset CSV")->required();
    auto* o_out = cmd->add_option("--out", state->out, "Output CSV path");
    auto* o_mc = cmd->add_option(
        "--mc", state->mc_passes,
        "Monte-Carlo dropout passes (0 = deterministic only)");
    auto* o_seed = cmd->add_option("--seed", state->seed, "MC mask seed");
    cmd->callback([&, state, o_out, o_mc, o_seed] {
      run = [=] {
        ConfigOverlay cfg;
        if (!state->config_path.empty()) cfg.load(state->config_path);
        cfg.apply(o_out, "out", state->out);
        cfg.apply(o_mc, "mc_passes", state->mc_passes);
        cfg.apply(o_seed, "seed", state->seed);

        const auto ck = mlp::load_checkpoint(state->model);
        const auto ds = gasdrift::io::read_dataset_csv(state->data);
        const auto preds = mlp::predict_dataset(ck.config, ck.params,
                                                ck.standardizer, ds.records);

        std::ofstream out(state->out, std::ios::trunc);
        if (!out) {
          throw std::runtime_error("cannot open for writing: " + state->out);
        }
        const bool mc = state->mc_passes > 0;
        out << (mc ? "true_p,pred,mc_mean,mc_std\n" : "true_p,pred\n");
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
          out << format_double(ds.records[i].P) << ','
              << format_double(preds[i]);
          if (mc) {
            const auto& r = ds.records[i];
            const auto s = mlp::mc_predict(
                ck.config, ck.params, ck.standardizer, {r.T, r.V, r.N},
                state->mc_passes, gasdrift::rng::derive_seed(state->seed, i));
            out << ',' << format_double(s.mean) << ','
                << format_double(s.std);
          }
          out << '\n';
        }
        std::cout << "wrote " << ds.size() << " predictions to " << state->out
                  << '\n';
        return kExitOk;
      };
    });
  }

  // ---- exp1 / exp2 ----
  for (int which : {1, 2}) {
    auto* cmd = app.add_subcommand(
        which == 1 ? "exp1" : "exp2",
        which == 1
            ? "Experiment 1: target drift across gases (KL/JS vs MAPE)"
            : "Experiment 2: covariate shift, MC dropout + Mahalanobis");
    auto state = std::make_shared<ExpState>();
    state->out = which == 1 ? "results/exp1" : "results/exp2";
    cmd->add_option("--config", state->config_path, "JSON config file");
    auto* o_seed = cmd->add_option("--seed", state->seed, "Master seed");
    auto* o_out = cmd->add_option("--out", state->out, "Output directory");
    auto* o_n = cmd->add_option("--samples", state->cfg.samples_per_dataset,
                                "Samples per dataset");
    auto* o_epochs =
        cmd->add_option("--epochs", state->cfg.train.epochs, "Epochs");
    auto* o_bins =
        cmd->add_option("--bins", state->cfg.binning.n_bins, "Histogram bins");
    CLI::Option* o_mc = nullptr;
    CLI::Option* o_pct = nullptr;
    if (which == 2) {
      o_mc = cmd->add_option("--mc-passes", state->cfg.mc_passes,
                             "MC dropout passes per point");
      o_pct = cmd->add_option("--percentile",
                              state->cfg.threshold_percentile,
                              "Threshold percentile");
    }
    cmd->callback([&, which, state, o_seed, o_out, o_n, o_epochs, o_bins,
                   o_mc, o_pct] {
      run = [=] {
        ConfigOverlay cfg;
        if (!state->config_path.empty()) cfg.load(state->config_path);
        cfg.apply(o_seed, "seed", state->seed);
        cfg.apply(o_out, "out", state->out);
        cfg.apply(o_n, "samples", state->cfg.samples_per_dataset);
        cfg.apply(o_epochs, "epochs", state->cfg.train.epochs);
        cfg.apply(o_bins, "bins", state->cfg.binning.n_bins);
        if (which == 2) {
          cfg.apply(o_mc, "mc_passes", state->cfg.mc_passes);
          cfg.apply(o_pct, "percentile", state->cfg.threshold_percentile);
        }

        if (which == 1) {
          const auto result =
              experiments::run_experiment1(state->seed, state->cfg);
          experiments::write_exp1_outputs(state->out, state->seed, state->cfg,
                                          result);
          print_exp1(result);
        } else {
          const auto result =
              experiments::run_experiment2(state->seed, state->cfg);
          experiments::write_exp2_outputs(state->out, state->seed, state->cfg,
                                          result);
          print_exp2(result);
        }
        std::cout << "results written to " << state->out << '\n';
        return kExitOk;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    exit_code = run ? run() : kExitUsage;
  } catch (const gasdrift::numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    exit_code = kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    exit_code = kExitData;
  }
  return exit_code;
}
