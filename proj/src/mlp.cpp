#include "gasdrift/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "gasdrift/errors.hpp"
#include "gasdrift/kernels.hpp"

namespace gasdrift::mlp {

namespace {

// Stream tags for the seeds derived from TrainConfig::seed.
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamShuffle = 2;
constexpr std::uint64_t kStreamDropout = 3;

std::vector<std::size_t> layer_widths(const NetworkConfig& c) {
  std::vector<std::size_t> w;
  w.reserve(c.hidden.size() + 2);
  w.push_back(c.input_dim);
  for (auto h : c.hidden) w.push_back(h);
  w.push_back(1);
  return w;
}

void check_shapes(const NetworkConfig& c, const NetworkParams& p) {
  const auto widths = layer_widths(c);
  if (p.weights.size() != widths.size() - 1 ||
      p.biases.size() != widths.size() - 1) {
    throw std::invalid_argument("params do not match config layer count");
  }
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (p.weights[l].rows() != widths[l + 1] ||
        p.weights[l].cols() != widths[l] ||
        p.biases[l].size() != widths[l + 1]) {
      throw std::invalid_argument("params do not match config shapes");
    }
  }
}

/// z = x * W^T + b (rows of x are samples), written into out.
void dense(const Matrix& x, const Matrix& w, const std::vector<double>& b,
           Matrix& out) {
  out = Matrix(x.rows(), w.rows());
  kernels::gemm_nt(x.data(), w.data(), out.data(), x.rows(), w.rows(),
                   x.cols());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* row = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) row[j] += b[j];
  }
}

struct ForwardPass {
  // act[0] is the input; act[l] for l >= 1 the post-ELU activations.
  std::vector<Matrix> act;
  Matrix masked_last;  // last hidden activations after dropout
  std::vector<double> output;
};

void run_forward(const NetworkConfig& c, const NetworkParams& p,
                 const Matrix& x, const Matrix* mask, ForwardPass& fp) {
  const std::size_t n_hidden = c.hidden.size();
  fp.act.assign(n_hidden + 1, Matrix());
  fp.act[0] = x;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    dense(fp.act[l], p.weights[l], p.biases[l], fp.act[l + 1]);
    kernels::elu(fp.act[l + 1].data(), fp.act[l + 1].data(),
                 fp.act[l + 1].size(), c.elu_alpha);
  }

  const Matrix* last = &fp.act[n_hidden];
  if (mask) {
    if (mask->rows() != x.rows() || mask->cols() != c.hidden.back()) {
      throw std::invalid_argument("dropout mask shape mismatch");
    }
    fp.masked_last = *last;
    for (std::size_t i = 0; i < fp.masked_last.size(); ++i) {
      fp.masked_last.data()[i] *= mask->data()[i];
    }
    last = &fp.masked_last;
  }

  const Matrix& wout = p.weights[n_hidden];
  fp.output.resize(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    fp.output[i] =
        kernels::dot(last->row(i), wout.row(0), wout.cols()) +
        p.biases[n_hidden][0];
  }
}

}  // namespace

void validate(const NetworkConfig& c) {
  if (c.input_dim == 0) throw std::invalid_argument("input_dim must be > 0");
  if (c.hidden.empty()) {
    throw std::invalid_argument("need at least one hidden layer");
  }
  for (auto h : c.hidden) {
    if (h == 0) throw std::invalid_argument("hidden widths must be > 0");
  }
  if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout_rate must be in [0, 1)");
  }
}

void validate(const TrainConfig& c) {
  if (c.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (c.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(c.step_size > 0.0)) {
    throw std::invalid_argument("step_size must be > 0");
  }
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

Standardizer Standardizer::fit(std::span<const datagen::GasRecord> records) {
  if (records.empty()) {
    throw std::invalid_argument("Standardizer::fit: no records");
  }
  const auto n = static_cast<double>(records.size());
  Standardizer s;

  auto moments = [&](auto getter) {
    double mean = 0.0;
    for (const auto& r : records) mean += getter(r);
    mean /= n;
    double var = 0.0;
    for (const auto& r : records) {
      const double d = getter(r) - mean;
      var += d * d;
    }
    var /= n;
    double sd = std::sqrt(var);
    if (sd < 1e-12) sd = 1.0;  // constant feature: identity scaling
    return std::pair{mean, sd};
  };

  std::tie(s.x_mean[0], s.x_std[0]) =
      moments([](const datagen::GasRecord& r) { return r.T; });
  std::tie(s.x_mean[1], s.x_std[1]) =
      moments([](const datagen::GasRecord& r) { return r.V; });
  std::tie(s.x_mean[2], s.x_std[2]) =
      moments([](const datagen::GasRecord& r) { return r.N; });
  std::tie(s.y_mean, s.y_std) =
      moments([](const datagen::GasRecord& r) { return r.P; });
  return s;
}

std::array<double, 3> Standardizer::transform(
    const std::array<double, 3>& x) const {
  return {(x[0] - x_mean[0]) / x_std[0], (x[1] - x_mean[1]) / x_std[1],
          (x[2] - x_mean[2]) / x_std[2]};
}

NetworkParams init(const NetworkConfig& config, std::uint64_t seed) {
  validate(config);
  const auto widths = layer_widths(config);
  rng::Xoshiro256pp gen(seed);

  NetworkParams p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fan_in = widths[l];
    const std::size_t fan_out = widths[l + 1];
    const double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w.data()[i] = limit * (2.0 * gen.uniform01() - 1.0);
    }
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(fan_out, 0.0);
  }
  return p;
}

Matrix make_dropout_mask(const NetworkConfig& config, std::size_t batch,
                         rng::Xoshiro256pp& gen) {
  const double rate = config.dropout_rate;
  const double scale = 1.0 / (1.0 - rate);
  Matrix mask(batch, config.hidden.back());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask.data()[i] = gen.uniform01() < rate ? 0.0 : scale;
  }
  return mask;
}

std::vector<double> forward_batch(const NetworkConfig& config,
                                  const NetworkParams& params,
                                  const Matrix& x,
                                  const Matrix* dropout_mask) {
  check_shapes(config, params);
  ForwardPass fp;
  run_forward(config, params, x, dropout_mask, fp);
  return fp.output;
}

double forward(const NetworkConfig& config, const NetworkParams& params,
               const std::array<double, 3>& x, bool dropout_on,
               rng::Xoshiro256pp* gen) {
  Matrix xb(1, 3);
  xb(0, 0) = x[0];
  xb(0, 1) = x[1];
  xb(0, 2) = x[2];
  if (dropout_on && config.dropout_rate > 0.0) {
    if (!gen) throw std::invalid_argument("forward: dropout needs an rng");
    const Matrix mask = make_dropout_mask(config, 1, *gen);
    return forward_batch(config, params, xb, &mask)[0];
  }
  return forward_batch(config, params, xb, nullptr)[0];
}

Gradients make_gradients(const NetworkParams& params) {
  Gradients g;
  for (const auto& w : params.weights) g.weights.emplace_back(w.rows(), w.cols());
  for (const auto& b : params.biases) g.biases.emplace_back(b.size(), 0.0);
  return g;
}

double mse_loss(const NetworkConfig& config, const NetworkParams& params,
                const Matrix& x, std::span<const double> y,
                const Matrix* dropout_mask) {
  const auto pred = forward_batch(config, params, x, dropout_mask);
  if (pred.size() != y.size()) {
    throw std::invalid_argument("mse_loss: target length mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = pred[i] - y[i];
    s += d * d;
  }
  return s / static_cast<double>(y.size());
}

double mse_loss_and_gradients(const NetworkConfig& config,
                              const NetworkParams& params, const Matrix& x,
                              std::span<const double> y,
                              const Matrix* dropout_mask, Gradients& grads) {
  check_shapes(config, params);
  if (x.rows() != y.size()) {
    throw std::invalid_argument("loss: target length mismatch");
  }
  const std::size_t batch = x.rows();
  const std::size_t n_hidden = config.hidden.size();

  ForwardPass fp;
  run_forward(config, params, x, dropout_mask, fp);

  double loss = 0.0;
  Matrix delta(batch, 1);  // dL/d(output)
  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const double d = fp.output[i] - y[i];
    loss += d * d;
    delta(i, 0) = 2.0 * d * inv_b;
  }
  loss *= inv_b;

  // Output layer. Gradients flow through the masked activations.
  const Matrix& last = dropout_mask ? fp.masked_last : fp.act[n_hidden];
  kernels::gemm_tn(delta.data(), last.data(), grads.weights[n_hidden].data(),
                   1, last.cols(), batch);
  grads.biases[n_hidden][0] = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    grads.biases[n_hidden][0] += delta(i, 0);
  }

  // d(last hidden) = delta * W_out, masked back through the dropout.
  Matrix dact(batch, config.hidden.back());
  kernels::gemm_nn(delta.data(), params.weights[n_hidden].data(), dact.data(),
                   batch, config.hidden.back(), 1);
  if (dropout_mask) {
    for (std::size_t i = 0; i < dact.size(); ++i) {
      dact.data()[i] *= dropout_mask->data()[i];
    }
  }

  for (std::size_t l = n_hidden; l-- > 0;) {
    // dact currently holds dL/d(act[l+1]); fold in the ELU derivative.
    kernels::elu_grad_from_output(fp.act[l + 1].data(), dact.data(),
                                  dact.size(), config.elu_alpha);

    kernels::gemm_tn(dact.data(), fp.act[l].data(), grads.weights[l].data(),
                     dact.cols(), fp.act[l].cols(), batch);
    auto& db = grads.biases[l];
    std::fill(db.begin(), db.end(), 0.0);
    for (std::size_t i = 0; i < batch; ++i) {
      const double* row = dact.row(i);
      for (std::size_t j = 0; j < db.size(); ++j) db[j] += row[j];
    }

    if (l > 0) {
      Matrix next(batch, fp.act[l].cols());
      kernels::gemm_nn(dact.data(), params.weights[l].data(), next.data(),
                       batch, fp.act[l].cols(), dact.cols());
      dact = std::move(next);
    }
  }
  return loss;
}

TrainResult train(const datagen::Dataset& data, const NetworkConfig& config,
                  const TrainConfig& tconfig) {
  validate(config);
  validate(tconfig);
  const std::size_t n = data.records.size();
  if (n < tconfig.batch_size) {
    throw std::invalid_argument("train: dataset smaller than batch size");
  }

  TrainResult result;
  result.standardizer = Standardizer::fit(data.records);
  result.params = init(config, rng::derive_seed(tconfig.seed, kStreamInit));

  Matrix x(n, 3);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = data.records[i];
    const auto xt = result.standardizer.transform({r.T, r.V, r.N});
    x(i, 0) = xt[0];
    x(i, 1) = xt[1];
    x(i, 2) = xt[2];
    y[i] = result.standardizer.transform_y(r.P);
  }

  rng::Xoshiro256pp shuffle_gen(rng::derive_seed(tconfig.seed, kStreamShuffle));
  rng::Xoshiro256pp dropout_gen(rng::derive_seed(tconfig.seed, kStreamDropout));

  auto& params = result.params;
  Gradients grads = make_gradients(params);
  Gradients m = make_gradients(params);
  Gradients v = make_gradients(params);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  const bool use_dropout = config.dropout_rate > 0.0;
  std::size_t step = 0;
  double b1t = 1.0;
  double b2t = 1.0;

  for (std::size_t epoch = 0; epoch < tconfig.epochs; ++epoch) {
    // Fisher-Yates with the shuffle stream.
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = shuffle_gen.below(i + 1);
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += tconfig.batch_size) {
      const std::size_t b = std::min(tconfig.batch_size, n - start);
      Matrix xb(b, 3);
      std::vector<double> yb(b);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t src = order[start + i];
        std::memcpy(xb.row(i), x.row(src), 3 * sizeof(double));
        yb[i] = y[src];
      }

      double loss;
      if (use_dropout) {
        const Matrix mask = make_dropout_mask(config, b, dropout_gen);
        loss = mse_loss_and_gradients(config, params, xb, yb, &mask, grads);
      } else {
        loss = mse_loss_and_gradients(config, params, xb, yb, nullptr, grads);
      }
      if (!std::isfinite(loss)) {
        throw numeric_error("train: loss diverged (non-finite)");
      }
      epoch_loss += loss * static_cast<double>(b);

      ++step;
      b1t *= tconfig.beta1;
      b2t *= tconfig.beta2;
      for (std::size_t l = 0; l < params.weights.size(); ++l) {
        kernels::adam_step(params.weights[l].data(), grads.weights[l].data(),
                           m.weights[l].data(), v.weights[l].data(),
                           params.weights[l].size(), tconfig.step_size,
                           tconfig.beta1, tconfig.beta2, tconfig.epsilon, b1t,
                           b2t);
        kernels::adam_step(params.biases[l].data(), grads.biases[l].data(),
                           m.biases[l].data(), v.biases[l].data(),
                           params.biases[l].size(), tconfig.step_size,
                           tconfig.beta1, tconfig.beta2, tconfig.epsilon, b1t,
                           b2t);
      }
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

double predict_deterministic(const NetworkConfig& config,
                             const NetworkParams& params,
                             const Standardizer& standardizer,
                             const std::array<double, 3>& x_raw) {
  const double out =
      forward(config, params, standardizer.transform(x_raw), false, nullptr);
  return standardizer.inverse_y(out);
}

std::vector<double> predict_dataset(const NetworkConfig& config,
                                    const NetworkParams& params,
                                    const Standardizer& standardizer,
                                    std::span<const datagen::GasRecord> recs) {
  constexpr std::size_t kChunk = 512;
  std::vector<double> out;
  out.reserve(recs.size());
  for (std::size_t start = 0; start < recs.size(); start += kChunk) {
    const std::size_t b = std::min(kChunk, recs.size() - start);
    Matrix xb(b, 3);
    for (std::size_t i = 0; i < b; ++i) {
      const auto& r = recs[start + i];
      const auto xt = standardizer.transform({r.T, r.V, r.N});
      xb(i, 0) = xt[0];
      xb(i, 1) = xt[1];
      xb(i, 2) = xt[2];
    }
    const auto pred = forward_batch(config, params, xb, nullptr);
    for (double p : pred) out.push_back(standardizer.inverse_y(p));
  }
  return out;
}

PredictiveSummary mc_predict(const NetworkConfig& config,
                             const NetworkParams& params,
                             const Standardizer& standardizer,
                             const std::array<double, 3>& x_raw,
                             std::size_t n_passes, std::uint64_t seed) {
  check_shapes(config, params);
  if (n_passes < 2) {
    throw std::invalid_argument("mc_predict: n_passes must be >= 2");
  }

  // Dropout sits after the last hidden layer, so everything up to that
  // activation is pass-invariant; only the masked output dot product is
  // recomputed per pass. This matches a full stochastic forward exactly.
  Matrix xb(1, 3);
  const auto xt = standardizer.transform(x_raw);
  xb(0, 0) = xt[0];
  xb(0, 1) = xt[1];
  xb(0, 2) = xt[2];

  ForwardPass fp;
  run_forward(config, params, xb, nullptr, fp);
  const Matrix& last = fp.act[config.hidden.size()];
  const Matrix& wout = params.weights[config.hidden.size()];
  const double bias = params.biases[config.hidden.size()][0];
  const std::size_t width = config.hidden.back();

  const double rate = config.dropout_rate;
  const double scale = rate > 0.0 ? 1.0 / (1.0 - rate) : 1.0;

  std::vector<double> ys(n_passes);
  for (std::size_t pass = 0; pass < n_passes; ++pass) {
    rng::Xoshiro256pp gen(rng::derive_seed(seed, pass));
    double acc = bias;
    if (rate > 0.0) {
      for (std::size_t j = 0; j < width; ++j) {
        if (gen.uniform01() >= rate) {
          acc += last.row(0)[j] * scale * wout(0, j);
        }
      }
    } else {
      acc += kernels::dot(last.row(0), wout.row(0), width);
    }
    ys[pass] = standardizer.inverse_y(acc);
  }

  PredictiveSummary s;
  s.n_passes = n_passes;
  const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
  if (*lo == *hi) {
    // Constant ensemble (e.g. dropout disabled): zero spread by definition.
    s.mean = *lo;
    s.std = 0.0;
    return s;
  }
  double mean = 0.0;
  for (double yv : ys) mean += yv;
  mean /= static_cast<double>(n_passes);
  double var = 0.0;
  for (double yv : ys) {
    const double d = yv - mean;
    var += d * d;
  }
  var /= static_cast<double>(n_passes);  // population std, Eq. over passes
  s.mean = mean;
  s.std = std::sqrt(var);
  return s;
}

// ---- checkpoint io ------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'G', 'D', 'R', 'F', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>(v >> (8 * i)));
}

void put_f64(std::string& buf, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>(v >> (8 * i)));
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  std::uint32_t u32() {
    if (pos + 4 > buf.size()) throw std::runtime_error("checkpoint truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++]))
           << (8 * i);
    }
    return v;
  }

  double f64() {
    if (pos + 8 > buf.size()) throw std::runtime_error("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++]))
           << (8 * i);
    }
    return std::bit_cast<double>(v);
  }
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const NetworkConfig& config,
                     const Standardizer& standardizer,
                     const NetworkParams& params) {
  check_shapes(config, params);
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  put_u32(buf, kVersion);

  put_u32(buf, static_cast<std::uint32_t>(config.input_dim));
  put_u32(buf, static_cast<std::uint32_t>(config.hidden.size()));
  for (auto h : config.hidden) put_u32(buf, static_cast<std::uint32_t>(h));
  put_f64(buf, config.elu_alpha);
  put_f64(buf, config.dropout_rate);

  for (double v : standardizer.x_mean) put_f64(buf, v);
  for (double v : standardizer.x_std) put_f64(buf, v);
  put_f64(buf, standardizer.y_mean);
  put_f64(buf, standardizer.y_std);

  put_u32(buf, static_cast<std::uint32_t>(params.weights.size()));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const auto& w = params.weights[l];
    put_u32(buf, static_cast<std::uint32_t>(w.rows()));
    put_u32(buf, static_cast<std::uint32_t>(w.cols()));
    for (std::size_t i = 0; i < w.size(); ++i) put_f64(buf, w.data()[i]);
    for (double b : params.biases[l]) put_f64(buf, b);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open checkpoint for writing: " +
                             path.string());
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("checkpoint write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path.string());
  }
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());

  if (buf.size() < sizeof(kMagic) ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a gasdrift checkpoint: " + path.string());
  }
  Reader r{buf, sizeof(kMagic)};
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }

  Checkpoint ck;
  ck.config.input_dim = r.u32();
  const std::uint32_t n_hidden = r.u32();
  ck.config.hidden.clear();
  for (std::uint32_t i = 0; i < n_hidden; ++i) {
    ck.config.hidden.push_back(r.u32());
  }
  ck.config.elu_alpha = r.f64();
  ck.config.dropout_rate = r.f64();

  for (auto& v : ck.standardizer.x_mean) v = r.f64();
  for (auto& v : ck.standardizer.x_std) v = r.f64();
  ck.standardizer.y_mean = r.f64();
  ck.standardizer.y_std = r.f64();

  const std::uint32_t n_layers = r.u32();
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    Matrix w(rows, cols);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = r.f64();
    std::vector<double> b(rows);
    for (auto& bv : b) bv = r.f64();
    ck.params.weights.push_back(std::move(w));
    ck.params.biases.push_back(std::move(b));
  }
  check_shapes(ck.config, ck.params);
  return ck;
}

}  // namespace gasdrift::mlp
