#include "newsgraph/model/encoders.hpp"

#include <algorithm>
#include <cmath>

#include "newsgraph/errors.hpp"

namespace newsgraph::model {

using num::Axis;

Channel parse_channel(std::string_view name) {
  if (name == "close") return Channel::Close;
  if (name == "rsi") return Channel::Rsi;
  if (name == "sma") return Channel::Sma;
  throw ConfigError("unknown feature channel '" + std::string(name) + "' (expected close, rsi or sma)");
}

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::Close: return "close";
    case Channel::Rsi: return "rsi";
    case Channel::Sma: return "sma";
  }
  return "close";
}

double rsi(std::span<const double> closes, std::size_t period) {
  if (period == 0) throw ConfigError("rsi period must be positive");
  if (closes.size() < period + 1) {
    throw DataError("rsi: need " + std::to_string(period + 1) + " closes, have " +
                    std::to_string(closes.size()));
  }
  double gain = 0.0, loss = 0.0;
  for (std::size_t i = 1; i <= period; ++i) {
    const double d = closes[i] - closes[i - 1];
    (d > 0 ? gain : loss) += std::abs(d);
  }
  const double p = static_cast<double>(period);
  gain /= p;
  loss /= p;
  for (std::size_t i = period + 1; i < closes.size(); ++i) {
    const double d = closes[i] - closes[i - 1];
    gain = (gain * (p - 1.0) + std::max(d, 0.0)) / p;
    loss = (loss * (p - 1.0) + std::max(-d, 0.0)) / p;
  }
  if (loss == 0.0) return gain == 0.0 ? 50.0 : 100.0;
  return 100.0 - 100.0 / (1.0 + gain / loss);
}

double sma(std::span<const double> closes, std::size_t period) {
  if (period == 0) throw ConfigError("sma period must be positive");
  if (closes.size() < period) {
    throw DataError("sma: need " + std::to_string(period) + " closes, have " + std::to_string(closes.size()));
  }
  double total = 0.0;
  for (double c : closes.last(period)) total += c;
  return total / static_cast<double>(period);
}

std::size_t FeatureSpec::history() const {
  std::size_t lookback = 1;
  for (Channel c : channels) {
    if (c == Channel::Rsi) lookback = std::max(lookback, rsi_period + 1);
    if (c == Channel::Sma) lookback = std::max(lookback, sma_period);
  }
  return steps - 1 + lookback;
}

std::optional<std::vector<double>> window_features(std::span<const double> history, const FeatureSpec& spec) {
  if (spec.channels.empty() || spec.steps == 0) throw ConfigError("feature spec needs channels and steps");
  const std::size_t needed = spec.history();
  if (history.size() < needed) return std::nullopt;
  const auto used = history.last(needed);
  for (double c : used) {
    if (!std::isfinite(c) || c <= 0.0) return std::nullopt;
  }
  std::vector<double> out;
  out.reserve(spec.steps * spec.channels.size());
  for (std::size_t t = 0; t < spec.steps; ++t) {
    // Closes up to and including step t.
    const auto upto = used.first(needed - spec.steps + t + 1);
    for (Channel c : spec.channels) {
      switch (c) {
        case Channel::Close: out.push_back(upto.back()); break;
        case Channel::Rsi: out.push_back(rsi(upto.last(spec.rsi_period + 1), spec.rsi_period)); break;
        case Channel::Sma: out.push_back(sma(upto, spec.sma_period)); break;
      }
    }
  }
  return out;
}

Tensor uniform_tensor(std::size_t rows, std::size_t cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

Tensor normal_tensor(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

BatchNorm BatchNorm::create(ParameterStore& store, const std::string& prefix, std::size_t channels,
                            double momentum, double eps) {
  if (!(eps > 0.0)) throw ConfigError("batch norm eps must be positive");
  BatchNorm bn;
  bn.scale = store.add(prefix + ".scale", Tensor::matrix(1, channels, 1.0));
  bn.shift = store.add(prefix + ".shift", Tensor::matrix(1, channels, 0.0));
  bn.running_mean = Tensor::matrix(1, channels, 0.0);
  bn.running_var = Tensor::matrix(1, channels, 1.0);
  bn.momentum = momentum;
  bn.eps = eps;
  return bn;
}

Var batchnorm_forward(Tape& tape, const ParameterStore& store, BatchNorm& bn, Var x, Mode mode) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (cols != bn.running_mean.cols()) {
    throw ShapeError("batchnorm_forward: input " + num::format_shape(x.value().shape()) + " vs " +
                     std::to_string(bn.running_mean.cols()) + " channels");
  }
  Var normalized;
  if (mode == Mode::Train) {
    if (rows < 2) throw ShapeError("batchnorm_forward: train mode needs a batch of at least 2, got " + std::to_string(rows));
    normalized = num::batch_norm(x, bn.eps);
    const Tensor& v = x.value();
    const double n = static_cast<double>(rows);
    for (std::size_t c = 0; c < cols; ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < rows; ++r) mean += v.at(r, c);
      mean /= n;
      double var = 0.0;
      for (std::size_t r = 0; r < rows; ++r) var += (v.at(r, c) - mean) * (v.at(r, c) - mean);
      var /= n - 1.0;
      bn.running_mean[c] = (1.0 - bn.momentum) * bn.running_mean[c] + bn.momentum * mean;
      bn.running_var[c] = (1.0 - bn.momentum) * bn.running_var[c] + bn.momentum * var;
    }
  } else {
    Tensor inv_std = Tensor::matrix(1, cols);
    for (std::size_t c = 0; c < cols; ++c) inv_std[c] = 1.0 / std::sqrt(bn.running_var[c] + bn.eps);
    normalized = num::mul(num::sub(x, tape.constant(bn.running_mean)), tape.constant(inv_std));
  }
  return num::add(num::mul(normalized, tape.parameter(store, bn.scale)), tape.parameter(store, bn.shift));
}

Lstm Lstm::create(ParameterStore& store, const std::string& prefix, std::size_t input, std::size_t hidden,
                  std::size_t layer_count, std::mt19937_64& rng) {
  if (input == 0 || hidden == 0 || layer_count == 0) throw ConfigError("lstm sizes must be positive");
  Lstm lstm;
  for (std::size_t l = 0; l < layer_count; ++l) {
    LstmLayer layer;
    layer.input = l == 0 ? input : hidden;
    layer.hidden = hidden;
    const std::size_t fan_in = layer.input + hidden;
    const std::string name = prefix + ".layer" + std::to_string(l);
    layer.weight = store.add(name + ".weight",
                             uniform_tensor(fan_in, 4 * hidden, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng));
    Tensor bias = Tensor::matrix(1, 4 * hidden, 0.0);
    for (std::size_t j = hidden; j < 2 * hidden; ++j) bias[j] = 1.0;
    layer.bias = store.add(name + ".bias", std::move(bias));
    lstm.layers.push_back(layer);
  }
  return lstm;
}

LstmState lstm_cell_step(Tape& tape, const ParameterStore& store, const LstmLayer& layer, Var x, Var h_prev,
                         Var c_prev) {
  const std::size_t h = layer.hidden;
  Var z = num::add(num::matmul(num::concat({x, h_prev}, Axis::Cols), tape.parameter(store, layer.weight)),
                   tape.parameter(store, layer.bias));
  Var i = num::sigmoid(num::slice(z, Axis::Cols, 0, h));
  Var f = num::sigmoid(num::slice(z, Axis::Cols, h, 2 * h));
  Var g = num::tanh(num::slice(z, Axis::Cols, 2 * h, 3 * h));
  Var o = num::sigmoid(num::slice(z, Axis::Cols, 3 * h, 4 * h));
  Var c = num::add(num::mul(f, c_prev), num::mul(i, g));
  return {num::mul(o, num::tanh(c)), c};
}

Var lstm_forward(Tape& tape, const ParameterStore& store, const Lstm& lstm, const std::vector<Var>& steps) {
  if (steps.empty()) throw ShapeError("lstm_forward: no steps");
  std::vector<Var> inputs = steps;
  const std::size_t batch = steps.front().rows();
  for (const auto& layer : lstm.layers) {
    LstmState state{tape.constant(Tensor::matrix(batch, layer.hidden)),
                    tape.constant(Tensor::matrix(batch, layer.hidden))};
    for (auto& x : inputs) {
      state = lstm_cell_step(tape, store, layer, x, state.h, state.c);
      x = state.h;
    }
  }
  return inputs.back();
}

SequenceEncoder::SequenceEncoder(ParameterStore& store, const std::string& prefix, const EncoderConfig& config,
                                 std::mt19937_64& rng)
    : config_(config) {
  if (config.steps == 0 || config.channels == 0) throw ConfigError("encoder needs steps and channels");
  bn_ = BatchNorm::create(store, prefix + ".bn", config.channels, config.bn_momentum, config.bn_eps);
  lstm_ = Lstm::create(store, prefix + ".lstm", config.channels, config.hidden, config.layers, rng);
}

Var SequenceEncoder::encode(Tape& tape, const ParameterStore& store,
                            const std::vector<std::span<const double>>& windows, Mode mode) {
  const std::size_t batch = windows.size(), steps = config_.steps, channels = config_.channels;
  if (batch == 0) throw ShapeError("encode: empty batch");
  // Rows ordered step-major: row t * B + b is window b at step t.
  Tensor x = Tensor::matrix(steps * batch, channels);
  for (std::size_t b = 0; b < batch; ++b) {
    if (windows[b].size() != steps * channels) {
      throw ShapeError("encode: window " + std::to_string(b) + " has " + std::to_string(windows[b].size()) +
                       " values, expected " + std::to_string(steps * channels));
    }
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t c = 0; c < channels; ++c) x.at(t * batch + b, c) = windows[b][t * channels + c];
    }
  }
  const Mode bn_mode = mode == Mode::Train && batch < 2 ? Mode::Eval : mode;
  Var normalized = batchnorm_forward(tape, store, bn_, tape.constant(std::move(x)), bn_mode);
  std::vector<Var> inputs;
  inputs.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    inputs.push_back(num::slice(normalized, Axis::Rows, t * batch, (t + 1) * batch));
  }
  return lstm_forward(tape, store, lstm_, inputs);
}

Var encode_company_window(Tape& tape, const ParameterStore& store, SequenceEncoder& encoder,
                          std::span<const double> window) {
  const auto& cfg = encoder.config();
  if (window.size() != cfg.steps * cfg.channels) {
    throw DataError("window has " + std::to_string(window.size()) + " values, expected " +
                    std::to_string(cfg.steps * cfg.channels));
  }
  return encoder.encode(tape, store, {window}, Mode::Eval);
}

}  // namespace newsgraph::model
