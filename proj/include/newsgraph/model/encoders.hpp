#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newsgraph/numerics/ops.hpp"
#include "newsgraph/numerics/tape.hpp"

namespace newsgraph::model {

using num::ParameterStore;
using num::Tape;
using num::Tensor;
using num::Var;

enum class Mode { Train, Eval };

// ---- price features ----

enum class Channel { Close, Rsi, Sma };

Channel parse_channel(std::string_view name);
std::string_view to_string(Channel channel);

// Wilder-smoothed relative strength index of the whole series. A flat series
// gives 50.
double rsi(std::span<const double> closes, std::size_t period = 14);
// Mean of the last `period` closes.
double sma(std::span<const double> closes, std::size_t period);

struct FeatureSpec {
  std::vector<Channel> channels{Channel::Close};
  std::size_t steps = 15;
  std::size_t rsi_period = 14;
  std::size_t sma_period = 10;

  std::size_t channel_count() const { return channels.size(); }
  // Closes needed before the target day to fill every step of every channel.
  std::size_t history() const;
};

// `history` ends with the close of the day before the target, oldest first.
// Returns steps * channels values, step-major, or nullopt when the history is
// too short or holds a non-positive / non-finite close.
std::optional<std::vector<double>> window_features(std::span<const double> history,
                                                   const FeatureSpec& spec);

// ---- batch norm ----

struct BatchNorm {
  std::size_t scale = 0;  // parameter index, [1, C]
  std::size_t shift = 0;  // parameter index, [1, C]
  Tensor running_mean;    // [1, C]
  Tensor running_var;     // [1, C]
  double momentum = 0.1;
  double eps = 1e-5;

  static BatchNorm create(ParameterStore& store, const std::string& prefix, std::size_t channels,
                          double momentum = 0.1, double eps = 1e-5);
};

// Train mode normalises with the batch statistics of the rows and folds them
// into the running statistics (unbiased variance, as the usual convention);
// eval mode uses the running statistics. Train mode needs at least two rows.
Var batchnorm_forward(Tape& tape, const ParameterStore& store, BatchNorm& bn, Var x, Mode mode);

// ---- LSTM ----

struct LstmLayer {
  std::size_t weight = 0;  // [input + hidden, 4 * hidden], gate order i, f, g, o
  std::size_t bias = 0;    // [1, 4 * hidden]
  std::size_t input = 0;
  std::size_t hidden = 0;
};

struct Lstm {
  std::vector<LstmLayer> layers;

  // Uniform(+-1/sqrt(fan_in)) weights, zero biases except the forget gate at 1.
  static Lstm create(ParameterStore& store, const std::string& prefix, std::size_t input,
                     std::size_t hidden, std::size_t layer_count, std::mt19937_64& rng);
  std::size_t hidden() const { return layers.back().hidden; }
};

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_cell_step(Tape& tape, const ParameterStore& store, const LstmLayer& layer, Var x,
                         Var h_prev, Var c_prev);

// Runs every layer over the step inputs ([B, input] each) from zero state and
// returns the last hidden state of the top layer, [B, hidden].
Var lstm_forward(Tape& tape, const ParameterStore& store, const Lstm& lstm, const std::vector<Var>& steps);

// ---- window encoder ----

struct EncoderConfig {
  std::size_t channels = 1;
  std::size_t steps = 15;
  std::size_t hidden = 64;
  std::size_t layers = 2;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;
};

// Batch norm over the channels followed by the stacked LSTM. Statistics are
// taken over every (window, step) row of the batch.
class SequenceEncoder {
 public:
  SequenceEncoder() = default;
  SequenceEncoder(ParameterStore& store, const std::string& prefix, const EncoderConfig& config,
                  std::mt19937_64& rng);

  // Each window holds steps * channels values, step-major. Returns [B, hidden].
  // A train-mode batch with fewer than two windows is normalised with the
  // running statistics instead.
  Var encode(Tape& tape, const ParameterStore& store, const std::vector<std::span<const double>>& windows,
             Mode mode);

  const EncoderConfig& config() const { return config_; }
  BatchNorm& batch_norm() { return bn_; }
  const BatchNorm& batch_norm() const { return bn_; }
  const Lstm& lstm() const { return lstm_; }

 private:
  EncoderConfig config_;
  BatchNorm bn_;
  Lstm lstm_;
};

// Single window in eval mode.
Var encode_company_window(Tape& tape, const ParameterStore& store, SequenceEncoder& encoder,
                          std::span<const double> window);

// Uniform(+-bound) tensor.
Tensor uniform_tensor(std::size_t rows, std::size_t cols, double bound, std::mt19937_64& rng);
Tensor normal_tensor(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng);

}  // namespace newsgraph::model
