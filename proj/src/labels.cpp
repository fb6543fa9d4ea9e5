#include "newsgraph/labels.hpp"

#include <cmath>

#include "newsgraph/errors.hpp"

namespace newsgraph::labels {

std::string_view to_string(TargetMode mode) {
  return mode == TargetMode::Direction ? "direction" : "significance";
}

TargetMode parse_target_mode(std::string_view text) {
  if (text == "direction") return TargetMode::Direction;
  if (text == "significance") return TargetMode::Significance;
  throw ConfigError("unknown target mode '" + std::string(text) +
                    "' (expected direction or significance)");
}

void LabelSpec::validate() const {
  if (!(factor > 0.0)) throw ConfigError("label factor must be positive");
  if (mode == TargetMode::Significance && lookback < 2) {
    throw ConfigError("significance lookback must be at least 2");
  }
}

int label_direction(double close_t, double close_prev) {
  if (!(close_t > 0.0) || !(close_prev > 0.0)) {
    throw DataError("label_direction: prices must be positive (got " + std::to_string(close_t) +
                    ", " + std::to_string(close_prev) + ")");
  }
  return close_t - close_prev > 0.0 ? 1 : 0;
}

double rolling_std(std::span<const double> closes, std::size_t n) {
  if (n == 0 || closes.size() < n) {
    throw DataError("rolling_std: need " + std::to_string(n) + " closes, have " +
                    std::to_string(closes.size()));
  }
  const auto window = closes.last(n);
  double mean = 0.0;
  for (double c : window) mean += c;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double c : window) var += (c - mean) * (c - mean);
  return std::sqrt(var / static_cast<double>(n));
}

std::optional<int> label_significant(double close_t, double close_prev,
                                     std::span<const double> trailing, const LabelSpec& spec) {
  if (trailing.size() < spec.lookback) return std::nullopt;
  label_direction(close_t, close_prev);
  const double threshold = spec.factor * rolling_std(trailing, spec.lookback);
  return close_t - close_prev > threshold ? 1 : 0;
}

}  // namespace newsgraph::labels
