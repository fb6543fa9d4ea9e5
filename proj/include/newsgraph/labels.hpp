#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace newsgraph::labels {

enum class TargetMode { Direction, Significance };

std::string_view to_string(TargetMode mode);
TargetMode parse_target_mode(std::string_view text);

struct LabelSpec {
  TargetMode mode = TargetMode::Direction;
  // Threshold multiplier on the trailing standard deviation.
  double factor = 0.04;
  // Number of trailing closes in the standard deviation.
  std::size_t lookback = 100;

  void validate() const;
};

// 1 iff close_t > close_prev. Both prices must be positive.
int label_direction(double close_t, double close_prev);

// Population standard deviation of the last `n` entries of `closes`.
double rolling_std(std::span<const double> closes, std::size_t n);

// 1 iff close_t - close_prev > factor * rolling_std(trailing, lookback).
// `trailing` holds closes strictly before t, oldest first. Returns nullopt when
// fewer than `lookback` closes are available; such samples are skipped.
std::optional<int> label_significant(double close_t, double close_prev,
                                     std::span<const double> trailing, const LabelSpec& spec);

}  // namespace newsgraph::labels
