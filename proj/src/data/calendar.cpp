#include "newsgraph/data/calendar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "newsgraph/errors.hpp"

namespace newsgraph::data {

namespace {

int parse_digits(std::string_view text, std::size_t begin, std::size_t count) {
  int value = 0;
  const char* first = text.data() + begin;
  const auto [ptr, ec] = std::from_chars(first, first + count, value);
  if (ec != std::errc() || ptr != first + count) throw DataError("invalid date '" + std::string(text) + "'");
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{parse_digits(text, 0, 4)},
                                        std::chrono::month{static_cast<unsigned>(parse_digits(text, 5, 2))},
                                        std::chrono::day{static_cast<unsigned>(parse_digits(text, 8, 2))}};
  if (!ymd.ok()) throw DataError("invalid date '" + std::string(text) + "'");
  return Date{ymd};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

bool is_weekend(Date date) {
  const std::chrono::weekday wd{date};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

Calendar::Calendar(std::vector<Date> days) : days_(std::move(days)) {
  std::sort(days_.begin(), days_.end());
  days_.erase(std::unique(days_.begin(), days_.end()), days_.end());
}

std::optional<std::size_t> Calendar::index_of(Date date) const {
  const auto it = std::lower_bound(days_.begin(), days_.end(), date);
  if (it == days_.end() || *it != date) return std::nullopt;
  return static_cast<std::size_t>(it - days_.begin());
}

std::optional<std::size_t> Calendar::first_on_or_after(Date date) const {
  const auto it = std::lower_bound(days_.begin(), days_.end(), date);
  if (it == days_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - days_.begin());
}

Split chronological_split(const std::vector<std::size_t>& days, const SplitSpec& spec) {
  if (spec.train_days == 0 || spec.test_days == 0) {
    throw ConfigError("split needs at least one train and one test day");
  }
  if (days.size() < spec.train_days + spec.test_days) {
    throw DataError("split needs " + std::to_string(spec.train_days + spec.test_days) +
                    " days, only " + std::to_string(days.size()) + " available");
  }
  if (!std::is_sorted(days.begin(), days.end())) throw DataError("split: days must be sorted");
  Split split;
  const auto test_begin = days.end() - static_cast<std::ptrdiff_t>(spec.test_days);
  const auto train_begin = test_begin - static_cast<std::ptrdiff_t>(spec.train_days);
  split.train.assign(train_begin, test_begin);
  split.test.assign(test_begin, days.end());
  return split;
}

SplitSpec split_by_fraction(std::size_t n, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split.train_fraction must lie in (0, 1)");
  }
  if (n < 2) throw DataError("split needs at least 2 days, have " + std::to_string(n));
  auto train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(n)));
  train = std::clamp<std::size_t>(train, 1, n - 1);
  return {train, n - train};
}

}  // namespace newsgraph::data
