#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace newsgraph::data {

using Date = std::chrono::sys_days;

// Strict YYYY-MM-DD. Throws DataError on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date date);
bool is_weekend(Date date);

// Sorted, duplicate-free list of trading days.
class Calendar {
 public:
  Calendar() = default;
  explicit Calendar(std::vector<Date> days);

  std::size_t size() const { return days_.size(); }
  bool empty() const { return days_.empty(); }
  Date operator[](std::size_t i) const { return days_[i]; }
  const std::vector<Date>& days() const { return days_; }

  std::optional<std::size_t> index_of(Date date) const;
  // First trading day on or after `date`.
  std::optional<std::size_t> first_on_or_after(Date date) const;

 private:
  std::vector<Date> days_;
};

struct SplitSpec {
  std::size_t train_days = 0;
  std::size_t test_days = 0;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Contiguous prefix/suffix of `days`. The test block is the last
// spec.test_days entries and train the spec.train_days entries right before it.
Split chronological_split(const std::vector<std::size_t>& days, const SplitSpec& spec);

// Train block is round(fraction * n), test is the rest.
SplitSpec split_by_fraction(std::size_t n, double train_fraction);

}  // namespace newsgraph::data
