#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "newsgraph/numerics/tape.hpp"

namespace newsgraph::num {

inline constexpr double kFiniteDifferenceStep = 1e-5;

// |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
double relative_error(double analytic, double numeric);

using TensorFunction = std::function<Var(Tape&, const std::vector<Var>&)>;

// Compares the tape gradient of a scalar function with central differences
// over every coordinate of every input; returns the largest relative error.
double gradient_check(const TensorFunction& f, const std::vector<Tensor>& inputs,
                      double step = kFiniteDifferenceStep);

// Builds a scalar loss from parameters obtained through tape.parameter(store, ...).
using ParameterFunction = std::function<Var(Tape&)>;

struct ParameterCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  double max_abs_gradient = 0.0;  // over the whole analytic gradient
};

// Same comparison per parameter tensor. `max_coordinates` > 0 checks a seeded
// random subset of that many coordinates per tensor instead of all of them.
// Parameter values are restored before returning.
std::vector<ParameterCheck> gradient_check_parameters(const ParameterFunction& f,
                                                      ParameterStore& store,
                                                      double step = kFiniteDifferenceStep,
                                                      std::size_t max_coordinates = 0,
                                                      std::uint64_t seed = 0);

}  // namespace newsgraph::num
