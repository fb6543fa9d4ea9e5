#pragma once

#include <cstdint>
#include <vector>

#include "newsgraph/numerics/tape.hpp"

namespace newsgraph::num {

struct AdamWConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;

  static AdamWState zeros_like(const ParameterStore& params);
};

// One bias-corrected AdamW update. Weight decay scales the parameters
// directly and never enters the moment estimates. Throws NumericalError
// naming the first parameter whose gradient is not finite; in that case
// nothing is modified.
void adamw_step(ParameterStore& params, const std::vector<Tensor>& grads, AdamWState& state,
                const AdamWConfig& config);

}  // namespace newsgraph::num
