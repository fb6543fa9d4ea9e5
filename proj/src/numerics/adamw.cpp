#include "newsgraph/numerics/adamw.hpp"

#include <cmath>

#include "newsgraph/errors.hpp"

namespace newsgraph::num {

AdamWState AdamWState::zeros_like(const ParameterStore& params) {
  AdamWState state;
  for (const auto& p : params) {
    state.first_moment.emplace_back(p.value.shape());
    state.second_moment.emplace_back(p.value.shape());
  }
  return state;
}

void adamw_step(ParameterStore& params, const std::vector<Tensor>& grads, AdamWState& state,
                const AdamWConfig& config) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw ShapeError("adamw_step: " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients, " +
                     std::to_string(state.first_moment.size()) + " moments");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].numel() != params[i].value.numel() ||
        state.first_moment[i].numel() != params[i].value.numel()) {
      throw ShapeError("adamw_step: shape mismatch for '" + params[i].name + "' " +
                       format_shape(params[i].value.shape()) + " vs " +
                       format_shape(grads[i].shape()));
    }
    if (!grads[i].all_finite()) {
      throw NumericalError("adamw_step: non-finite gradient for parameter '" + params[i].name + "'");
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  const double decay = 1.0 - config.learning_rate * config.weight_decay;

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].value.values();
    auto g = grads[i].values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] *= decay;
      p[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

}  // namespace newsgraph::num
