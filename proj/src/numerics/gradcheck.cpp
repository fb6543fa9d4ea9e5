#include "newsgraph/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace newsgraph::num {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

double gradient_check(const TensorFunction& f, const std::vector<Tensor>& inputs, double step) {
  std::vector<Tensor> grads;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(tape.leaf(t));
    const Var loss = f(tape, vars);
    const Gradients g = tape.backward(loss);
    for (const Var& v : vars) grads.push_back(g.of(v));
  }

  auto evaluate = [&](const std::vector<Tensor>& xs) {
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& t : xs) vars.push_back(tape.leaf(t));
    return f(tape, vars).value().item();
  };

  double worst = 0.0;
  std::vector<Tensor> probe = inputs;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    for (std::size_t j = 0; j < probe[i].numel(); ++j) {
      const double original = probe[i][j];
      probe[i][j] = original + step;
      const double up = evaluate(probe);
      probe[i][j] = original - step;
      const double down = evaluate(probe);
      probe[i][j] = original;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, relative_error(grads[i][j], numeric));
    }
  }
  return worst;
}

std::vector<ParameterCheck> gradient_check_parameters(const ParameterFunction& f,
                                                      ParameterStore& store, double step,
                                                      std::size_t max_coordinates,
                                                      std::uint64_t seed) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    const Var loss = f(tape);
    analytic = tape.backward(loss).parameters(store);
  }

  auto evaluate = [&]() {
    Tape tape;
    return f(tape).value().item();
  };

  std::mt19937_64 rng(seed);
  std::vector<ParameterCheck> out;
  for (std::size_t p = 0; p < store.size(); ++p) {
    Tensor& value = store[p].value;
    std::vector<std::size_t> coords(value.numel());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (max_coordinates > 0 && coords.size() > max_coordinates) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(max_coordinates);
      std::sort(coords.begin(), coords.end());
    }
    ParameterCheck check{store[p].name, 0.0, coords.size()};
    for (double g : analytic[p].values()) check.max_abs_gradient = std::max(check.max_abs_gradient, std::abs(g));
    for (std::size_t j : coords) {
      const double original = value[j];
      value[j] = original + step;
      const double up = evaluate();
      value[j] = original - step;
      const double down = evaluate();
      value[j] = original;
      const double numeric = (up - down) / (2.0 * step);
      check.max_rel_error = std::max(check.max_rel_error, relative_error(analytic[p][j], numeric));
    }
    out.push_back(std::move(check));
  }
  return out;
}

}  // namespace newsgraph::num
