#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newsgraph/numerics/tensor.hpp"

namespace newsgraph::num {

struct Parameter {
  std::string name;
  Tensor value;
};

// Ordered collection of learnable tensors. Indices are stable; names unique.
class ParameterStore {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  // Total scalar count across all parameters.
  std::size_t scalar_count() const;

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
};

class Tape;

// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  bool requires_grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

struct BackwardContext {
  const Tensor& output;
  const Tensor& grad_output;
  std::span<const Tensor* const> inputs;
  // Null for inputs that do not need a gradient.
  std::span<Tensor* const> input_grads;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

class Gradients;

// Records primitive operations in creation order, which is a topological order.
// One tape per forward pass; a tape is not thread-safe, distinct tapes are.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf without gradient.
  Var constant(Tensor value);
  // Leaf whose gradient is tracked.
  Var leaf(Tensor value);
  // Leaf bound to a stored parameter. The tensor is referenced, not copied, so
  // the store must outlive the tape and stay unchanged until backward is done.
  // Repeated calls for the same index return the same Var.
  Var parameter(const ParameterStore& store, std::size_t index);
  Var parameter(const ParameterStore& store, std::string_view name);

  Var record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return node_value(nodes_[id]); }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a single-element loss. The tape is left untouched, so
  // calling it twice yields identical results.
  Gradients backward(Var loss) const;

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    std::ptrdiff_t param = -1;
    std::string_view op;
  };

  static const Tensor& node_value(const Node& node) {
    return node.external != nullptr ? *node.external : node.owned;
  }

  std::deque<Node> nodes_;
  std::map<std::size_t, std::size_t> param_nodes_;
  const ParameterStore* store_ = nullptr;
};

// Result of Tape::backward: one gradient per tape node that received one.
class Gradients {
 public:
  // Null when the node is unreachable from the loss or does not require grad.
  const Tensor* find(Var v) const;
  // Zero tensor of the right shape when no gradient flowed.
  Tensor of(Var v) const;
  // Gradient for every parameter in the store, zeros for unused ones.
  std::vector<Tensor> parameters(const ParameterStore& store) const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<Tensor> grads_;
  std::vector<std::ptrdiff_t> param_of_node_;
};

}  // namespace newsgraph::num
