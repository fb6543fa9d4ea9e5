#include "newsgraph/numerics/tape.hpp"

#include "newsgraph/errors.hpp"

namespace newsgraph::num {

std::size_t ParameterStore::add(std::string name, Tensor value) {
  if (by_name_.contains(name)) throw ConfigError("parameter '" + name + "' registered twice");
  const std::size_t index = params_.size();
  by_name_.emplace(name, index);
  params_.push_back(Parameter{std::move(name), std::move(value)});
  return index;
}

std::optional<std::size_t> ParameterStore::find(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParameterStore::index_of(std::string_view name) const {
  auto found = find(name);
  if (!found) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  return *found;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.value.numel();
  return total;
}

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  Node node;
  node.owned = std::move(value);
  node.op = "constant";
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Tensor value) {
  Node node;
  node.owned = std::move(value);
  node.requires_grad = true;
  node.op = "leaf";
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(const ParameterStore& store, std::size_t index) {
  if (store_ != nullptr && store_ != &store) {
    throw ConfigError("tape: parameters from two different stores");
  }
  store_ = &store;
  if (auto it = param_nodes_.find(index); it != param_nodes_.end()) return Var(this, it->second);
  Node node;
  node.external = &store[index].value;
  node.requires_grad = true;
  node.param = static_cast<std::ptrdiff_t>(index);
  node.op = "parameter";
  nodes_.push_back(std::move(node));
  const std::size_t id = nodes_.size() - 1;
  param_nodes_.emplace(index, id);
  return Var(this, id);
}

Var Tape::parameter(const ParameterStore& store, std::string_view name) {
  return parameter(store, store.index_of(name));
}

Var Tape::record(std::string_view op, Tensor value, std::vector<Var> inputs,
                 BackwardFn backward) {
  Node node;
  node.owned = std::move(value);
  node.op = op;
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw ConfigError(std::string(op) + ": input from another tape");
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(Var loss) const {
  if (&loss.tape() != this) throw ConfigError("backward: loss from another tape");
  const Tensor& loss_value = value(loss.id());
  if (loss_value.numel() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " +
                     format_shape(loss_value.shape()));
  }

  Gradients out;
  out.tape_ = this;
  out.grads_.resize(nodes_.size());
  out.param_of_node_.resize(nodes_.size(), -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) out.param_of_node_[i] = nodes_[i].param;
  if (!nodes_[loss.id()].requires_grad) return out;

  out.grads_[loss.id()] = Tensor(loss_value.shape(), 1.0);

  std::vector<const Tensor*> input_values;
  std::vector<Tensor*> input_grads;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    const Node& node = nodes_[id];
    if (!node.backward || out.grads_[id].empty()) continue;
    input_values.clear();
    input_grads.clear();
    for (std::size_t in : node.inputs) {
      input_values.push_back(&node_value(nodes_[in]));
      if (nodes_[in].requires_grad) {
        Tensor& g = out.grads_[in];
        if (g.empty() && !node_value(nodes_[in]).empty()) g = Tensor(node_value(nodes_[in]).shape());
        input_grads.push_back(&g);
      } else {
        input_grads.push_back(nullptr);
      }
    }
    node.backward(BackwardContext{node_value(node), out.grads_[id], input_values, input_grads});
  }
  return out;
}

const Tensor* Gradients::find(Var v) const {
  if (v.id() >= grads_.size() || grads_[v.id()].empty()) return nullptr;
  return &grads_[v.id()];
}

Tensor Gradients::of(Var v) const {
  if (const Tensor* g = find(v)) return *g;
  return Tensor(v.value().shape());
}

std::vector<Tensor> Gradients::parameters(const ParameterStore& store) const {
  std::vector<Tensor> result;
  result.reserve(store.size());
  for (const auto& p : store) result.emplace_back(p.value.shape());
  for (std::size_t id = 0; id < grads_.size(); ++id) {
    const std::ptrdiff_t p = param_of_node_[id];
    if (p < 0 || grads_[id].empty()) continue;
    result[static_cast<std::size_t>(p)].accumulate(grads_[id]);
  }
  return result;
}

}  // namespace newsgraph::num
