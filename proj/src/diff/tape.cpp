#include "pgate/diff/tape.hpp"

#include <cassert>
#include <string>

namespace pgate::diff {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor value) {
    if (!value.all_finite()) throw NonFiniteError("constant: non-finite value");
    value.set_requires_grad(false);
    nodes_.push_back(Node{std::move(value), {}, {}, {}, false, false});
    return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Tensor value) {
    if (!value.all_finite()) throw NonFiniteError("parameter: non-finite value");
    value.set_requires_grad(true);
    nodes_.push_back(Node{std::move(value), {}, {}, {}, true, false});
    return Var{this, nodes_.size() - 1};
}

Var Tape::record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    return record(op, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::record(std::string_view op, Tensor value, std::span<const Var> inputs, BackwardFn backward) {
    if (!value.all_finite()) {
        throw NonFiniteError(std::string(op) + ": non-finite output");
    }
    Node node;
    node.value = std::move(value);
    node.inputs.reserve(inputs.size());
    for (const auto& in : inputs) {
        check_owner(in);
        node.inputs.push_back(in.id);
        node.needs_grad = node.needs_grad || nodes_[in.id].needs_grad;
    }
    if (node.needs_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var{this, nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
    check_owner(v);
    return nodes_[v.id].value;
}

void Tape::check_owner(Var v) const {
    if (v.tape != this || v.id >= nodes_.size()) {
        throw std::invalid_argument("variable does not belong to this tape");
    }
}

Tensor& Tape::grad_buffer(std::size_t id) {
    auto& node = nodes_[id];
    if (!node.grad_ready) {
        node.grad = Tensor(node.value.shape(), 0.0);
        node.grad_ready = true;
    }
    return node.grad;
}

void Tape::backward(Var loss) {
    check_owner(loss);
    if (nodes_[loss.id].value.size() != 1) {
        throw ShapeError("backward: loss must be a scalar, got shape " + shape_string(nodes_[loss.id].value.shape()));
    }
    for (auto& node : nodes_) {
        node.grad_ready = false;
        node.grad = Tensor();
    }
    grad_buffer(loss.id).fill(1.0);

    std::vector<const Tensor*> in_values;
    std::vector<Tensor*> in_grads;
    for (std::size_t id = loss.id + 1; id-- > 0;) {
        auto& node = nodes_[id];
        if (!node.needs_grad || !node.grad_ready || !node.backward) continue;
        in_values.clear();
        in_grads.clear();
        for (auto in : node.inputs) {
            assert(in < id && "tape records must be topologically ordered");
            in_values.push_back(&nodes_[in].value);
            in_grads.push_back(nodes_[in].needs_grad ? &grad_buffer(in) : nullptr);
        }
        node.backward(BackwardArgs{node.value, node.grad, in_values, in_grads});
    }
}

Tensor Tape::grad(Var v) const {
    check_owner(v);
    const auto& node = nodes_[v.id];
    if (!node.grad_ready) return Tensor(node.value.shape(), 0.0);
    return node.grad;
}

} // namespace pgate::diff
