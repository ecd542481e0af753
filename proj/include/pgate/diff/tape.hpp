#pragma once

#include "pgate/diff/tensor.hpp"

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace pgate::diff {

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    double item() const { return value().item(); }
};

/// Everything a backward rule may read. `grads[i]` is null when input i does not
/// need a gradient.
struct BackwardArgs {
    const Tensor& out_value;
    const Tensor& out_grad;
    std::span<const Tensor* const> inputs;
    std::span<Tensor* const> grads;
};

using BackwardFn = std::function<void(const BackwardArgs&)>;

/// Append-only record of a forward computation. Each record's inputs precede it,
/// so a single reverse sweep visits every record once.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    Var parameter(Tensor value);

    // Appends an op output. Throws NonFiniteError if `value` holds NaN/Inf.
    Var record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
    Var record(std::string_view op, Tensor value, std::span<const Var> inputs, BackwardFn backward);

    const Tensor& value(Var v) const;
    bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }

    // Reverse sweep from a scalar; gradients accumulate in reverse record order.
    void backward(Var loss);

    // Gradient of the last backward() loss w.r.t. v (zeros if v did not contribute).
    Tensor grad(Var v) const;

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        bool needs_grad = false;
        bool grad_ready = false;
    };

    Tensor& grad_buffer(std::size_t id);
    void check_owner(Var v) const;

    std::vector<Node> nodes_;
};

} // namespace pgate::diff
