#pragma once

#include "pgate/diff/tape.hpp"

#include <functional>
#include <span>
#include <vector>

namespace pgate::diff {

/// Builds a scalar loss on `tape` from parameter variables. Must be deterministic.
using LossBuilder = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_param = 0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t coordinates = 0;
    double max_absolute_error = 0.0;
    double loss = 0.0;
};

/// Loss value and reverse-mode gradient for each parameter tensor.
struct LossAndGrad {
    double loss = 0.0;
    std::vector<Tensor> grads;
};

LossAndGrad loss_and_grad(const LossBuilder& builder, std::span<const Tensor> params);
double loss_value(const LossBuilder& builder, std::span<const Tensor> params);

/// Compares reverse-mode gradients with central differences coordinate by coordinate.
/// Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-8).
/// Throws std::runtime_error when two identical forward passes disagree.
GradCheckResult finite_diff_check(const LossBuilder& builder, std::span<const Tensor> params, double step);

} // namespace pgate::diff
