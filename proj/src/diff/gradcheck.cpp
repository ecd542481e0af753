#include "pgate/diff/gradcheck.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace pgate::diff {
namespace {

std::vector<Var> bind(Tape& tape, std::span<const Tensor> params, bool with_grad) {
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const auto& p : params) vars.push_back(with_grad ? tape.parameter(p) : tape.constant(p));
    return vars;
}

} // namespace

LossAndGrad loss_and_grad(const LossBuilder& builder, std::span<const Tensor> params) {
    Tape tape;
    auto vars = bind(tape, params, true);
    Var loss = builder(tape, vars);
    tape.backward(loss);
    LossAndGrad out;
    out.loss = loss.item();
    out.grads.reserve(vars.size());
    for (const auto& v : vars) out.grads.push_back(tape.grad(v));
    return out;
}

double loss_value(const LossBuilder& builder, std::span<const Tensor> params) {
    Tape tape;
    auto vars = bind(tape, params, false);
    return builder(tape, vars).item();
}

GradCheckResult finite_diff_check(const LossBuilder& builder, std::span<const Tensor> params, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_diff_check: step must be positive");

    const auto analytic = loss_and_grad(builder, params);
    const double replay = loss_value(builder, params);
    if (std::bit_cast<std::uint64_t>(replay) != std::bit_cast<std::uint64_t>(analytic.loss)) {
        throw std::runtime_error("finite_diff_check: loss builder is not deterministic");
    }

    GradCheckResult result;
    result.loss = analytic.loss;
    std::vector<Tensor> probe(params.begin(), params.end());
    for (std::size_t pi = 0; pi < probe.size(); ++pi) {
        for (std::size_t i = 0; i < probe[pi].size(); ++i) {
            const double original = probe[pi][i];
            probe[pi][i] = original + step;
            const double up = loss_value(builder, probe);
            probe[pi][i] = original - step;
            const double down = loss_value(builder, probe);
            probe[pi][i] = original;

            const double numeric = (up - down) / (2.0 * step);
            const double exact = analytic.grads[pi][i];
            const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
            const double err = std::abs(exact - numeric) / denom;
            ++result.coordinates;
            result.max_absolute_error = std::max(result.max_absolute_error, std::abs(exact - numeric));
            if (err > result.max_relative_error) {
                result.max_relative_error = err;
                result.worst_param = pi;
                result.worst_index = i;
                result.analytic = exact;
                result.numeric = numeric;
            }
        }
    }
    return result;
}

} // namespace pgate::diff
