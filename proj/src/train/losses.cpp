#include "pgate/train/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pgate::train {
namespace {

void check_cascade_inputs(std::size_t predicted, std::span<const double> truth) {
    if (truth.empty()) throw std::invalid_argument("loss_cascade: no cascades");
    if (predicted != truth.size()) {
        throw std::invalid_argument("loss_cascade: " + std::to_string(predicted) + " predictions for " +
                                    std::to_string(truth.size()) + " targets");
    }
    for (double n : truth) {
        if (!(n >= 1.0)) throw std::invalid_argument("loss_cascade: ground-truth size must be >= 1");
    }
}

void check_personality_inputs(const diff::Shape& shape, std::span<const data::Personality> truth) {
    if (truth.empty()) throw std::invalid_argument("loss_personality: no nodes");
    if (shape.size() != 2 || shape[0] != truth.size() || shape[1] != data::kTraitCount) {
        throw std::invalid_argument("loss_personality: predictions shaped " + diff::shape_string(shape) + " for " +
                                    std::to_string(truth.size()) + " nodes");
    }
    for (const auto& p : truth) p.validate();
}

} // namespace

double loss_cascade(std::span<const double> predicted, std::span<const double> truth) {
    check_cascade_inputs(predicted.size(), truth);
    double total = 0.0;
    for (std::size_t m = 0; m < truth.size(); ++m) {
        const double r = (predicted[m] - truth[m]) / truth[m];
        total += r * r;
    }
    return total / static_cast<double>(truth.size());
}

diff::Var loss_cascade(std::span<const diff::Var> predicted, std::span<const double> truth) {
    check_cascade_inputs(predicted.size(), truth);
    diff::Tape& tape = *predicted.front().tape;
    diff::Tensor target(diff::Shape{truth.size()});
    diff::Tensor inverse(diff::Shape{truth.size()});
    for (std::size_t m = 0; m < truth.size(); ++m) {
        target[m] = truth[m];
        inverse[m] = 1.0 / truth[m];
    }
    auto rel = diff::mul(diff::sub(diff::stack(predicted), tape.constant(std::move(target))), tape.constant(std::move(inverse)));
    return diff::mean(diff::square(rel));
}

diff::Tensor personality_matrix(std::span<const data::Personality> people) {
    diff::Tensor t(diff::Shape{people.size(), data::kTraitCount});
    for (std::size_t v = 0; v < people.size(); ++v) {
        for (std::size_t j = 0; j < data::kTraitCount; ++j) t(v, j) = people[v].traits[j];
    }
    return t;
}

double loss_personality(const diff::Tensor& predicted, std::span<const data::Personality> truth) {
    check_personality_inputs(predicted.shape(), truth);
    double total = 0.0;
    for (std::size_t v = 0; v < truth.size(); ++v) {
        for (std::size_t j = 0; j < data::kTraitCount; ++j) {
            const double q = truth[v].traits[j];
            const double r = (predicted(v, j) - q) / q;
            total += r * r;
        }
    }
    return total / static_cast<double>(truth.size());
}

diff::Var loss_personality(diff::Var predicted, std::span<const data::Personality> truth) {
    check_personality_inputs(predicted.shape(), truth);
    diff::Tape& tape = *predicted.tape;
    diff::Tensor target = personality_matrix(truth);
    diff::Tensor inverse(target.shape());
    for (std::size_t i = 0; i < target.size(); ++i) inverse[i] = 1.0 / target[i];
    auto rel = diff::mul(diff::sub(predicted, tape.constant(std::move(target))), tape.constant(std::move(inverse)));
    return diff::scale(diff::sum(diff::square(rel)), 1.0 / static_cast<double>(truth.size()));
}

double loss_total(double cascade, double personality, double lambda) {
    if (!std::isfinite(cascade) || !std::isfinite(personality)) throw std::invalid_argument("loss_total: non-finite loss");
    return cascade + lambda * personality;
}

diff::Var loss_total(diff::Var cascade, diff::Var personality, double lambda) {
    return diff::add(cascade, diff::scale(personality, lambda));
}

} // namespace pgate::train
