#include "pgate/train/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace pgate::train {
namespace {

void check(std::span<const double> predicted, std::span<const double> truth, const char* what) {
    if (truth.empty()) throw std::invalid_argument(std::string(what) + ": no records");
    if (predicted.size() != truth.size()) throw std::invalid_argument(std::string(what) + ": length mismatch");
    for (double y : truth) {
        if (y == 0.0 || !std::isfinite(y)) throw std::invalid_argument(std::string(what) + ": zero or non-finite ground truth");
    }
}

} // namespace

double rmrse(std::span<const double> predicted, std::span<const double> truth) {
    check(predicted, truth, "rmrse");
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double r = (predicted[i] - truth[i]) / truth[i];
        total += r * r;
    }
    return std::sqrt(total / static_cast<double>(truth.size()));
}

double mape(std::span<const double> predicted, std::span<const double> truth) {
    check(predicted, truth, "mape");
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) total += std::abs((predicted[i] - truth[i]) / truth[i]);
    return total / static_cast<double>(truth.size());
}

MetricsRecord make_record(std::string task, std::string split, std::size_t epoch, std::span<const double> predicted,
                          std::span<const double> truth) {
    return {std::move(task), std::move(split), epoch, rmrse(predicted, truth), mape(predicted, truth)};
}

} // namespace pgate::train
