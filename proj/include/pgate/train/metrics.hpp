#pragma once

#include <span>
#include <string>

namespace pgate::train {

// sqrt of the mean squared relative error.
double rmrse(std::span<const double> predicted, std::span<const double> truth);
// Mean absolute relative error.
double mape(std::span<const double> predicted, std::span<const double> truth);

struct MetricsRecord {
    std::string task;  // "cascade" or "personality"
    std::string split;
    std::size_t epoch = 0;
    double rmrse = 0.0;
    double mape = 0.0;
};

MetricsRecord make_record(std::string task, std::string split, std::size_t epoch, std::span<const double> predicted,
                          std::span<const double> truth);

} // namespace pgate::train
