#pragma once

#include "pgate/data/dataset.hpp"
#include "pgate/model/coupled.hpp"
#include "pgate/model/params.hpp"
#include "pgate/train/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace pgate::train {

struct TrainConfig {
    double learning_rate = 5e-4;
    double lambda = 1.0;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    std::size_t batch_size = 16;
    std::uint64_t seed = 1;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_cascade_loss = 0.0;
    double train_personality_loss = 0.0;
    double val_cascade_rmrse = 0.0;
    double val_cascade_mape = 0.0;
    double val_personality_rmrse = 0.0;
    double val_personality_mape = 0.0;
    std::size_t skipped_steps = 0;
};

struct TrainResult {
    model::ParameterStore params; // best-validation parameters
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;   // 0 when no epoch ran
    bool stopped_early = false;
};

struct EvalResult {
    MetricsRecord cascade;
    MetricsRecord personality;
};

struct BatchLoss {
    diff::Var total;
    diff::Var cascade;
    diff::Var personality;
};

// L_CAS over the listed cascades plus lambda * L_PER (L_CAS alone when lambda == 0).
BatchLoss batch_loss(const model::BoundParams& params, const model::GraphContext& ctx, const data::Dataset& dataset,
                     std::span<const std::size_t> cascades, double lambda);

/// Minibatch multitask training. Each batch runs one forward per cascade plus one
/// cascade-free forward for the personality loss over all nodes.
TrainResult train(const model::GraphContext& ctx, const data::Dataset& dataset, model::ParameterStore initial,
                  const TrainConfig& config);

EvalResult evaluate(const model::ParameterStore& params, const model::GraphContext& ctx, const data::Dataset& dataset,
                    data::Split split, std::size_t epoch = 0);

// Per-cascade size predictions for the given cascade indices.
std::vector<double> predict_sizes(const model::ParameterStore& params, const model::GraphContext& ctx,
                                  const data::Dataset& dataset, std::span<const std::size_t> indices);

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

} // namespace pgate::train
