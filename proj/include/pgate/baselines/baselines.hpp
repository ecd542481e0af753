#pragma once

#include "pgate/data/dataset.hpp"
#include "pgate/diff/tensor.hpp"
#include "pgate/train/metrics.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pgate::baselines {

inline constexpr std::size_t kUserFeatureWidth = graph::kStructuralColumns;
inline constexpr std::size_t kCascadeFeatureWidth = graph::kStructuralColumns + 1;

struct FeatureRow {
    std::string id;
    std::vector<double> features;
    std::vector<double> targets;
};

// One row per node: the structural measures, targets are the five traits.
std::vector<FeatureRow> user_features(const data::Dataset& dataset);

// Observed prefix size followed by the mean of each structural measure over the
// observed adopters; target is the final cascade size.
FeatureRow cascade_features(const data::Dataset& dataset, const data::Cascade& cascade);

struct LinearModel {
    std::vector<double> weights; // one per feature, bias last
};

// Least squares via the normal equations with a ridge term on the diagonal.
LinearModel fit_linear(std::span<const std::vector<double>> x, std::span<const double> y, double ridge = 1e-8);
double predict_linear(const LinearModel& model, std::span<const double> row);

enum class MlpLoss { Mse, Relative };

struct MlpConfig {
    std::size_t hidden = 32;
    std::size_t epochs = 300;
    double learning_rate = 1e-2;
    std::uint64_t seed = 1;
    MlpLoss loss = MlpLoss::Relative;
};

/// Three fully connected layers (ReLU between them) on standardized inputs.
struct MlpModel {
    std::vector<double> mean, scale;   // input standardization
    std::vector<diff::Tensor> weights; // out x (in + 1), bias in the last column
    std::vector<double> loss_history;  // full-batch training loss per epoch
};

MlpModel init_mlp(std::size_t inputs, std::size_t outputs, const MlpConfig& config);
MlpModel fit_mlp(std::span<const std::vector<double>> x, std::span<const std::vector<double>> y, const MlpConfig& config);
std::vector<double> predict_mlp(const MlpModel& model, std::span<const double> row);
double mlp_loss(const MlpModel& model, std::span<const std::vector<double>> x, std::span<const std::vector<double>> y,
                MlpLoss loss);

struct BaselineResult {
    std::string name; // fbc-r, fbc-m, fbp-r, fbp-m
    train::MetricsRecord metrics;
};

// Cascade baselines fit on the train split and report on `split`. Personality
// baselines fit and report on all nodes, matching the transductive GNN evaluation.
BaselineResult run_fbc_r(const data::Dataset& dataset, data::Split split);
BaselineResult run_fbc_m(const data::Dataset& dataset, data::Split split, const MlpConfig& config);
BaselineResult run_fbp_r(const data::Dataset& dataset);
BaselineResult run_fbp_m(const data::Dataset& dataset, const MlpConfig& config);

} // namespace pgate::baselines
