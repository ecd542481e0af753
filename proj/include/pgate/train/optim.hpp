#pragma once

#include "pgate/diff/tensor.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace pgate::train {

struct AdamConfig {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam. State is sized lazily on the first step.
class Adam {
public:
    explicit Adam(AdamConfig config = {});

    // Returns false (and leaves params and state untouched) when any gradient is non-finite.
    bool step(std::vector<diff::Tensor>& params, const std::vector<diff::Tensor>& grads);

    std::size_t steps() const { return t_; }
    std::size_t skipped() const { return skipped_; }
    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    std::vector<diff::Tensor> m_, v_;
    std::size_t t_ = 0;
    std::size_t skipped_ = 0;
};

/// Tracks the best validation score; signals a stop after `patience` epochs without
/// strict improvement.
class EarlyStopper {
public:
    explicit EarlyStopper(std::size_t patience);

    // Feed one epoch's score; returns true when training should stop.
    bool update(double score);
    bool improved() const { return improved_; }
    double best() const { return best_; }
    std::size_t best_epoch() const { return best_epoch_; } // 1-based; 0 before any update
    std::size_t epochs_seen() const { return seen_; }

private:
    std::size_t patience_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t best_epoch_ = 0;
    std::size_t seen_ = 0;
    std::size_t stale_ = 0;
    bool improved_ = false;
};

} // namespace pgate::train
