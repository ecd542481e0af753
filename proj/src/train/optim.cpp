#include "pgate/train/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace pgate::train {

Adam::Adam(AdamConfig config) : config_(config) {
    if (!(config_.learning_rate > 0.0)) throw std::invalid_argument("adam: learning rate must be > 0");
    if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0 && config_.beta2 >= 0.0 && config_.beta2 < 1.0)) {
        throw std::invalid_argument("adam: betas must lie in [0, 1)");
    }
}

bool Adam::step(std::vector<diff::Tensor>& params, const std::vector<diff::Tensor>& grads) {
    if (params.size() != grads.size()) throw std::invalid_argument("adam: gradient count differs from parameter count");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].shape() != grads[i].shape()) {
            throw std::invalid_argument("adam: gradient " + std::to_string(i) + " shaped " +
                                        diff::shape_string(grads[i].shape()) + ", parameter " +
                                        diff::shape_string(params[i].shape()));
        }
    }
    for (const auto& g : grads) {
        if (!g.all_finite()) {
            ++skipped_;
            return false;
        }
    }
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.shape(), 0.0);
            v_.emplace_back(p.shape(), 0.0);
        }
    }
    ++t_;
    const auto [lr, b1, b2, eps] = config_;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].data();
        auto g = grads[i].data();
        auto m = m_[i].data();
        auto v = v_[i].data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
        }
    }
    return true;
}

EarlyStopper::EarlyStopper(std::size_t patience) : patience_(patience) {
    if (patience_ < 1) throw std::invalid_argument("early stopping: patience must be >= 1");
}

bool EarlyStopper::update(double score) {
    ++seen_;
    improved_ = score < best_;
    if (improved_) {
        best_ = score;
        best_epoch_ = seen_;
        stale_ = 0;
        return false;
    }
    return ++stale_ >= patience_;
}

} // namespace pgate::train
