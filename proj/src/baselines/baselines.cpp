#include "pgate/baselines/baselines.hpp"

#include "pgate/diff/ops.hpp"
#include "pgate/train/optim.hpp"
#include "pgate/util/random.hpp"

#include <cmath>
#include <stdexcept>

namespace pgate::baselines {

std::vector<FeatureRow> user_features(const data::Dataset& dataset) {
    std::vector<FeatureRow> rows;
    rows.reserve(dataset.node_count());
    for (std::size_t v = 0; v < dataset.node_count(); ++v) {
        const auto& f = dataset.features.rows.at(v);
        const auto& t = dataset.personalities.at(v).traits;
        rows.push_back({dataset.names.at(v), {f.begin(), f.end()}, {t.begin(), t.end()}});
    }
    return rows;
}

FeatureRow cascade_features(const data::Dataset& dataset, const data::Cascade& cascade) {
    const auto observed = cascade.observed();
    if (observed.empty()) throw std::invalid_argument("cascade_features: cascade " + cascade.id + " has no observed prefix");
    FeatureRow row{cascade.id, std::vector<double>(kCascadeFeatureWidth, 0.0), {static_cast<double>(cascade.total_size())}};
    row.features[0] = static_cast<double>(observed.size());
    for (auto u : observed) {
        const auto& f = dataset.features.rows.at(u);
        for (std::size_t c = 0; c < graph::kStructuralColumns; ++c) row.features[c + 1] += f[c];
    }
    for (std::size_t c = 1; c < kCascadeFeatureWidth; ++c) row.features[c] /= static_cast<double>(observed.size());
    return row;
}

LinearModel fit_linear(std::span<const std::vector<double>> x, std::span<const double> y, double ridge) {
    if (x.size() < 2) throw std::invalid_argument("fit_linear: need at least 2 rows");
    if (x.size() != y.size()) throw std::invalid_argument("fit_linear: row and target counts differ");
    const std::size_t d = x.front().size() + 1;
    std::vector<double> a(d * d, 0.0), b(d, 0.0), row(d);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() + 1 != d) throw std::invalid_argument("fit_linear: ragged feature rows");
        std::copy(x[i].begin(), x[i].end(), row.begin());
        row[d - 1] = 1.0;
        for (std::size_t r = 0; r < d; ++r) {
            b[r] += row[r] * y[i];
            for (std::size_t c = 0; c < d; ++c) a[r * d + c] += row[r] * row[c];
        }
    }
    for (std::size_t r = 0; r < d; ++r) a[r * d + r] += ridge;

    // Cholesky A = L L^T in place (lower triangle), then two triangular solves.
    for (std::size_t j = 0; j < d; ++j) {
        double diag = a[j * d + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
        if (!(diag > 0.0)) throw std::runtime_error("fit_linear: normal equations are not positive definite");
        const double l = std::sqrt(diag);
        a[j * d + j] = l;
        for (std::size_t i = j + 1; i < d; ++i) {
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
            a[i * d + j] = s / l;
        }
    }
    std::vector<double> w(d);
    for (std::size_t i = 0; i < d; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * d + k] * w[k];
        w[i] = s / a[i * d + i];
    }
    for (std::size_t i = d; i-- > 0;) {
        double s = w[i];
        for (std::size_t k = i + 1; k < d; ++k) s -= a[k * d + i] * w[k];
        w[i] = s / a[i * d + i];
    }
    return {std::move(w)};
}

double predict_linear(const LinearModel& model, std::span<const double> row) {
    if (row.size() + 1 != model.weights.size()) throw std::invalid_argument("predict_linear: feature width mismatch");
    double out = model.weights.back();
    for (std::size_t i = 0; i < row.size(); ++i) out += model.weights[i] * row[i];
    return out;
}

namespace {

diff::Tensor standardized(const MlpModel& model, std::span<const std::vector<double>> x) {
    const std::size_t d = model.mean.size();
    diff::Tensor t(diff::Shape{x.size(), d});
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != d) throw std::invalid_argument("mlp: feature width mismatch");
        for (std::size_t j = 0; j < d; ++j) t(i, j) = (x[i][j] - model.mean[j]) / model.scale[j];
    }
    return t;
}

diff::Var with_bias(diff::Var h) {
    const std::vector<diff::Var> parts{h, h.tape->constant(diff::Tensor(diff::Shape{h.value().rows(), 1}, 1.0))};
    return diff::concat(parts, 1);
}

diff::Var mlp_forward(std::span<const diff::Var> weights, diff::Var input) {
    diff::Var h = input;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        h = diff::linear(with_bias(h), weights[l]);
        if (l + 1 < weights.size()) h = diff::relu(h);
    }
    return h;
}

diff::Var mlp_objective(diff::Var predicted, const diff::Tensor& target, MlpLoss loss) {
    diff::Tape& tape = *predicted.tape;
    auto err = diff::sub(predicted, tape.constant(target));
    if (loss == MlpLoss::Relative) {
        diff::Tensor inverse(target.shape());
        for (std::size_t i = 0; i < target.size(); ++i) {
            if (target[i] == 0.0) throw std::invalid_argument("mlp: relative loss needs nonzero targets");
            inverse[i] = 1.0 / target[i];
        }
        err = diff::mul(err, tape.constant(std::move(inverse)));
    }
    return diff::mean(diff::square(err));
}

diff::Tensor target_matrix(std::span<const std::vector<double>> y, std::size_t outputs) {
    diff::Tensor t(diff::Shape{y.size(), outputs});
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i].size() != outputs) throw std::invalid_argument("mlp: ragged targets");
        for (std::size_t j = 0; j < outputs; ++j) t(i, j) = y[i][j];
    }
    return t;
}

} // namespace

MlpModel init_mlp(std::size_t inputs, std::size_t outputs, const MlpConfig& config) {
    if (inputs == 0 || outputs == 0 || config.hidden == 0) throw std::invalid_argument("mlp: widths must be >= 1");
    util::Rng rng(config.seed);
    MlpModel model;
    model.mean.assign(inputs, 0.0);
    model.scale.assign(inputs, 1.0);
    const std::size_t widths[] = {inputs, config.hidden, config.hidden, outputs};
    for (std::size_t l = 0; l < 3; ++l) {
        const std::size_t in = widths[l], out = widths[l + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(in + out));
        diff::Tensor w(diff::Shape{out, in + 1}, 0.0);
        for (std::size_t r = 0; r < out; ++r)
            for (std::size_t c = 0; c < in; ++c) w(r, c) = rng.uniform(-a, a);
        model.weights.push_back(std::move(w));
    }
    return model;
}

MlpModel fit_mlp(std::span<const std::vector<double>> x, std::span<const std::vector<double>> y, const MlpConfig& config) {
    if (x.empty()) throw std::invalid_argument("fit_mlp: need at least 1 row");
    if (x.size() != y.size()) throw std::invalid_argument("fit_mlp: row and target counts differ");
    const std::size_t inputs = x.front().size(), outputs = y.front().size();
    MlpModel model = init_mlp(inputs, outputs, config);
    for (std::size_t j = 0; j < inputs; ++j) {
        double mean = 0.0, sq = 0.0;
        for (const auto& row : x) mean += row.at(j);
        mean /= static_cast<double>(x.size());
        for (const auto& row : x) sq += (row[j] - mean) * (row[j] - mean);
        const double sd = std::sqrt(sq / static_cast<double>(x.size()));
        model.mean[j] = mean;
        model.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    const diff::Tensor input = standardized(model, x);
    const diff::Tensor target = target_matrix(y, outputs);

    train::Adam adam({.learning_rate = config.learning_rate});
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        diff::Tape tape;
        std::vector<diff::Var> w;
        for (const auto& t : model.weights) w.push_back(tape.parameter(t));
        auto loss = mlp_objective(mlp_forward(w, tape.constant(input)), target, config.loss);
        tape.backward(loss);
        std::vector<diff::Tensor> grads;
        for (const auto& v : w) grads.push_back(tape.grad(v));
        adam.step(model.weights, grads);
        model.loss_history.push_back(loss.item());
    }
    return model;
}

std::vector<double> predict_mlp(const MlpModel& model, std::span<const double> row) {
    const std::vector<double> copy(row.begin(), row.end());
    diff::Tape tape;
    std::vector<diff::Var> w;
    for (const auto& t : model.weights) w.push_back(tape.constant(t));
    const auto out = mlp_forward(w, tape.constant(standardized(model, std::span(&copy, 1))));
    const auto values = out.value().values();
    return {values.begin(), values.end()};
}

double mlp_loss(const MlpModel& model, std::span<const std::vector<double>> x, std::span<const std::vector<double>> y,
                MlpLoss loss) {
    if (x.empty() || x.size() != y.size()) throw std::invalid_argument("mlp_loss: bad row counts");
    diff::Tape tape;
    std::vector<diff::Var> w;
    for (const auto& t : model.weights) w.push_back(tape.constant(t));
    return mlp_objective(mlp_forward(w, tape.constant(standardized(model, x))), target_matrix(y, y.front().size()), loss)
        .item();
}

namespace {

struct CascadeTable {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
};

CascadeTable cascade_table(const data::Dataset& dataset, data::Split split) {
    CascadeTable table;
    for (auto i : dataset.indices(split)) {
        auto row = cascade_features(dataset, dataset.cascades[i]);
        table.x.push_back(std::move(row.features));
        table.y.push_back(row.targets.front());
    }
    if (table.x.empty()) throw std::invalid_argument("baseline: split '" + std::string(data::split_name(split)) + "' is empty");
    return table;
}

} // namespace

BaselineResult run_fbc_r(const data::Dataset& dataset, data::Split split) {
    const auto train_rows = cascade_table(dataset, data::Split::Train);
    const auto eval_rows = cascade_table(dataset, split);
    const auto model = fit_linear(train_rows.x, train_rows.y);
    std::vector<double> predicted;
    for (const auto& row : eval_rows.x) predicted.push_back(predict_linear(model, row));
    return {"fbc-r", train::make_record("cascade", std::string(data::split_name(split)), 0, predicted, eval_rows.y)};
}

BaselineResult run_fbc_m(const data::Dataset& dataset, data::Split split, const MlpConfig& config) {
    const auto train_rows = cascade_table(dataset, data::Split::Train);
    const auto eval_rows = cascade_table(dataset, split);
    std::vector<std::vector<double>> targets;
    for (double v : train_rows.y) targets.push_back({v});
    const auto model = fit_mlp(train_rows.x, targets, config);
    std::vector<double> predicted;
    for (const auto& row : eval_rows.x) predicted.push_back(predict_mlp(model, row).front());
    return {"fbc-m", train::make_record("cascade", std::string(data::split_name(split)), 0, predicted, eval_rows.y)};
}

BaselineResult run_fbp_r(const data::Dataset& dataset) {
    const auto rows = user_features(dataset);
    std::vector<std::vector<double>> x;
    for (const auto& r : rows) x.push_back(r.features);
    std::vector<double> predicted(rows.size() * data::kTraitCount), truth(predicted.size());
    for (std::size_t t = 0; t < data::kTraitCount; ++t) {
        std::vector<double> y;
        for (const auto& r : rows) y.push_back(r.targets[t]);
        const auto model = fit_linear(x, y);
        for (std::size_t v = 0; v < rows.size(); ++v) {
            predicted[v * data::kTraitCount + t] = predict_linear(model, x[v]);
            truth[v * data::kTraitCount + t] = y[v];
        }
    }
    return {"fbp-r", train::make_record("personality", "all", 0, predicted, truth)};
}

BaselineResult run_fbp_m(const data::Dataset& dataset, const MlpConfig& config) {
    const auto rows = user_features(dataset);
    std::vector<std::vector<double>> x, y;
    for (const auto& r : rows) {
        x.push_back(r.features);
        y.push_back(r.targets);
    }
    const auto model = fit_mlp(x, y, config);
    std::vector<double> predicted, truth;
    for (std::size_t v = 0; v < rows.size(); ++v) {
        const auto out = predict_mlp(model, x[v]);
        predicted.insert(predicted.end(), out.begin(), out.end());
        truth.insert(truth.end(), y[v].begin(), y[v].end());
    }
    return {"fbp-m", train::make_record("personality", "all", 0, predicted, truth)};
}

} // namespace pgate::baselines
