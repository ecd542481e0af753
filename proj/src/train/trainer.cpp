#include "pgate/train/trainer.hpp"

#include "pgate/train/losses.hpp"
#include "pgate/train/optim.hpp"
#include "pgate/util/random.hpp"
#include "pgate/util/text.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pgate::train {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("train: learning_rate must be > 0");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("train: lambda must be >= 0");
    if (patience < 1) throw std::invalid_argument("train: patience must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
}

std::vector<double> predict_sizes(const model::ParameterStore& params, const model::GraphContext& ctx,
                                  const data::Dataset& dataset, std::span<const std::size_t> indices) {
    std::vector<double> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(model::forward_cascade(params, ctx, dataset.cascades[i]).size);
    return out;
}

EvalResult evaluate(const model::ParameterStore& params, const model::GraphContext& ctx, const data::Dataset& dataset,
                    data::Split split, std::size_t epoch) {
    const auto indices = dataset.indices(split);
    if (indices.empty()) throw std::invalid_argument("evaluate: split '" + std::string(data::split_name(split)) + "' is empty");
    std::vector<double> truth;
    for (auto i : indices) truth.push_back(static_cast<double>(dataset.cascades[i].total_size()));
    const auto predicted = predict_sizes(params, ctx, dataset, indices);

    const auto q_hat = model::predict_personality(params, ctx);
    const auto q = personality_matrix(dataset.personalities);
    const std::string tag(data::split_name(split));
    return {make_record("cascade", tag, epoch, predicted, truth),
            make_record("personality", tag, epoch, q_hat.data(), q.data())};
}

BatchLoss batch_loss(const model::BoundParams& params, const model::GraphContext& ctx, const data::Dataset& dataset,
                     std::span<const std::size_t> cascades, double lambda) {
    if (cascades.empty()) throw std::invalid_argument("batch_loss: empty batch");
    std::vector<diff::Var> sizes;
    std::vector<double> truth;
    for (auto i : cascades) {
        const auto& cascade = dataset.cascades[i];
        sizes.push_back(model::forward(params, ctx, cascade.observed()).size);
        truth.push_back(static_cast<double>(cascade.total_size()));
    }
    BatchLoss out;
    out.cascade = loss_cascade(sizes, truth);
    out.personality = loss_personality(model::forward(params, ctx, {}).q_hat, dataset.personalities);
    out.total = lambda > 0.0 ? loss_total(out.cascade, out.personality, lambda) : out.cascade;
    return out;
}

TrainResult train(const model::GraphContext& ctx, const data::Dataset& dataset, model::ParameterStore initial,
                  const TrainConfig& config) {
    config.validate();
    auto train_idx = dataset.indices(data::Split::Train);
    if (train_idx.empty()) throw std::invalid_argument("train: no training cascades");
    const auto val_idx = dataset.indices(data::Split::Val);
    if (val_idx.empty()) throw std::invalid_argument("train: validation split is empty");

    TrainResult result;
    result.params = initial;
    if (config.max_epochs == 0) return result;

    model::ParameterStore params = std::move(initial);
    Adam adam({.learning_rate = config.learning_rate});
    EarlyStopper stopper(config.patience);
    util::Rng rng(util::derive_seed(config.seed, 0x5EED7A1Aull));

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(train_idx));
        double sum_total = 0.0, sum_cas = 0.0, sum_per = 0.0;
        std::size_t batches = 0;
        const std::size_t skipped_before = adam.skipped();

        for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size) {
            const std::size_t stop = std::min(train_idx.size(), start + config.batch_size);
            diff::Tape tape;
            model::BoundParams bound(tape, params, true);
            const auto [loss, l_cas, l_per] =
                batch_loss(bound, ctx, dataset, std::span(train_idx).subspan(start, stop - start), config.lambda);
            tape.backward(loss);

            std::vector<diff::Tensor> grads;
            grads.reserve(bound.vars().size());
            for (const auto& v : bound.vars()) grads.push_back(tape.grad(v));
            adam.step(params.tensors(), grads);

            sum_total += loss.item();
            sum_cas += l_cas.item();
            sum_per += l_per.item();
            ++batches;
        }

        const auto val = evaluate(params, ctx, dataset, data::Split::Val, epoch);
        const auto n = static_cast<double>(batches);
        result.history.push_back({epoch, sum_total / n, sum_cas / n, sum_per / n, val.cascade.rmrse, val.cascade.mape,
                                  val.personality.rmrse, val.personality.mape, adam.skipped() - skipped_before});

        const bool stop = stopper.update(val.cascade.rmrse);
        if (stopper.improved()) {
            result.params = params;
            result.best_epoch = epoch;
        }
        if (stop) {
            result.stopped_early = epoch < config.max_epochs;
            break;
        }
    }
    return result;
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
    out << "epoch,train_loss,train_cascade_loss,train_personality_loss,val_cascade_rmrse,val_cascade_mape,"
           "val_personality_rmrse,val_personality_mape,skipped_steps\n";
    using util::format_double;
    for (const auto& r : history) {
        out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.train_cascade_loss) << ','
            << format_double(r.train_personality_loss) << ',' << format_double(r.val_cascade_rmrse) << ','
            << format_double(r.val_cascade_mape) << ',' << format_double(r.val_personality_rmrse) << ','
            << format_double(r.val_personality_mape) << ',' << r.skipped_steps << '\n';
    }
}

} // namespace pgate::train
