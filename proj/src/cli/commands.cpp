#include "pgate/cli/commands.hpp"

#include "pgate/graph/structural.hpp"
#include "pgate/util/text.hpp"

#include <fstream>
#include <ostream>

namespace pgate::cli {
namespace fs = std::filesystem;
using util::format_double;

namespace {

void require_path(const fs::path& path, std::string_view key) {
    if (path.empty()) throw ConfigError(std::string(key) + " is required for this command");
    if (!fs::exists(path)) throw ConfigError(std::string(key) + ": " + path.string() + " does not exist");
}

data::Dataset load_dataset(const RunConfig& config) {
    require_path(config.dataset, "dataset");
    return data::import_dataset(config.dataset);
}

void add_metrics(ReportEntries& out, const std::string& prefix, const train::EvalResult& r) {
    out.emplace_back(prefix + ".cascade.rmrse", format_double(r.cascade.rmrse));
    out.emplace_back(prefix + ".cascade.mape", format_double(r.cascade.mape));
    out.emplace_back(prefix + ".personality.rmrse", format_double(r.personality.rmrse));
    out.emplace_back(prefix + ".personality.mape", format_double(r.personality.mape));
}

std::ofstream open_new(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

TrainOutcome train_into(const RunConfig& config, const data::Dataset& dataset, const fs::path& run_dir) {
    const auto ctx = model::GraphContext::build(config.model, dataset.graph, dataset.features);
    auto init = model::init_params(config.model, dataset.graph, dataset.features, config.train.seed);
    const auto init_eval = train::evaluate(init, ctx, dataset, data::Split::Val);

    TrainOutcome outcome;
    outcome.run_dir = run_dir;
    outcome.result = train::train(ctx, dataset, std::move(init), config.train);
    outcome.val = train::evaluate(outcome.result.params, ctx, dataset, data::Split::Val, outcome.result.best_epoch);
    if (!dataset.indices(data::Split::Test).empty()) {
        outcome.test = train::evaluate(outcome.result.params, ctx, dataset, data::Split::Test, outcome.result.best_epoch);
    }

    fs::create_directories(run_dir);
    model::save_checkpoint({config.model, outcome.result.params, config.train.seed, dataset.node_count()},
                           run_dir / "checkpoint");
    {
        auto out = open_new(run_dir / "history.csv");
        train::write_history_csv(out, outcome.result.history);
    }
    ReportEntries results{{"epochs_run", std::to_string(outcome.result.history.size())},
                          {"best_epoch", std::to_string(outcome.result.best_epoch)},
                          {"stopped_early", outcome.result.stopped_early ? "true" : "false"}};
    add_metrics(results, "init", init_eval);
    add_metrics(results, "val", outcome.val);
    if (outcome.test) add_metrics(results, "test", *outcome.test);
    write_report(run_dir / "report.txt", config, results);
    return outcome;
}

} // namespace

fs::path make_run_dir(const fs::path& out, std::string_view command, std::uint64_t seed, double lambda) {
    const std::string stem = std::string(command) + "_seed" + std::to_string(seed) + "_lambda" + format_double(lambda);
    fs::path dir = out / stem;
    for (std::size_t n = 2; fs::exists(dir); ++n) dir = out / (stem + "." + std::to_string(n));
    fs::create_directories(dir);
    return dir;
}

void write_report(const fs::path& path, const RunConfig& config, const ReportEntries& results) {
    auto out = open_new(path);
    write_config(out, config);
    out << "[results]\n";
    for (const auto& [key, value] : results) out << key << '=' << value << '\n';
}

void cmd_synth(const RunConfig& config, std::ostream& log) {
    if (config.dataset.empty()) throw ConfigError("dataset is required for synth");
    if (fs::exists(config.dataset) && !fs::is_empty(config.dataset)) {
        throw ConfigError("dataset: " + config.dataset.string() + " already exists and is not empty");
    }
    const auto dataset = data::synth_generate(config.synth);
    data::export_dataset(dataset, config.dataset);
    std::size_t adopters = 0;
    for (const auto& c : dataset.cascades) adopters += c.total_size();
    log << "synth: " << dataset.node_count() << " nodes, " << dataset.graph.edge_count() << " edges, "
        << dataset.cascades.size() << " cascades (mean size "
        << format_double(static_cast<double>(adopters) / static_cast<double>(dataset.cascades.size())) << ") -> "
        << config.dataset.string() << '\n';
}

fs::path cmd_features(const RunConfig& config, std::ostream& log) {
    require_path(config.graph, "graph");
    std::ifstream in(config.graph);
    if (!in) throw ConfigError("graph: cannot read " + config.graph.string());
    const auto loaded = graph::load_edge_list(in);
    const auto features = graph::structural_features(loaded.graph);
    fs::create_directories(config.out);
    const auto path = config.out / (config.graph.stem().string() + "_features.csv");
    if (fs::exists(path)) throw ConfigError("refusing to overwrite " + path.string());
    auto out = open_new(path);
    graph::write_features_csv(out, features, loaded.names);
    log << "features: " << loaded.graph.node_count() << " nodes -> " << path.string() << '\n';
    return path;
}

TrainOutcome cmd_train(const RunConfig& config, std::ostream& log) {
    const auto dataset = load_dataset(config);
    const auto dir = make_run_dir(config.out, "train", config.train.seed, config.train.lambda);
    auto outcome = train_into(config, dataset, dir);
    log << "train: " << outcome.result.history.size() << " epochs, best " << outcome.result.best_epoch
        << ", val cascade RMRSE " << format_double(outcome.val.cascade.rmrse) << " -> " << dir.string() << '\n';
    return outcome;
}

fs::path cmd_eval(const RunConfig& config, std::ostream& log) {
    require_path(config.checkpoint, "checkpoint");
    const auto dataset = load_dataset(config);
    const auto ck = model::load_checkpoint(config.checkpoint);
    if (ck.node_count != dataset.node_count()) {
        throw ConfigError("checkpoint covers " + std::to_string(ck.node_count) + " nodes, dataset has " +
                          std::to_string(dataset.node_count()));
    }
    const auto ctx = model::GraphContext::build(ck.config, dataset.graph, dataset.features);
    const auto result = train::evaluate(ck.params, ctx, dataset, config.split);

    RunConfig echo = config;
    echo.model = ck.config;
    const auto dir = make_run_dir(config.out, "eval", ck.seed, config.train.lambda);
    ReportEntries results{{"checkpoint.seed", std::to_string(ck.seed)}};
    add_metrics(results, std::string(data::split_name(config.split)), result);
    write_report(dir / "report.txt", echo, results);
    log << "eval (" << data::split_name(config.split) << "): cascade RMRSE " << format_double(result.cascade.rmrse)
        << ", MAPE " << format_double(result.cascade.mape) << "; personality MAPE "
        << format_double(result.personality.mape) << " -> " << dir.string() << '\n';
    return dir;
}

fs::path cmd_baseline(const RunConfig& config, std::ostream& log) {
    const auto dataset = load_dataset(config);
    std::vector<baselines::BaselineResult> results{
        baselines::run_fbc_r(dataset, config.split), baselines::run_fbc_m(dataset, config.split, config.mlp),
        baselines::run_fbp_r(dataset), baselines::run_fbp_m(dataset, config.mlp)};
    const auto dir = make_run_dir(config.out, "baseline", config.mlp.seed, config.train.lambda);
    ReportEntries entries;
    for (const auto& r : results) {
        const auto prefix = r.name + "." + r.metrics.split;
        entries.emplace_back(prefix + ".rmrse", format_double(r.metrics.rmrse));
        entries.emplace_back(prefix + ".mape", format_double(r.metrics.mape));
        log << "baseline " << r.name << " (" << r.metrics.task << ", " << r.metrics.split << "): RMRSE "
            << format_double(r.metrics.rmrse) << ", MAPE " << format_double(r.metrics.mape) << '\n';
    }
    write_report(dir / "report.txt", config, entries);
    log << "baseline -> " << dir.string() << '\n';
    return dir;
}

fs::path cmd_sweep(const RunConfig& config, std::ostream& log) {
    const auto dataset = load_dataset(config);
    if (dataset.indices(data::Split::Test).empty()) throw ConfigError("sweep needs a non-empty test split");
    const auto root = make_run_dir(config.out, "sweep", config.sweep_seeds.front(), config.sweep_lambdas.front());

    auto summary = open_new(root / "summary.csv");
    summary << "lambda,seed,best_epoch,test_cascade_rmrse,test_cascade_mape,test_personality_rmrse,test_personality_mape\n";
    for (double lambda : config.sweep_lambdas) {
        double sums[4] = {0, 0, 0, 0};
        for (auto seed : config.sweep_seeds) {
            RunConfig cell = config;
            cell.command = "train";
            cell.train.lambda = lambda;
            cell.train.seed = seed;
            cell.provenance["train.lambda"] = Source::Flag;
            cell.provenance["train.seed"] = Source::Flag;
            const auto dir = make_run_dir(root, "train", seed, lambda);
            const auto outcome = train_into(cell, dataset, dir);
            const auto& t = *outcome.test;
            const double row[4] = {t.cascade.rmrse, t.cascade.mape, t.personality.rmrse, t.personality.mape};
            summary << format_double(lambda) << ',' << seed << ',' << outcome.result.best_epoch;
            for (int i = 0; i < 4; ++i) {
                summary << ',' << format_double(row[i]);
                sums[i] += row[i];
            }
            summary << '\n';
            log << "sweep: lambda " << format_double(lambda) << " seed " << seed << " test cascade RMRSE "
                << format_double(t.cascade.rmrse) << '\n';
        }
        summary << format_double(lambda) << ",mean,";
        for (double s : sums) summary << ',' << format_double(s / static_cast<double>(config.sweep_seeds.size()));
        summary << '\n';
    }
    write_report(root / "report.txt", config, {{"cells", std::to_string(config.sweep_lambdas.size() * config.sweep_seeds.size())}});
    log << "sweep -> " << root.string() << '\n';
    return root;
}

void run_command(const RunConfig& config, std::ostream& log) {
    config.validate();
    const auto& c = config.command;
    if (c == "synth") cmd_synth(config, log);
    else if (c == "features") cmd_features(config, log);
    else if (c == "train") cmd_train(config, log);
    else if (c == "eval") cmd_eval(config, log);
    else if (c == "baseline") cmd_baseline(config, log);
    else if (c == "sweep") cmd_sweep(config, log);
    else throw ConfigError("unknown command '" + c + "'");
}

} // namespace pgate::cli
