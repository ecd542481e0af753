#include "pgate/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

// Shortcuts for the most common keys; anything else goes through --set.
constexpr Flag kFlags[] = {
    {"--dataset", "dataset", "dataset directory"},
    {"--out", "out", "output directory for run folders"},
    {"--checkpoint", "checkpoint", "checkpoint directory (eval)"},
    {"--graph", "graph", "edge-list file (features)"},
    {"--split", "split", "train | val | test"},
    {"--seed", "train.seed", "training and init seed"},
    {"--synth-seed", "synth.seed", "generator seed"},
    {"--lambda", "train.lambda", "personality loss weight"},
    {"--lr", "train.learning_rate", "Adam learning rate"},
    {"--epochs", "train.max_epochs", "maximum epochs"},
    {"--patience", "train.patience", "early-stopping patience"},
    {"--batch-size", "train.batch_size", "cascades per step"},
    {"--model", "model.base", "gcn | gat | stategnn"},
    {"--gated", "model.gated", "true | false"},
    {"--layers", "model.layers", "layer count K"},
    {"--squash", "model.squash", "raw | sigmoid | softmax"},
    {"--lambdas", "sweep.lambdas", "comma-separated lambda grid (sweep)"},
    {"--seeds", "sweep.seeds", "comma-separated seeds (sweep)"},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personality-gated cascade and personality prediction"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string config_file;
    std::vector<std::string> overrides;
    std::vector<std::string> flag_values(std::size(kFlags));
    bool list_keys = false;

    const std::pair<const char*, const char*> commands[] = {
        {"synth", "Generate a synthetic dataset directory"},
        {"features", "Compute structural features for an edge list"},
        {"train", "Train a model; writes checkpoint, history.csv and report.txt"},
        {"eval", "Evaluate a checkpoint on a dataset split"},
        {"baseline", "Run the feature-based baselines"},
        {"sweep", "Train over a lambda x seed grid and summarize"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_file, "key=value config file (a report.txt also works)");
        sub->add_option("--set", overrides, "override any key: --set key=value")->allow_extra_args(false);
        sub->add_flag("--list-keys", list_keys, "print every config key with its default and exit");
        for (std::size_t i = 0; i < std::size(kFlags); ++i) sub->add_option(kFlags[i].name, flag_values[i], kFlags[i].help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    pgate::cli::RunConfig config;
    config.command = app.get_subcommands().front()->get_name();
    try {
        if (list_keys) {
            for (const auto& key : pgate::cli::config_keys()) std::cout << key << '=' << config.get(key) << '\n';
            return 0;
        }
        if (!config_file.empty()) pgate::cli::load_config_file(config, config_file);
        for (std::size_t i = 0; i < std::size(kFlags); ++i) {
            if (!flag_values[i].empty()) config.set(kFlags[i].key, flag_values[i], pgate::cli::Source::Flag);
        }
        for (const auto& item : overrides) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw pgate::cli::ConfigError("--set expects key=value, got '" + item + "'");
            config.set(item.substr(0, eq), item.substr(eq + 1), pgate::cli::Source::Flag);
        }
        pgate::cli::run_command(config, std::cout);
    } catch (const pgate::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << config.command << " failed: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
