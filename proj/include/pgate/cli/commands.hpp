#pragma once

#include "pgate/cli/run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pgate::cli {

using ReportEntries = std::vector<std::pair<std::string, std::string>>;

// First unused directory `<out>/<command>_seed<seed>_lambda<lambda>`, with a numeric
// suffix when earlier runs already claimed the name.
std::filesystem::path make_run_dir(const std::filesystem::path& out, std::string_view command, std::uint64_t seed,
                                   double lambda);

// Config echo followed by a [results] section.
void write_report(const std::filesystem::path& path, const RunConfig& config, const ReportEntries& results);

struct TrainOutcome {
    std::filesystem::path run_dir;
    train::TrainResult result;
    train::EvalResult val;
    std::optional<train::EvalResult> test;
};

void cmd_synth(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_features(const RunConfig& config, std::ostream& log);
TrainOutcome cmd_train(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_eval(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_baseline(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_sweep(const RunConfig& config, std::ostream& log);

// Dispatches on config.command.
void run_command(const RunConfig& config, std::ostream& log);

} // namespace pgate::cli
