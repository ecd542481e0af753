#pragma once

#include "pgate/baselines/baselines.hpp"
#include "pgate/data/synth.hpp"
#include "pgate/model/config.hpp"
#include "pgate/train/trainer.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgate::cli {

// Bad keys, values or paths; the CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Source { Default, File, Flag };
std::string_view to_string(Source source);

/// Every setting a command can read, addressable by flat dotted keys.
struct RunConfig {
    std::string command;
    data::SynthConfig synth;
    model::ModelConfig model;
    train::TrainConfig train;
    baselines::MlpConfig mlp;
    std::filesystem::path dataset;
    std::filesystem::path out = "runs";
    std::filesystem::path checkpoint;
    std::filesystem::path graph;
    data::Split split = data::Split::Test;
    std::vector<double> sweep_lambdas{0.0, 0.01, 1.0, 100.0};
    std::vector<std::uint64_t> sweep_seeds{1, 2, 3, 4, 5};

    std::map<std::string, Source> provenance;

    void set(std::string_view key, std::string_view value, Source source);
    std::string get(std::string_view key) const;
    void validate() const;
};

const std::vector<std::string>& config_keys();

// Reads key=value lines; '#' starts a comment. A report file is accepted too: only
// its [config] section is read.
void load_config(RunConfig& config, std::istream& in, Source source = Source::File);
void load_config_file(RunConfig& config, const std::filesystem::path& path);

// [config] section with every key, then [provenance].
void write_config(std::ostream& out, const RunConfig& config);

} // namespace pgate::cli
