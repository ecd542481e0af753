#include "pgate/cli/run_config.hpp"

#include "pgate/util/text.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

namespace pgate::cli {
namespace {

using util::format_double;

struct Field {
    std::string key;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

double to_double(std::string_view text) {
    try {
        return util::parse_double(text);
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + std::string(text) + "'");
    }
}

std::size_t to_size(std::string_view text) {
    std::int64_t v = 0;
    try {
        v = util::parse_int(text);
    } catch (const std::exception&) {
        throw ConfigError("expected an integer, got '" + std::string(text) + "'");
    }
    if (v < 0) throw ConfigError("expected a non-negative integer, got '" + std::string(text) + "'");
    return static_cast<std::size_t>(v);
}

bool to_bool(std::string_view text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("expected true or false, got '" + std::string(text) + "'");
}

template <typename T, typename Parse>
std::vector<T> to_list(std::string_view text, Parse parse) {
    std::vector<T> out;
    for (auto item : util::split(text, ',')) {
        const auto trimmed = util::trim(item);
        if (!trimmed.empty()) out.push_back(static_cast<T>(parse(trimmed)));
    }
    if (out.empty()) throw ConfigError("expected a comma-separated list, got '" + std::string(text) + "'");
    return out;
}

template <typename T, typename Format>
std::string join(const std::vector<T>& items, Format format) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + format(items[i]);
    return out;
}

template <typename T>
Field number(std::string key, T RunConfig::*group, double T::*member) {
    return {std::move(key), [=](RunConfig& c, std::string_view v) { c.*group.*member = to_double(v); },
            [=](const RunConfig& c) { return format_double(c.*group.*member); }};
}

template <typename T, typename I>
Field integer(std::string key, T RunConfig::*group, I T::*member) {
    return {std::move(key), [=](RunConfig& c, std::string_view v) { c.*group.*member = static_cast<I>(to_size(v)); },
            [=](const RunConfig& c) { return std::to_string(c.*group.*member); }};
}

Field path(std::string key, std::filesystem::path RunConfig::*member) {
    return {std::move(key), [=](RunConfig& c, std::string_view v) { c.*member = std::filesystem::path(std::string(v)); },
            [=](const RunConfig& c) { return (c.*member).string(); }};
}

template <typename E, typename Parse, typename Show>
Field choice(std::string key, std::function<E&(RunConfig&)> ref, Parse parse, Show show) {
    return {std::move(key),
            [=](RunConfig& c, std::string_view v) {
                try {
                    ref(c) = parse(v);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
            },
            [=](const RunConfig& c) { return std::string(show(ref(const_cast<RunConfig&>(c)))); }};
}

const std::vector<Field>& fields() {
    using data::SynthConfig;
    using model::ModelConfig;
    using train::TrainConfig;
    using baselines::MlpConfig;
    static const std::vector<Field> table = {
        choice<data::GraphModel>(
            "synth.graph", [](RunConfig& c) -> data::GraphModel& { return c.synth.model; },
            [](std::string_view v) {
                if (v == "ba") return data::GraphModel::BarabasiAlbert;
                if (v == "er") return data::GraphModel::ErdosRenyi;
                throw std::invalid_argument("unknown graph model '" + std::string(v) + "' (ba | er)");
            },
            [](data::GraphModel m) { return m == data::GraphModel::BarabasiAlbert ? "ba" : "er"; }),
        integer("synth.ba_m", &RunConfig::synth, &SynthConfig::ba_m),
        number("synth.er_p", &RunConfig::synth, &SynthConfig::er_p),
        integer("synth.nodes", &RunConfig::synth, &SynthConfig::nodes),
        integer("synth.cascades", &RunConfig::synth, &SynthConfig::cascades),
        number("synth.base_prob", &RunConfig::synth, &SynthConfig::base_prob),
        number("synth.w_extroversion", &RunConfig::synth, &SynthConfig::w_extroversion),
        number("synth.w_neuroticism", &RunConfig::synth, &SynthConfig::w_neuroticism),
        number("synth.trait_lo", &RunConfig::synth, &SynthConfig::trait_lo),
        number("synth.trait_hi", &RunConfig::synth, &SynthConfig::trait_hi),
        integer("synth.seeds_per_cascade", &RunConfig::synth, &SynthConfig::seeds_per_cascade),
        number("synth.prefix_fraction", &RunConfig::synth, &SynthConfig::prefix_fraction),
        number("synth.val_ratio", &RunConfig::synth, &SynthConfig::val_ratio),
        number("synth.test_ratio", &RunConfig::synth, &SynthConfig::test_ratio),
        integer("synth.seed", &RunConfig::synth, &SynthConfig::seed),

        choice<model::BaseModel>(
            "model.base", [](RunConfig& c) -> model::BaseModel& { return c.model.base; }, model::parse_base_model,
            [](model::BaseModel b) { return model::to_string(b); }),
        {"model.gated", [](RunConfig& c, std::string_view v) { c.model.gated = to_bool(v); },
         [](const RunConfig& c) { return std::string(c.model.gated ? "true" : "false"); }},
        integer("model.layers", &RunConfig::model, &ModelConfig::layers),
        integer("model.dim_c", &RunConfig::model, &ModelConfig::dim_c),
        integer("model.dim_p", &RunConfig::model, &ModelConfig::dim_p),
        integer("model.embed_dim", &RunConfig::model, &ModelConfig::embed_dim),
        choice<model::GateSquash>(
            "model.squash", [](RunConfig& c) -> model::GateSquash& { return c.model.squash; }, model::parse_gate_squash,
            [](model::GateSquash s) { return model::to_string(s); }),
        choice<model::Activation>(
            "model.activation", [](RunConfig& c) -> model::Activation& { return c.model.activation; },
            model::parse_activation, [](model::Activation a) { return model::to_string(a); }),

        number("train.learning_rate", &RunConfig::train, &TrainConfig::learning_rate),
        number("train.lambda", &RunConfig::train, &TrainConfig::lambda),
        integer("train.max_epochs", &RunConfig::train, &TrainConfig::max_epochs),
        integer("train.patience", &RunConfig::train, &TrainConfig::patience),
        integer("train.batch_size", &RunConfig::train, &TrainConfig::batch_size),
        integer("train.seed", &RunConfig::train, &TrainConfig::seed),

        integer("baseline.hidden", &RunConfig::mlp, &MlpConfig::hidden),
        integer("baseline.epochs", &RunConfig::mlp, &MlpConfig::epochs),
        number("baseline.learning_rate", &RunConfig::mlp, &MlpConfig::learning_rate),
        integer("baseline.seed", &RunConfig::mlp, &MlpConfig::seed),

        path("dataset", &RunConfig::dataset),
        path("out", &RunConfig::out),
        path("checkpoint", &RunConfig::checkpoint),
        path("graph", &RunConfig::graph),
        choice<data::Split>(
            "split", [](RunConfig& c) -> data::Split& { return c.split; }, data::parse_split,
            [](data::Split s) { return data::split_name(s); }),
        {"sweep.lambdas",
         [](RunConfig& c, std::string_view v) { c.sweep_lambdas = to_list<double>(v, to_double); },
         [](const RunConfig& c) { return join(c.sweep_lambdas, [](double x) { return format_double(x); }); }},
        {"sweep.seeds",
         [](RunConfig& c, std::string_view v) { c.sweep_seeds = to_list<std::uint64_t>(v, to_size); },
         [](const RunConfig& c) { return join(c.sweep_seeds, [](std::uint64_t x) { return std::to_string(x); }); }},
    };
    return table;
}

const Field& field(std::string_view key) {
    for (const auto& f : fields()) {
        if (f.key == key) return f;
    }
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

} // namespace

std::string_view to_string(Source source) {
    switch (source) {
    case Source::Default: return "default";
    case Source::File: return "file";
    case Source::Flag: return "flag";
    }
    return "default";
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.push_back(f.key);
        return k;
    }();
    return keys;
}

void RunConfig::set(std::string_view key, std::string_view value, Source source) {
    const auto& f = field(key);
    try {
        f.set(*this, util::trim(value));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
    provenance[f.key] = source;
}

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

void RunConfig::validate() const {
    try {
        synth.validate();
        model.validate();
        train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (mlp.hidden < 1) throw ConfigError("baseline.hidden must be >= 1");
    if (!(mlp.learning_rate > 0.0)) throw ConfigError("baseline.learning_rate must be > 0");
    for (double l : sweep_lambdas) {
        if (!(l >= 0.0)) throw ConfigError("sweep.lambdas entries must be >= 0");
    }
}

void load_config(RunConfig& config, std::istream& in, Source source) {
    std::string line;
    std::size_t number = 0;
    bool active = true;
    while (std::getline(in, line)) {
        ++number;
        auto text = util::trim(line);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = util::trim(text.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            active = text == "[config]";
            continue;
        }
        if (!active) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(number) + ": expected key=value, got '" + std::string(text) + "'");
        }
        const auto key = util::trim(text.substr(0, eq));
        if (key == "command") continue;
        config.set(key, text.substr(eq + 1), source);
    }
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("missing config file " + path.string());
    load_config(config, in, Source::File);
}

void write_config(std::ostream& out, const RunConfig& config) {
    out << "[config]\n";
    if (!config.command.empty()) out << "command=" << config.command << '\n';
    for (const auto& f : fields()) out << f.key << '=' << f.get(config) << '\n';
    out << "[provenance]\n";
    for (const auto& f : fields()) {
        auto it = config.provenance.find(f.key);
        out << f.key << '=' << to_string(it == config.provenance.end() ? Source::Default : it->second) << '\n';
    }
}

} // namespace pgate::cli
