#include "pgate/data/dataset.hpp"

#include "pgate/util/random.hpp"
#include "pgate/util/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace pgate::data {
namespace {

constexpr std::string_view kFormatTag = "pgate-dataset-1";

std::ifstream open_input(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("missing dataset file: " + path.string());
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

std::unordered_map<std::string_view, NodeId> name_index(std::span<const std::string> names) {
    std::unordered_map<std::string_view, NodeId> ids;
    for (std::size_t i = 0; i < names.size(); ++i) ids.emplace(names[i], static_cast<NodeId>(i));
    return ids;
}

} // namespace

void Personality::validate() const {
    for (std::size_t t = 0; t < kTraitCount; ++t) {
        if (!std::isfinite(traits[t]) || traits[t] <= 0.0) {
            throw DataError("personality trait " + std::string(kTraitNames[t]) + " must be finite and > 0, got " +
                            util::format_double(traits[t]));
        }
    }
}

std::string_view split_name(Split split) {
    switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "train";
}

Split parse_split(std::string_view name) {
    name = util::trim(name);
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    throw DataError("unknown split '" + std::string(name) + "'");
}

std::vector<Cascade> load_cascades(std::istream& in, std::span<const std::string> names) {
    const auto ids = name_index(names);
    std::vector<Cascade> cascades;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = util::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto tab = text.find('\t');
        if (tab == std::string_view::npos) {
            throw DataError("cascade line " + std::to_string(line_no) + ": expected id<TAB>adopters");
        }
        Cascade c;
        c.id = std::string(util::trim(text.substr(0, tab)));
        const auto list = util::trim(text.substr(tab + 1));
        if (c.id.empty() || list.empty()) {
            throw DataError("cascade line " + std::to_string(line_no) + ": empty id or adopter list");
        }
        std::unordered_set<NodeId> seen;
        for (auto token : util::split(list, ',')) {
            token = util::trim(token);
            auto it = ids.find(token);
            if (it == ids.end()) {
                throw DataError("cascade " + c.id + ": unknown node id '" + std::string(token) + "'");
            }
            if (!seen.insert(it->second).second) {
                throw DataError("cascade " + c.id + ": duplicate adopter '" + std::string(token) + "'");
            }
            c.adopters.push_back(it->second);
        }
        cascades.push_back(std::move(c));
    }
    return cascades;
}

void write_cascades(std::ostream& out, std::span<const Cascade> cascades, std::span<const std::string> names) {
    for (const auto& c : cascades) {
        out << c.id << '\t';
        for (std::size_t i = 0; i < c.adopters.size(); ++i) {
            if (i) out << ',';
            out << names[c.adopters[i]];
        }
        out << '\n';
    }
}

Cascade observe_prefix(Cascade cascade, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw DataError("observe_prefix: fraction must lie in (0, 1), got " + util::format_double(fraction));
    }
    const auto n = cascade.total_size();
    if (n == 0) throw DataError("observe_prefix: cascade " + cascade.id + " is empty");
    const auto floor_len = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    cascade.observed_len = std::max<std::size_t>(1, floor_len);
    cascade.degenerate = (n == 1);
    return cascade;
}

std::vector<Split> split_cascades(std::size_t count, double val_ratio, double test_ratio, std::uint64_t seed) {
    if (count < 3) throw DataError("split: need at least 3 cascades, got " + std::to_string(count));
    if (val_ratio < 0.0 || test_ratio < 0.0 || !(val_ratio + test_ratio < 1.0)) {
        throw DataError("split: ratios must be non-negative with r_val + r_test < 1");
    }
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    util::Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    const auto total = static_cast<double>(count);
    const auto n_val = static_cast<std::size_t>(std::floor(total * val_ratio));
    const auto n_test = static_cast<std::size_t>(std::floor(total * test_ratio));
    std::vector<Split> splits(count, Split::Train);
    for (std::size_t i = 0; i < n_val; ++i) splits[order[i]] = Split::Val;
    for (std::size_t i = n_val; i < n_val + n_test; ++i) splits[order[i]] = Split::Test;
    return splits;
}

std::vector<std::size_t> Dataset::indices(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < splits.size(); ++i) {
        if (splits[i] == split) out.push_back(i);
    }
    return out;
}

void Dataset::validate() const {
    const auto n = graph.node_count();
    if (names.size() != n) throw DataError("dataset: node name map has " + std::to_string(names.size()) + " entries for " + std::to_string(n) + " nodes");
    if (features.node_count() != n) throw DataError("dataset: structural features do not cover every node");
    if (personalities.size() != n) throw DataError("dataset: every node needs a personality vector");
    for (const auto& p : personalities) p.validate();
    if (splits.size() != cascades.size()) throw DataError("dataset: split assignment does not cover every cascade");
    for (const auto& c : cascades) {
        if (c.adopters.empty()) throw DataError("dataset: cascade " + c.id + " is empty");
        std::unordered_set<NodeId> seen;
        for (auto u : c.adopters) {
            if (u >= n) throw DataError("dataset: cascade " + c.id + " references a node outside the graph");
            if (!seen.insert(u).second) throw DataError("dataset: cascade " + c.id + " repeats an adopter");
        }
        if (c.observed_len > c.total_size()) throw DataError("dataset: cascade " + c.id + " observed prefix too long");
    }
}

std::vector<Personality> read_personality_csv(std::istream& in, std::span<const std::string> names) {
    std::string line;
    if (!std::getline(in, line) || util::trim(line) != "node,O,C,E,A,N") {
        throw DataError("personality csv: expected header 'node,O,C,E,A,N'");
    }
    const auto ids = name_index(names);
    std::vector<Personality> people(names.size());
    std::vector<bool> seen(names.size(), false);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = util::trim(line);
        if (text.empty()) continue;
        const auto fields = util::split(text, ',');
        if (fields.size() != 1 + kTraitCount) {
            throw DataError("personality csv line " + std::to_string(line_no) + ": expected 6 fields");
        }
        auto it = ids.find(util::trim(fields[0]));
        if (it == ids.end()) throw DataError("personality csv line " + std::to_string(line_no) + ": unknown node");
        Personality p;
        for (std::size_t t = 0; t < kTraitCount; ++t) p.traits[t] = util::parse_double(fields[t + 1]);
        try {
            p.validate();
        } catch (const DataError& e) {
            throw DataError("personality csv line " + std::to_string(line_no) + ": " + e.what());
        }
        people[it->second] = p;
        seen[it->second] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw DataError("personality csv: some nodes have no personality row");
    }
    return people;
}

void write_personality_csv(std::ostream& out, std::span<const Personality> people, std::span<const std::string> names) {
    out << "node,O,C,E,A,N\n";
    for (std::size_t v = 0; v < people.size(); ++v) {
        out << names[v];
        for (double x : people[v].traits) out << ',' << util::format_double(x);
        out << '\n';
    }
}

void export_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
    dataset.validate();
    std::filesystem::create_directories(dir);
    {
        auto out = open_output(dir / "dataset.txt");
        out << "format=" << kFormatTag << '\n'
            << "nodes=" << dataset.node_count() << '\n'
            << "cascades=" << dataset.cascades.size() << '\n'
            << "prefix_fraction=" << util::format_double(dataset.prefix_fraction) << '\n';
    }
    {
        auto out = open_output(dir / "nodes.txt");
        for (const auto& n : dataset.names) out << n << '\n';
    }
    {
        auto out = open_output(dir / "edges.txt");
        graph::write_edge_list(out, dataset.graph, dataset.names);
    }
    {
        auto out = open_output(dir / "cascades.tsv");
        write_cascades(out, dataset.cascades, dataset.names);
    }
    {
        auto out = open_output(dir / "personality.csv");
        write_personality_csv(out, dataset.personalities, dataset.names);
    }
    {
        auto out = open_output(dir / "split.csv");
        out << "cascade,split\n";
        for (std::size_t i = 0; i < dataset.cascades.size(); ++i) {
            out << dataset.cascades[i].id << ',' << split_name(dataset.splits[i]) << '\n';
        }
    }
    {
        auto out = open_output(dir / "features.csv");
        graph::write_features_csv(out, dataset.features, dataset.names);
    }
}

Dataset import_dataset(const std::filesystem::path& dir) {
    Dataset d;
    std::size_t declared_nodes = 0, declared_cascades = 0;
    {
        auto in = open_input(dir / "dataset.txt");
        std::string line;
        bool tagged = false;
        while (std::getline(in, line)) {
            const auto text = util::trim(line);
            if (text.empty()) continue;
            const auto eq = text.find('=');
            if (eq == std::string_view::npos) throw DataError("dataset.txt: malformed line '" + line + "'");
            const auto key = text.substr(0, eq), value = text.substr(eq + 1);
            if (key == "format") tagged = (value == kFormatTag);
            else if (key == "nodes") declared_nodes = static_cast<std::size_t>(util::parse_int(value));
            else if (key == "cascades") declared_cascades = static_cast<std::size_t>(util::parse_int(value));
            else if (key == "prefix_fraction") d.prefix_fraction = util::parse_double(value);
            else throw DataError("dataset.txt: unknown key '" + std::string(key) + "'");
        }
        if (!tagged) throw DataError("dataset.txt: missing or unsupported format tag");
    }
    {
        auto in = open_input(dir / "nodes.txt");
        std::string line;
        while (std::getline(in, line)) {
            if (!util::trim(line).empty()) d.names.emplace_back(util::trim(line));
        }
        if (d.names.size() != declared_nodes) throw DataError("nodes.txt: node count differs from dataset.txt");
    }
    {
        auto in = open_input(dir / "edges.txt");
        auto loaded = graph::load_edge_list(in, false, &d.names);
        d.graph = std::move(loaded.graph);
    }
    {
        auto in = open_input(dir / "cascades.tsv");
        d.cascades = load_cascades(in, d.names);
        if (d.cascades.size() != declared_cascades) throw DataError("cascades.tsv: cascade count differs from dataset.txt");
        for (auto& c : d.cascades) c = observe_prefix(std::move(c), d.prefix_fraction);
    }
    {
        auto in = open_input(dir / "personality.csv");
        d.personalities = read_personality_csv(in, d.names);
    }
    {
        auto in = open_input(dir / "split.csv");
        std::string line;
        std::getline(in, line);
        if (util::trim(line) != "cascade,split") throw DataError("split.csv: expected header 'cascade,split'");
        std::unordered_map<std::string, std::size_t> by_id;
        for (std::size_t i = 0; i < d.cascades.size(); ++i) by_id.emplace(d.cascades[i].id, i);
        d.splits.assign(d.cascades.size(), Split::Train);
        std::vector<bool> seen(d.cascades.size(), false);
        while (std::getline(in, line)) {
            const auto text = util::trim(line);
            if (text.empty()) continue;
            const auto fields = util::split(text, ',');
            if (fields.size() != 2) throw DataError("split.csv: malformed line '" + line + "'");
            auto it = by_id.find(std::string(fields[0]));
            if (it == by_id.end()) throw DataError("split.csv: unknown cascade '" + std::string(fields[0]) + "'");
            d.splits[it->second] = parse_split(fields[1]);
            seen[it->second] = true;
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
            throw DataError("split.csv: some cascades have no split assignment");
        }
    }
    {
        auto in = open_input(dir / "features.csv");
        d.features = graph::read_features_csv(in, d.names);
    }
    d.validate();
    return d;
}

} // namespace pgate::data
