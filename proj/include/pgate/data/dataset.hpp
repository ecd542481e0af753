#pragma once

#include "pgate/graph/graph.hpp"
#include "pgate/graph/structural.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pgate::data {

using graph::NodeId;

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adopters in activation order. `observed_len` is the length of the prefix handed
/// to predictors (0 until observe_prefix runs).
struct Cascade {
    std::string id;
    std::vector<NodeId> adopters;
    std::size_t observed_len = 0;
    bool degenerate = false;

    std::size_t total_size() const { return adopters.size(); }
    std::span<const NodeId> observed() const { return {adopters.data(), observed_len}; }
    bool operator==(const Cascade&) const = default;
};

// Big Five order.
enum Trait : std::size_t { kOpenness = 0, kConscientiousness, kExtroversion, kAgreeableness, kNeuroticism };
inline constexpr std::size_t kTraitCount = 5;
inline constexpr std::array<std::string_view, kTraitCount> kTraitNames = {"O", "C", "E", "A", "N"};

/// Five strictly positive trait scores.
struct Personality {
    std::array<double, kTraitCount> traits{};

    void validate() const;
    bool operator==(const Personality&) const = default;
};

enum class Split { Train, Val, Test };
std::string_view split_name(Split split);
Split parse_split(std::string_view name);

/// Parses "id<TAB>u1,u2,...". observed_len is left at 0.
std::vector<Cascade> load_cascades(std::istream& in, std::span<const std::string> names);
void write_cascades(std::ostream& out, std::span<const Cascade> cascades, std::span<const std::string> names);

/// observed_len = max(1, floor(fraction * size)); a size-1 cascade is flagged degenerate.
Cascade observe_prefix(Cascade cascade, double fraction);

/// Seeded shuffle, then floor(N r_val) to val, floor(N r_test) to test, rest to train.
std::vector<Split> split_cascades(std::size_t count, double val_ratio, double test_ratio, std::uint64_t seed);

struct Dataset {
    graph::Graph graph;
    std::vector<std::string> names;
    graph::StructuralFeatures features;
    std::vector<Cascade> cascades;
    std::vector<Personality> personalities;
    std::vector<Split> splits;
    double prefix_fraction = 0.5;

    std::size_t node_count() const { return graph.node_count(); }
    std::vector<std::size_t> indices(Split split) const;
    void validate() const;
    bool operator==(const Dataset&) const = default;
};

std::vector<Personality> read_personality_csv(std::istream& in, std::span<const std::string> names);
void write_personality_csv(std::ostream& out, std::span<const Personality> people, std::span<const std::string> names);

/// Directory layout: dataset.txt, nodes.txt, edges.txt, cascades.tsv, personality.csv,
/// split.csv, features.csv.
void export_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset import_dataset(const std::filesystem::path& dir);

} // namespace pgate::data
