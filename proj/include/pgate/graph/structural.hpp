#pragma once

#include "pgate/graph/graph.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pgate::graph {

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kStructuralColumns = 6;
inline constexpr std::array<std::string_view, kStructuralColumns> kStructuralNames = {
    "coreness", "pagerank", "hub", "authority", "eigenvector", "clustering"};

using FeatureRow = std::array<double, kStructuralColumns>;

/// Per-node structural measures, columns ordered as kStructuralNames.
struct StructuralFeatures {
    std::vector<FeatureRow> rows;

    std::size_t node_count() const { return rows.size(); }
    std::vector<double> column(std::size_t c) const;
    bool operator==(const StructuralFeatures&) const = default;
};

inline constexpr double kPageRankDamping = 0.85;
inline constexpr double kPowerTolerance = 1e-10;
inline constexpr int kMaxPowerIterations = 10000;

// k-core index by peeling, on the undirected projection.
std::vector<double> coreness(const Graph& graph);
// Damped PageRank respecting edge direction; dangling mass spread uniformly.
std::vector<double> pagerank(const Graph& graph);

struct HitsScores {
    std::vector<double> hub;
    std::vector<double> authority;
};
// Unit-L2 hub/authority vectors (principal eigenvectors of A A^T and A^T A).
HitsScores hits(const Graph& graph);
// Unit-L2 principal eigenvector of the undirected adjacency.
std::vector<double> eigenvector_centrality(const Graph& graph);
// triangles / (deg (deg - 1) / 2) on the undirected projection; 0 for deg < 2.
std::vector<double> clustering_coefficient(const Graph& graph);

StructuralFeatures structural_features(const Graph& graph);

void write_features_csv(std::ostream& out, const StructuralFeatures& features, std::span<const std::string> names);
StructuralFeatures read_features_csv(std::istream& in, std::span<const std::string> names);

} // namespace pgate::graph
