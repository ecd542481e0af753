#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pgate::graph {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

enum class Direction { Out, In };

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable adjacency structure. Self-loops are dropped and duplicate edges merged
/// on construction; neighbor lists are sorted.
class Graph {
public:
    struct BuildStats {
        std::size_t self_loops_dropped = 0;
        std::size_t duplicates_dropped = 0;
    };

    Graph() = default;

    static Graph from_edges(std::size_t node_count, std::span<const Edge> edges, bool directed,
                            BuildStats* stats = nullptr);

    std::size_t node_count() const { return node_count_; }
    // Distinct edges; an undirected edge counts once.
    std::size_t edge_count() const { return edges_.size(); }
    bool directed() const { return directed_; }

    // Canonical sorted edge list (u < v for undirected graphs).
    const std::vector<Edge>& edges() const { return edges_; }

    std::span<const NodeId> neighbors(NodeId v, Direction direction) const;
    std::span<const NodeId> out_neighbors(NodeId v) const { return neighbors(v, Direction::Out); }
    std::span<const NodeId> in_neighbors(NodeId v) const { return neighbors(v, Direction::In); }

    Graph undirected_projection() const;

    bool operator==(const Graph& other) const = default;

private:
    std::size_t node_count_ = 0;
    bool directed_ = false;
    std::vector<Edge> edges_;
    std::vector<std::size_t> out_offsets_{0};
    std::vector<NodeId> out_targets_;
    std::vector<std::size_t> in_offsets_{0};
    std::vector<NodeId> in_sources_;
};

/// A graph read from text together with its node-name map (id -> name).
struct LoadedGraph {
    Graph graph;
    std::vector<std::string> names;
    Graph::BuildStats stats;
};

/// Reads "u v" lines. A first non-blank line of "# directed" or "# undirected"
/// selects the kind; other '#' lines are comments. Without `fixed_names`, ids are
/// assigned in order of first appearance; with it, every name must already be listed.
LoadedGraph load_edge_list(std::istream& in, bool default_directed = false,
                           const std::vector<std::string>* fixed_names = nullptr);

void write_edge_list(std::ostream& out, const Graph& graph, std::span<const std::string> names);

} // namespace pgate::graph
