#include "pgate/graph/graph.hpp"

#include "pgate/util/text.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace pgate::graph {
namespace {

void build_csr(std::size_t n, const std::vector<Edge>& arcs, std::vector<std::size_t>& offsets,
               std::vector<NodeId>& targets, bool by_source) {
    offsets.assign(n + 1, 0);
    for (const auto& [u, v] : arcs) ++offsets[(by_source ? u : v) + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    targets.assign(arcs.size(), 0);
    auto cursor = offsets;
    for (const auto& [u, v] : arcs) {
        const NodeId key = by_source ? u : v;
        targets[cursor[key]++] = by_source ? v : u;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(targets.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                  targets.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
    }
}

} // namespace

Graph Graph::from_edges(std::size_t node_count, std::span<const Edge> edges, bool directed, BuildStats* stats) {
    BuildStats local;
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u >= node_count || v >= node_count) {
            throw GraphError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") has an endpoint outside [0, " +
                             std::to_string(node_count) + ")");
        }
        if (u == v) {
            ++local.self_loops_dropped;
            continue;
        }
        if (!directed && u > v) std::swap(u, v);
        canon.emplace_back(u, v);
    }
    std::sort(canon.begin(), canon.end());
    const auto unique_end = std::unique(canon.begin(), canon.end());
    local.duplicates_dropped = static_cast<std::size_t>(canon.end() - unique_end);
    canon.erase(unique_end, canon.end());

    Graph g;
    g.node_count_ = node_count;
    g.directed_ = directed;
    g.edges_ = std::move(canon);

    std::vector<Edge> arcs = g.edges_;
    if (!directed) {
        arcs.reserve(2 * g.edges_.size());
        for (const auto& [u, v] : g.edges_) arcs.emplace_back(v, u);
    }
    build_csr(node_count, arcs, g.out_offsets_, g.out_targets_, true);
    build_csr(node_count, arcs, g.in_offsets_, g.in_sources_, false);

    if (stats) *stats = local;
    return g;
}

std::span<const NodeId> Graph::neighbors(NodeId v, Direction direction) const {
    if (v >= node_count_) {
        throw std::out_of_range("node " + std::to_string(v) + " out of range [0, " + std::to_string(node_count_) + ")");
    }
    if (direction == Direction::Out) {
        return {out_targets_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
    }
    return {in_sources_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
}

Graph Graph::undirected_projection() const {
    if (!directed_) return *this;
    return from_edges(node_count_, edges_, false);
}

LoadedGraph load_edge_list(std::istream& in, bool default_directed, const std::vector<std::string>* fixed_names) {
    LoadedGraph result;
    std::unordered_map<std::string, NodeId> ids;
    if (fixed_names) {
        result.names = *fixed_names;
        for (std::size_t i = 0; i < fixed_names->size(); ++i) ids.emplace((*fixed_names)[i], static_cast<NodeId>(i));
    }
    auto lookup = [&](std::string_view name, std::size_t line_no) -> NodeId {
        std::string key(name);
        if (auto it = ids.find(key); it != ids.end()) return it->second;
        if (fixed_names) {
            throw GraphError("line " + std::to_string(line_no) + ": unknown node '" + key + "'");
        }
        const auto id = static_cast<NodeId>(result.names.size());
        ids.emplace(key, id);
        result.names.push_back(std::move(key));
        return id;
    };

    bool directed = default_directed;
    bool seen_content = false;
    std::vector<Edge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = util::trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            if (!seen_content) {
                const auto flag = util::trim(text.substr(1));
                if (flag == "directed") directed = true;
                else if (flag == "undirected") directed = false;
            }
            continue;
        }
        seen_content = true;
        const auto tokens = util::split_whitespace(text);
        if (tokens.size() != 2) {
            throw GraphError("line " + std::to_string(line_no) + ": expected two node ids, got " +
                             std::to_string(tokens.size()) + " fields");
        }
        const NodeId u = lookup(tokens[0], line_no);
        const NodeId v = lookup(tokens[1], line_no);
        edges.emplace_back(u, v);
    }
    if (result.names.empty()) throw GraphError("edge list is empty");

    result.graph = Graph::from_edges(result.names.size(), edges, directed, &result.stats);
    return result;
}

void write_edge_list(std::ostream& out, const Graph& graph, std::span<const std::string> names) {
    if (names.size() != graph.node_count()) throw GraphError("write_edge_list: name map size differs from node count");
    out << (graph.directed() ? "# directed\n" : "# undirected\n");
    for (const auto& [u, v] : graph.edges()) out << names[u] << ' ' << names[v] << '\n';
}

} // namespace pgate::graph
