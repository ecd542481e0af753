#pragma once

#include "pgate/data/dataset.hpp"
#include "pgate/diff/ops.hpp"
#include "pgate/graph/graph.hpp"
#include "pgate/graph/structural.hpp"
#include "pgate/util/random.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace testing {

inline pgate::diff::Tensor random_tensor(pgate::diff::Shape shape, pgate::util::Rng& rng, double lo = -1.0,
                                         double hi = 1.0) {
    pgate::diff::Tensor t(std::move(shape));
    for (auto& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

// Values bounded away from zero so kinked ops stay on one side under finite differences.
inline pgate::diff::Tensor away_from_zero(pgate::diff::Shape shape, pgate::util::Rng& rng) {
    pgate::diff::Tensor t(std::move(shape));
    for (auto& v : t.data()) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.2, 1.0);
    return t;
}

inline pgate::graph::Graph random_graph(std::size_t n, double p, bool directed, pgate::util::Rng& rng) {
    std::vector<pgate::graph::Edge> edges;
    for (pgate::graph::NodeId u = 0; u < n; ++u)
        for (pgate::graph::NodeId v = 0; v < n; ++v) {
            if (u == v || (!directed && v < u)) continue;
            if (rng.uniform() < p) edges.emplace_back(u, v);
        }
    return pgate::graph::Graph::from_edges(n, edges, directed);
}

// In-edge index grouped by destination, as the model builds it.
inline pgate::diff::EdgeIndexPtr edge_index(const pgate::graph::Graph& g) {
    auto idx = std::make_shared<pgate::diff::EdgeIndex>();
    idx->node_count = g.node_count();
    idx->dst_offsets.assign(g.node_count() + 1, 0);
    for (pgate::graph::NodeId v = 0; v < g.node_count(); ++v) {
        for (auto u : g.in_neighbors(v)) {
            idx->src.push_back(u);
            idx->dst.push_back(v);
        }
        idx->dst_offsets[v + 1] = idx->src.size();
    }
    return idx;
}

inline std::vector<std::string> numbered_names(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(std::to_string(i));
    return names;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("pgate_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace testing
