#include "pgate/graph/structural.hpp"

#include "pgate/util/text.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

namespace pgate::graph {
namespace {

void normalize_l2(std::vector<double>& x) {
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    for (auto& v : x) v /= norm;
}

using LinearMap = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Power iteration on (M + I), which shares M's eigenvectors but has a strictly
// dominant eigenvalue for the nonnegative symmetric M used here (no bipartite oscillation).
std::vector<double> principal_vector(std::size_t n, const LinearMap& apply, std::string_view measure) {
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> next(n);
    for (int iter = 0; iter < kMaxPowerIterations; ++iter) {
        apply(x, next);
        for (std::size_t i = 0; i < n; ++i) next[i] += x[i];
        normalize_l2(next);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - x[i]));
        x.swap(next);
        if (diff < kPowerTolerance) {
            if (std::accumulate(x.begin(), x.end(), 0.0) < 0.0) {
                for (auto& v : x) v = -v;
            }
            return x;
        }
    }
    throw ConvergenceError(std::string(measure) + " did not converge within " + std::to_string(kMaxPowerIterations) +
                           " iterations");
}

} // namespace

std::vector<double> StructuralFeatures::column(std::size_t c) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.at(c));
    return out;
}

std::vector<double> coreness(const Graph& graph) {
    const Graph g = graph.undirected_projection();
    const std::size_t n = g.node_count();
    std::vector<std::size_t> degree(n);
    std::set<std::pair<std::size_t, NodeId>> queue;
    for (NodeId v = 0; v < n; ++v) {
        degree[v] = g.out_neighbors(v).size();
        queue.emplace(degree[v], v);
    }
    std::vector<double> core(n, 0.0);
    std::vector<bool> removed(n, false);
    std::size_t k = 0;
    while (!queue.empty()) {
        const auto [d, v] = *queue.begin();
        queue.erase(queue.begin());
        k = std::max(k, d);
        core[v] = static_cast<double>(k);
        removed[v] = true;
        for (NodeId u : g.out_neighbors(v)) {
            if (removed[u]) continue;
            queue.erase({degree[u], u});
            --degree[u];
            queue.emplace(degree[u], u);
        }
    }
    return core;
}

std::vector<double> pagerank(const Graph& graph) {
    const std::size_t n = graph.node_count();
    if (n == 0) throw GraphError("pagerank: empty graph");
    const double nn = static_cast<double>(n);
    std::vector<double> x(n, 1.0 / nn), next(n);
    for (int iter = 0; iter < kMaxPowerIterations; ++iter) {
        double dangling = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            if (graph.out_neighbors(u).empty()) dangling += x[u];
        }
        const double base = (1.0 - kPageRankDamping) / nn + kPageRankDamping * dangling / nn;
        for (NodeId v = 0; v < n; ++v) {
            double acc = 0.0;
            for (NodeId u : graph.in_neighbors(v)) acc += x[u] / static_cast<double>(graph.out_neighbors(u).size());
            next[v] = base + kPageRankDamping * acc;
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff += std::abs(next[i] - x[i]);
        x.swap(next);
        if (diff < kPowerTolerance) {
            const double total = std::accumulate(x.begin(), x.end(), 0.0);
            for (auto& v : x) v /= total;
            return x;
        }
    }
    throw ConvergenceError("pagerank did not converge within " + std::to_string(kMaxPowerIterations) + " iterations");
}

HitsScores hits(const Graph& graph) {
    const std::size_t n = graph.node_count();
    if (n == 0) throw GraphError("hits: empty graph");
    std::vector<double> tmp(n);
    // A^T A x: first y = A x (y_u = sum over u->v of x_v), then (A^T y)_v = sum over u->v of y_u.
    auto ata = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (NodeId u = 0; u < n; ++u) {
            double acc = 0.0;
            for (NodeId v : graph.out_neighbors(u)) acc += x[v];
            tmp[u] = acc;
        }
        for (NodeId v = 0; v < n; ++v) {
            double acc = 0.0;
            for (NodeId u : graph.in_neighbors(v)) acc += tmp[u];
            out[v] = acc;
        }
    };
    auto aat = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (NodeId v = 0; v < n; ++v) {
            double acc = 0.0;
            for (NodeId u : graph.in_neighbors(v)) acc += x[u];
            tmp[v] = acc;
        }
        for (NodeId u = 0; u < n; ++u) {
            double acc = 0.0;
            for (NodeId v : graph.out_neighbors(u)) acc += tmp[v];
            out[u] = acc;
        }
    };
    HitsScores s;
    s.authority = principal_vector(n, ata, "authority score");
    s.hub = principal_vector(n, aat, "hub score");
    return s;
}

std::vector<double> eigenvector_centrality(const Graph& graph) {
    const Graph g = graph.undirected_projection();
    const std::size_t n = g.node_count();
    if (n == 0) throw GraphError("eigenvector centrality: empty graph");
    auto adj = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (NodeId v = 0; v < n; ++v) {
            double acc = 0.0;
            for (NodeId u : g.out_neighbors(v)) acc += x[u];
            out[v] = acc;
        }
    };
    return principal_vector(n, adj, "eigenvector centrality");
}

std::vector<double> clustering_coefficient(const Graph& graph) {
    const Graph g = graph.undirected_projection();
    const std::size_t n = g.node_count();
    std::vector<double> cc(n, 0.0);
    std::vector<char> mark(n, 0);
    for (NodeId v = 0; v < n; ++v) {
        const auto nb = g.out_neighbors(v);
        const std::size_t deg = nb.size();
        if (deg < 2) continue;
        for (NodeId u : nb) mark[u] = 1;
        std::size_t links = 0;
        for (NodeId u : nb) {
            for (NodeId w : g.out_neighbors(u)) {
                if (w > u && mark[w]) ++links;
            }
        }
        for (NodeId u : nb) mark[u] = 0;
        cc[v] = static_cast<double>(links) / (static_cast<double>(deg) * static_cast<double>(deg - 1) / 2.0);
    }
    return cc;
}

StructuralFeatures structural_features(const Graph& graph) {
    if (graph.node_count() == 0) throw GraphError("structural_features: empty graph");
    const auto core = coreness(graph);
    const auto pr = pagerank(graph);
    const auto h = hits(graph);
    const auto eig = eigenvector_centrality(graph);
    const auto cc = clustering_coefficient(graph);
    StructuralFeatures f;
    f.rows.resize(graph.node_count());
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
        f.rows[v] = {core[v], pr[v], h.hub[v], h.authority[v], eig[v], cc[v]};
    }
    return f;
}

void write_features_csv(std::ostream& out, const StructuralFeatures& features, std::span<const std::string> names) {
    if (names.size() != features.node_count()) throw GraphError("write_features_csv: name map size differs");
    out << "node";
    for (auto name : kStructuralNames) out << ',' << name;
    out << '\n';
    for (std::size_t v = 0; v < features.node_count(); ++v) {
        out << names[v];
        for (double x : features.rows[v]) out << ',' << util::format_double(x);
        out << '\n';
    }
}

StructuralFeatures read_features_csv(std::istream& in, std::span<const std::string> names) {
    std::string line;
    if (!std::getline(in, line)) throw GraphError("features csv: missing header");
    std::string expected = "node";
    for (auto name : kStructuralNames) (expected += ',') += name;
    if (util::trim(line) != expected) throw GraphError("features csv: unexpected header '" + line + "'");
    StructuralFeatures f;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        const auto fields = util::split(util::trim(line), ',');
        if (fields.size() != kStructuralColumns + 1) {
            throw GraphError("features csv line " + std::to_string(line_no) + ": expected 7 fields");
        }
        const std::size_t v = f.rows.size();
        if (v >= names.size() || fields[0] != names[v]) {
            throw GraphError("features csv line " + std::to_string(line_no) + ": node order differs from node list");
        }
        FeatureRow row{};
        for (std::size_t c = 0; c < kStructuralColumns; ++c) row[c] = util::parse_double(fields[c + 1]);
        f.rows.push_back(row);
    }
    if (f.rows.size() != names.size()) throw GraphError("features csv: row count differs from node count");
    return f;
}

} // namespace pgate::graph
