#include "pgate/data/synth.hpp"

#include "pgate/graph/structural.hpp"

#include <algorithm>
#include <numeric>

namespace pgate::data {
namespace {

constexpr std::uint64_t kGraphStream = 0xA11CE00000000001ULL;
constexpr std::uint64_t kTraitStream = 0xA11CE00000000002ULL;
constexpr std::uint64_t kSplitStream = 0xA11CE00000000003ULL;

std::vector<double> min_max(std::span<const Personality> people, std::size_t trait) {
    std::vector<double> x;
    x.reserve(people.size());
    for (const auto& p : people) x.push_back(p.traits[trait]);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double a = *lo, range = *hi - *lo;
    for (auto& v : x) v = range > 0.0 ? (v - a) / range : 0.0;
    return x;
}

} // namespace

void SynthConfig::validate() const {
    if (nodes < 2) throw DataError("synth: node count must be at least 2");
    if (cascades < 3) throw DataError("synth: need at least 3 cascades");
    if (model == GraphModel::BarabasiAlbert && (ba_m < 1 || ba_m >= nodes)) {
        throw DataError("synth: Barabasi-Albert m must satisfy 1 <= m < nodes");
    }
    if (model == GraphModel::ErdosRenyi && !(er_p >= 0.0 && er_p <= 1.0)) throw DataError("synth: er_p must lie in [0, 1]");
    if (w_extroversion < 0.0 || w_neuroticism < 0.0) throw DataError("synth: trait weights must be non-negative");
    if (!(trait_lo > 0.0 && trait_hi >= trait_lo)) throw DataError("synth: trait range must be positive and ordered");
    if (seeds_per_cascade < 1 || seeds_per_cascade > nodes) throw DataError("synth: seeds per cascade out of range");
}

graph::Graph barabasi_albert(std::size_t nodes, std::size_t m, util::Rng& rng) {
    std::vector<graph::Edge> edges;
    // Degree-weighted sampling via the endpoint list; starts from a clique on m + 1 nodes.
    std::vector<NodeId> endpoints;
    const std::size_t core = std::min(nodes, m + 1);
    for (NodeId u = 0; u < core; ++u) {
        for (NodeId v = u + 1; v < core; ++v) {
            edges.emplace_back(u, v);
            endpoints.push_back(u);
            endpoints.push_back(v);
        }
    }
    std::vector<NodeId> targets;
    for (auto v = static_cast<NodeId>(core); v < nodes; ++v) {
        targets.clear();
        while (targets.size() < m) {
            const NodeId t = endpoints[rng.index(endpoints.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
        std::sort(targets.begin(), targets.end());
        for (NodeId t : targets) {
            edges.emplace_back(t, v);
            endpoints.push_back(t);
            endpoints.push_back(v);
        }
    }
    return graph::Graph::from_edges(nodes, edges, false);
}

graph::Graph erdos_renyi(std::size_t nodes, double p, util::Rng& rng) {
    std::vector<graph::Edge> edges;
    for (NodeId u = 0; u < nodes; ++u) {
        for (NodeId v = u + 1; v < nodes; ++v) {
            if (rng.uniform() < p) edges.emplace_back(u, v);
        }
    }
    return graph::Graph::from_edges(nodes, edges, false);
}

std::vector<double> activation_probabilities(std::span<const Personality> people, double base, double w_extroversion,
                                             double w_neuroticism) {
    const auto e = min_max(people, kExtroversion);
    const auto n = min_max(people, kNeuroticism);
    std::vector<double> q(people.size());
    for (std::size_t v = 0; v < q.size(); ++v) {
        q[v] = std::clamp(base + w_extroversion * e[v] - w_neuroticism * n[v], 0.0, 1.0);
    }
    return q;
}

std::vector<NodeId> simulate_cascade(const graph::Graph& graph, std::span<const double> q,
                                     std::span<const NodeId> seeds, util::Rng& rng) {
    const std::size_t n = graph.node_count();
    if (q.size() != n) throw DataError("simulate_cascade: probability vector length differs from node count");

    // Live-edge draws, one per arc in out-CSR order.
    std::vector<std::size_t> offsets(n + 1, 0);
    for (NodeId u = 0; u < n; ++u) offsets[u + 1] = offsets[u] + graph.out_neighbors(u).size();
    std::vector<double> draws(offsets[n]);
    for (auto& d : draws) d = rng.uniform();

    std::vector<bool> active(n, false);
    std::vector<NodeId> frontier(seeds.begin(), seeds.end());
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    std::vector<NodeId> order;
    for (NodeId s : frontier) {
        if (s >= n) throw DataError("simulate_cascade: seed outside the graph");
        active[s] = true;
    }
    while (!frontier.empty()) {
        order.insert(order.end(), frontier.begin(), frontier.end());
        std::vector<NodeId> next;
        for (NodeId u : frontier) {
            const auto nb = graph.out_neighbors(u);
            for (std::size_t i = 0; i < nb.size(); ++i) {
                const NodeId v = nb[i];
                if (!active[v] && draws[offsets[u] + i] < q[v]) {
                    active[v] = true;
                    next.push_back(v);
                }
            }
        }
        std::sort(next.begin(), next.end());
        frontier = std::move(next);
    }
    return order;
}

std::vector<NodeId> sample_seeds(std::size_t node_count, std::size_t count, util::Rng& rng) {
    std::vector<NodeId> pool(node_count);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.index(node_count - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

Dataset synth_generate(const SynthConfig& config) {
    config.validate();
    Dataset d;
    d.prefix_fraction = config.prefix_fraction;

    util::Rng graph_rng(util::derive_seed(config.seed, kGraphStream));
    d.graph = config.model == GraphModel::BarabasiAlbert ? barabasi_albert(config.nodes, config.ba_m, graph_rng)
                                                         : erdos_renyi(config.nodes, config.er_p, graph_rng);
    d.names.reserve(config.nodes);
    for (std::size_t v = 0; v < config.nodes; ++v) d.names.push_back(std::to_string(v));

    util::Rng trait_rng(util::derive_seed(config.seed, kTraitStream));
    d.personalities.resize(config.nodes);
    for (auto& p : d.personalities) {
        for (auto& t : p.traits) t = trait_rng.uniform(config.trait_lo, config.trait_hi);
    }
    const auto q = activation_probabilities(d.personalities, config.base_prob, config.w_extroversion, config.w_neuroticism);

    std::size_t degenerate = 0;
    d.cascades.reserve(config.cascades);
    for (std::size_t i = 0; i < config.cascades; ++i) {
        util::Rng rng(util::derive_seed(config.seed, i));
        const auto seeds = sample_seeds(config.nodes, config.seeds_per_cascade, rng);
        Cascade c;
        c.id = "c" + std::to_string(i);
        c.adopters = simulate_cascade(d.graph, q, seeds, rng);
        c = observe_prefix(std::move(c), config.prefix_fraction);
        if (c.degenerate) ++degenerate;
        d.cascades.push_back(std::move(c));
    }
    if (degenerate == d.cascades.size()) {
        throw DataError("synth: every generated cascade has size 1; raise the propagation probability or seed count");
    }

    d.features = graph::structural_features(d.graph);
    d.splits = split_cascades(d.cascades.size(), config.val_ratio, config.test_ratio,
                              util::derive_seed(config.seed, kSplitStream));
    d.validate();
    return d;
}

} // namespace pgate::data
