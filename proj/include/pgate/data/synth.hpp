#pragma once

#include "pgate/data/dataset.hpp"
#include "pgate/util/random.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pgate::data {

enum class GraphModel { BarabasiAlbert, ErdosRenyi };

/// Personality-driven independent-cascade generator settings. A node v is activated
/// by an active neighbor with probability
///   clamp(base + w_E * E~_v - w_N * N~_v, 0, 1)
/// where E~ and N~ are the extroversion / neuroticism traits min-max scaled to [0, 1].
struct SynthConfig {
    GraphModel model = GraphModel::BarabasiAlbert;
    std::size_t ba_m = 2;
    double er_p = 0.05;
    std::size_t nodes = 300;
    std::size_t cascades = 200;
    double base_prob = 0.1;
    double w_extroversion = 0.4;
    double w_neuroticism = 0.4;
    double trait_lo = 20.0;
    double trait_hi = 80.0;
    std::size_t seeds_per_cascade = 3;
    double prefix_fraction = 0.5;
    double val_ratio = 0.15;
    double test_ratio = 0.15;
    std::uint64_t seed = 1;

    void validate() const;
};

graph::Graph barabasi_albert(std::size_t nodes, std::size_t m, util::Rng& rng);
graph::Graph erdos_renyi(std::size_t nodes, double p, util::Rng& rng);

std::vector<double> activation_probabilities(std::span<const Personality> people, double base, double w_extroversion,
                                             double w_neuroticism);

/// One independent-cascade run in live-edge form: a uniform is drawn for every arc in
/// out-neighbor order, and arc u->v is live when its uniform is below q[v]. Adopters are
/// returned by BFS round from the seeds, ties broken by node id. Fixing the rng stream
/// therefore couples runs with different q (larger q never shrinks the cascade).
std::vector<NodeId> simulate_cascade(const graph::Graph& graph, std::span<const double> q,
                                     std::span<const NodeId> seeds, util::Rng& rng);

/// Draws `count` distinct nodes.
std::vector<NodeId> sample_seeds(std::size_t node_count, std::size_t count, util::Rng& rng);

Dataset synth_generate(const SynthConfig& config);

} // namespace pgate::data
