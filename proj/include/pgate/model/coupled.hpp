#pragma once

#include "pgate/data/dataset.hpp"
#include "pgate/diff/ops.hpp"
#include "pgate/model/config.hpp"
#include "pgate/model/params.hpp"

#include <span>
#include <vector>

namespace pgate::model {

/// Per-graph constants shared by every forward pass: the in-edge index used for
/// aggregation over N(v), GCN edge normalization, and the fixed structural columns.
struct GraphContext {
    ModelConfig config;
    std::size_t node_count = 0;
    diff::EdgeIndexPtr edges;
    diff::Tensor gcn_norm;   // E
    diff::Tensor structural; // N x 6

    static GraphContext build(const ModelConfig& config, const graph::Graph& graph,
                              const graph::StructuralFeatures& features);
};

/// Parameter store bound to a tape, either as trainable leaves or constants.
class BoundParams {
public:
    BoundParams(diff::Tape& tape, const ParameterStore& store, bool trainable);
    // Variables already on a tape, one per store entry in store order.
    BoundParams(const ParameterStore& store, std::vector<diff::Var> vars);
    diff::Var operator[](std::string_view name) const;
    const std::vector<diff::Var>& vars() const { return vars_; }

private:
    const ParameterStore* store_;
    std::vector<diff::Var> vars_;
};

/// Edge gate for every edge u->v: r = beta . (W x_u || W x_v), then squashed.
/// Softmax mode normalizes r over each destination's incoming edges.
diff::Var edge_gate(diff::Var x, diff::Var weight, diff::Var beta, GateSquash squash, const diff::EdgeIndexPtr& edges);

/// GAT attention: softmax over u in N(v) of LeakyReLU(a . (W x_u || W x_v)).
diff::Var attention(diff::Var x, diff::Var weight, diff::Var att, const diff::EdgeIndexPtr& edges);

struct LayerOutput {
    diff::Var c;
    diff::Var p;
    diff::Var cascade_weight; // edge weights used for cascade messages (E)
};

/// One coupled layer:
///   c_v' = act(W_C c_v + W_C sum_u g_C(u,v) c_u),   p_v' = act(W_P p_v + W_P sum_u g_P(u,v) p_u)
/// with g_C = PGATE(p_u, p_v) and g_P = CGATE(c_u, c_v) when gated (times the base
/// attention/normalization for gat/stategnn), or the base edge weight when ungated.
LayerOutput coupled_layer(diff::Var c, diff::Var p, const BoundParams& params, std::size_t k, const GraphContext& ctx);

/// Activation-state update for stategnn:
///   s_v' = s_v + (1 - s_v) sigma(S_v) [S_v != 0],  S_v = sum_u g_uv s_u (w . c_u)
/// The indicator keeps nodes with no active in-neighbors (S_v == 0) inactive.
diff::Var state_layer(diff::Var states, diff::Var c, diff::Var edge_weight, diff::Var influence_weight,
                      const diff::EdgeIndexPtr& edges);

struct ForwardVars {
    diff::Var c;
    diff::Var p;
    diff::Var size;      // scalar n_hat
    diff::Var q_hat;     // N x 5
    std::vector<diff::Var> states; // s^0..s^K (stategnn only)
};

/// Full K-layer pass for one observed prefix. An empty prefix gives the cascade-free
/// context used for personality prediction.
ForwardVars forward(const BoundParams& params, const GraphContext& ctx, std::span<const graph::NodeId> observed);

struct ForwardResult {
    diff::Tensor c;
    diff::Tensor p;
    double size = 0.0;
    diff::Tensor q_hat;
    std::vector<diff::Tensor> states;
};

ForwardResult forward_cascade(const ParameterStore& params, const GraphContext& ctx, const data::Cascade& cascade);
// Personality predictions from the cascade-free context (N x 5).
diff::Tensor predict_personality(const ParameterStore& params, const GraphContext& ctx);

} // namespace pgate::model
