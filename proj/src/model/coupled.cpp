#include "pgate/model/coupled.hpp"

#include <cmath>

namespace pgate::model {

using diff::Shape;
using diff::Tensor;
using diff::Var;

GraphContext GraphContext::build(const ModelConfig& config, const graph::Graph& graph,
                                 const graph::StructuralFeatures& features) {
    config.validate();
    const std::size_t n = graph.node_count();
    if (features.node_count() != n) throw std::invalid_argument("GraphContext: feature rows differ from node count");

    auto index = std::make_shared<diff::EdgeIndex>();
    index->node_count = n;
    index->dst_offsets.assign(n + 1, 0);
    for (graph::NodeId v = 0; v < n; ++v) {
        for (graph::NodeId u : graph.in_neighbors(v)) {
            index->src.push_back(u);
            index->dst.push_back(v);
        }
        index->dst_offsets[v + 1] = index->src.size();
    }

    GraphContext ctx;
    ctx.config = config;
    ctx.node_count = n;
    ctx.gcn_norm = Tensor(Shape{index->edge_count()});
    for (std::size_t e = 0; e < index->edge_count(); ++e) {
        const auto du = static_cast<double>(graph.out_neighbors(index->src[e]).size());
        const auto dv = static_cast<double>(graph.in_neighbors(index->dst[e]).size());
        ctx.gcn_norm[e] = 1.0 / std::sqrt((du + 1.0) * (dv + 1.0));
    }
    ctx.structural = Tensor(Shape{n, graph::kStructuralColumns});
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t c = 0; c < graph::kStructuralColumns; ++c) ctx.structural(v, c) = features.rows[v][c];
    }
    ctx.edges = std::move(index);
    return ctx;
}

BoundParams::BoundParams(diff::Tape& tape, const ParameterStore& store, bool trainable) : store_(&store) {
    vars_.reserve(store.size());
    for (const auto& t : store.tensors()) vars_.push_back(trainable ? tape.parameter(t) : tape.constant(t));
}

BoundParams::BoundParams(const ParameterStore& store, std::vector<Var> vars) : store_(&store), vars_(std::move(vars)) {
    if (vars_.size() != store.size()) throw std::invalid_argument("BoundParams: variable count differs from store size");
}

Var BoundParams::operator[](std::string_view name) const { return vars_[store_->index_of(name)]; }

namespace {

Var activate(Var x, Activation act) { return act == Activation::Relu ? diff::relu(x) : diff::tanh(x); }

// Split a rank-1 vector of length 2d into two 1 x d row matrices.
std::pair<Var, Var> halves(Var vec) {
    const std::size_t d = vec.value().size() / 2;
    return {diff::reshape(diff::slice(vec, 0, d), Shape{1, d}), diff::reshape(diff::slice(vec, d, d), Shape{1, d})};
}

Var pair_scores(Var projected, Var vec, const diff::EdgeIndexPtr& edges) {
    if (vec.value().size() != 2 * projected.value().cols()) {
        throw diff::ShapeError("pair score vector length " + std::to_string(vec.value().size()) +
                               " does not match projected width " + std::to_string(projected.value().cols()));
    }
    auto [head, tail] = halves(vec);
    return diff::edge_sum(diff::linear(projected, head), diff::linear(projected, tail), edges);
}

} // namespace

Var edge_gate(Var x, Var weight, Var beta, GateSquash squash, const diff::EdgeIndexPtr& edges) {
    Var raw = pair_scores(diff::linear(x, weight), beta, edges);
    switch (squash) {
    case GateSquash::Raw: return raw;
    case GateSquash::Sigmoid: return diff::sigmoid(raw);
    case GateSquash::Softmax: return diff::segment_softmax(raw, edges);
    }
    return raw;
}

Var attention(Var x, Var weight, Var att, const diff::EdgeIndexPtr& edges) {
    Var scores = diff::leaky_relu(pair_scores(diff::linear(x, weight), att, edges), 0.2);
    return diff::segment_softmax(scores, edges);
}

LayerOutput coupled_layer(Var c, Var p, const BoundParams& params, std::size_t k, const GraphContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& edges = ctx.edges;
    diff::Tape& tape = *c.tape;
    if (c.value().rows() != ctx.node_count || c.value().cols() != cfg.dim_c_at(k) ||
        p.value().rows() != ctx.node_count || p.value().cols() != cfg.dim_p_at(k)) {
        throw diff::ShapeError("coupled_layer " + std::to_string(k) + ": inputs shaped " + diff::shape_string(c.shape()) +
                               " / " + diff::shape_string(p.shape()));
    }

    const Var w_c = params[layer_param("W_C", k)];
    const Var w_p = params[layer_param("W_P", k)];

    Var cascade_weight;
    Var personality_weight;
    switch (cfg.base) {
    case BaseModel::Gcn:
        if (!cfg.gated) {
            cascade_weight = personality_weight = tape.constant(ctx.gcn_norm);
        }
        break;
    case BaseModel::Gat:
        cascade_weight = attention(c, w_c, params[layer_param("att_C", k)], edges);
        personality_weight = attention(p, w_p, params[layer_param("att_P", k)], edges);
        break;
    case BaseModel::StateGnn:
        cascade_weight = personality_weight = tape.constant(ctx.gcn_norm);
        break;
    }

    if (cfg.gated) {
        Var pgate = edge_gate(p, params[layer_param("W_PG", k)], params[layer_param("beta_PG", k)], cfg.squash, edges);
        Var cgate = edge_gate(c, params[layer_param("W_CG", k)], params[layer_param("beta_CG", k)], cfg.squash, edges);
        if (cfg.base == BaseModel::Gcn) {
            cascade_weight = pgate;
            personality_weight = cgate;
        } else {
            cascade_weight = diff::mul(pgate, cascade_weight);
            personality_weight = diff::mul(cgate, personality_weight);
        }
    }

    LayerOutput out;
    out.c = activate(diff::linear(diff::add(c, diff::aggregate(c, cascade_weight, edges)), w_c), cfg.activation);
    out.p = activate(diff::linear(diff::add(p, diff::aggregate(p, personality_weight, edges)), w_p), cfg.activation);
    out.cascade_weight = cascade_weight;
    return out;
}

Var state_layer(Var states, Var c, Var edge_weight, Var influence_weight, const diff::EdgeIndexPtr& edges) {
    const auto& s = states.value();
    for (double v : s.data()) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::logic_error("state_layer: activation state outside [0, 1]");
    }
    diff::Tape& tape = *states.tape;
    Var influence = diff::linear(c, influence_weight);                     // N x 1
    Var pressure = diff::aggregate(diff::mul(states, influence), edge_weight, edges); // N x 1
    Tensor mask(pressure.value().shape());
    for (std::size_t v = 0; v < mask.size(); ++v) mask[v] = pressure.value()[v] != 0.0 ? 1.0 : 0.0;
    Var gain = diff::mul(diff::sigmoid(pressure), tape.constant(std::move(mask)));
    Var inactive = diff::add_scalar(diff::scale(states, -1.0), 1.0);
    return diff::add(states, diff::mul(inactive, gain));
}

ForwardVars forward(const BoundParams& params, const GraphContext& ctx, std::span<const graph::NodeId> observed) {
    const auto& cfg = ctx.config;
    if (params.vars().empty()) throw std::invalid_argument("forward: empty parameter store");
    diff::Tape& tape = *params.vars().front().tape;
    const std::size_t n = ctx.node_count;

    Tensor membership(Shape{n, 1}, 0.0);
    for (auto u : observed) {
        if (u >= n) throw std::out_of_range("forward: observed adopter outside the graph");
        membership[u] = 1.0;
    }

    std::vector<Var> parts{params["embed_c"], tape.constant(ctx.structural)};
    if (cfg.has_membership_slot()) parts.push_back(tape.constant(membership));
    Var c = diff::concat(parts, 1);
    Var p = params["embed_p"];
    if (c.value().rows() != n || p.value().rows() != n) {
        throw diff::ShapeError("forward: embedding tables must have one row per node");
    }

    ForwardVars out;
    Var s;
    if (cfg.base == BaseModel::StateGnn) {
        s = tape.constant(membership);
        out.states.push_back(s);
    }
    for (std::size_t k = 0; k < cfg.layers; ++k) {
        auto layer = coupled_layer(c, p, params, k, ctx);
        if (cfg.base == BaseModel::StateGnn) {
            s = state_layer(s, c, layer.cascade_weight, params[layer_param("w_S", k)], ctx.edges);
            out.states.push_back(s);
        }
        c = layer.c;
        p = layer.p;
    }
    out.c = c;
    out.p = p;
    out.size = cfg.base == BaseModel::StateGnn ? diff::sum(s) : diff::sum(diff::sigmoid(diff::linear(c, params["W_CP"])));
    out.q_hat = diff::relu(diff::linear(p, params["W_PP"]));
    return out;
}

ForwardResult forward_cascade(const ParameterStore& params, const GraphContext& ctx, const data::Cascade& cascade) {
    if (cascade.observed_len == 0) throw std::invalid_argument("forward_cascade: observed prefix of " + cascade.id + " is unset");
    diff::Tape tape;
    BoundParams bound(tape, params, false);
    auto vars = forward(bound, ctx, cascade.observed());
    ForwardResult r;
    r.c = vars.c.value();
    r.p = vars.p.value();
    r.size = vars.size.item();
    r.q_hat = vars.q_hat.value();
    for (const auto& s : vars.states) r.states.push_back(s.value());
    return r;
}

Tensor predict_personality(const ParameterStore& params, const GraphContext& ctx) {
    diff::Tape tape;
    BoundParams bound(tape, params, false);
    return forward(bound, ctx, {}).q_hat.value();
}

} // namespace pgate::model
