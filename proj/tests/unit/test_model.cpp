#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "pgate/data/synth.hpp"
#include "pgate/diff/gradcheck.hpp"
#include "pgate/model/coupled.hpp"

#include <cmath>

using namespace pgate;
using diff::Shape;
using diff::Tensor;
using model::BaseModel;
using model::GateSquash;
using model::ModelConfig;

namespace {

ModelConfig small(BaseModel base, bool gated, GateSquash squash = GateSquash::Sigmoid) {
    ModelConfig c;
    c.base = base;
    c.gated = gated;
    c.layers = 2;
    c.dim_c = 4;
    c.dim_p = 4;
    c.embed_dim = 3;
    c.squash = squash;
    c.activation = model::Activation::Tanh;
    return c;
}

std::vector<ModelConfig> all_variants() {
    std::vector<ModelConfig> out;
    for (auto base : {BaseModel::Gcn, BaseModel::Gat, BaseModel::StateGnn}) {
        out.push_back(small(base, false));
        for (auto sq : {GateSquash::Raw, GateSquash::Sigmoid, GateSquash::Softmax}) out.push_back(small(base, true, sq));
    }
    return out;
}

std::string label(const ModelConfig& c) {
    return std::string(model::to_string(c.base)) + (c.gated ? "-gated-" + std::string(model::to_string(c.squash)) : "");
}

data::Dataset tiny_dataset(std::size_t nodes = 12, std::uint64_t seed = 3) {
    data::SynthConfig cfg;
    cfg.nodes = nodes;
    cfg.cascades = 12;
    cfg.base_prob = 0.3;
    cfg.seed = seed;
    return data::synth_generate(cfg);
}

// Randomize every parameter, including the zero-initialized gate vectors.
void jitter(model::ParameterStore& params, util::Rng& rng, double scale = 0.5) {
    for (auto& t : params.tensors())
        for (auto& v : t.data()) v = rng.uniform(-scale, scale);
}

diff::EdgeIndexPtr one_edge() {
    return testing::edge_index(graph::Graph::from_edges(2, std::vector<graph::Edge>{{0, 1}}, true));
}

} // namespace

TEST_CASE("edge gate on a single edge") {
    diff::Tape tape;
    auto edges = one_edge();
    auto x = tape.constant(Tensor::matrix(2, 1, {0.5, 1.0}));
    auto w = tape.constant(Tensor::matrix(1, 1, {2.0}));
    auto beta = tape.constant(Tensor::vector({1.0, -1.0}));
    CHECK(model::edge_gate(x, w, beta, GateSquash::Raw, edges).value()[0] == doctest::Approx(-1.0));
    CHECK(model::edge_gate(x, w, beta, GateSquash::Sigmoid, edges).value()[0] == doctest::Approx(0.2689414213699951));
    CHECK(model::edge_gate(x, w, beta, GateSquash::Softmax, edges).value()[0] == doctest::Approx(1.0));

    auto zero = tape.constant(Tensor::vector({0.0, 0.0}));
    CHECK(model::edge_gate(x, w, zero, GateSquash::Raw, edges).value()[0] == 0.0);
    CHECK(model::edge_gate(x, w, zero, GateSquash::Sigmoid, edges).value()[0] == 0.5);

    auto same = tape.constant(Tensor::matrix(2, 1, {0.7, 0.7}));
    auto anti = tape.constant(Tensor::vector({0.3, -0.3}));
    CHECK(model::edge_gate(same, w, anti, GateSquash::Raw, edges).value()[0] == doctest::Approx(0.0));

    auto bad = tape.constant(Tensor::vector({1.0, 2.0, 3.0}));
    CHECK_THROWS_AS(model::edge_gate(x, w, bad, GateSquash::Raw, edges), diff::ShapeError);
}

TEST_CASE("initialization") {
    const auto d = tiny_dataset();
    ModelConfig def;
    CHECK(def.input_dim_c() == 39);
    const auto a = model::init_params(def, d.graph, d.features, 5);
    const auto b = model::init_params(def, d.graph, d.features, 5);
    const auto c = model::init_params(def, d.graph, d.features, 6);
    CHECK(a.identical(b));
    CHECK_FALSE(a.identical(c));
    CHECK(a.get("W_C.0").shape() == Shape{38, 39});
    CHECK(a.get("W_C.1").shape() == Shape{38, 38});
    CHECK(a.get("embed_c").shape() == Shape{12, 32});
    CHECK(a.get("W_PP").shape() == Shape{5, 38});
    for (std::size_t k = 0; k < def.layers; ++k) {
        for (const char* stem : {"beta_CG", "beta_PG"}) {
            const auto& beta = a.get(model::layer_param(stem, k));
            for (double v : beta.data()) CHECK(v == 0.0);
        }
    }
    ModelConfig state = def;
    state.base = BaseModel::StateGnn;
    CHECK(state.input_dim_c() == 38);
    const auto s = model::init_params(state, d.graph, d.features, 5);
    CHECK(s.contains("w_S.2"));
    CHECK_FALSE(s.contains("W_CP"));
}

TEST_CASE("isolated node keeps only its own message") {
    // node 2 has no neighbors
    auto g = graph::Graph::from_edges(3, std::vector<graph::Edge>{{0, 1}}, false);
    const auto f = graph::structural_features(g);
    util::Rng rng(11);
    for (const auto& cfg : all_variants()) {
        INFO(label(cfg));
        auto ctx = model::GraphContext::build(cfg, g, f);
        auto params = model::init_params(cfg, g, f, 1);
        jitter(params, rng);
        diff::Tape tape;
        model::BoundParams bound(tape, params, false);
        auto c = tape.constant(testing::random_tensor(Shape{3, cfg.dim_c}, rng));
        auto p = tape.constant(testing::random_tensor(Shape{3, cfg.dim_p}, rng));
        auto out = model::coupled_layer(c, p, bound, 1, ctx);
        auto self_c = diff::tanh(diff::linear(c, bound["W_C.1"]));
        auto self_p = diff::tanh(diff::linear(p, bound["W_P.1"]));
        for (std::size_t j = 0; j < cfg.dim_c; ++j) CHECK(out.c.value()(2, j) == self_c.value()(2, j));
        for (std::size_t j = 0; j < cfg.dim_p; ++j) CHECK(out.p.value()(2, j) == self_p.value()(2, j));
    }
}

TEST_CASE("zero raw gate reduces to the self term") {
    util::Rng rng(12);
    auto g = testing::random_graph(8, 0.4, false, rng);
    const auto f = graph::structural_features(g);
    const auto cfg = small(BaseModel::Gcn, true, GateSquash::Raw);
    auto ctx = model::GraphContext::build(cfg, g, f);
    auto params = model::init_params(cfg, g, f, 2);
    diff::Tape tape;
    model::BoundParams bound(tape, params, false);
    auto c = tape.constant(testing::random_tensor(Shape{8, 4}, rng));
    auto p = tape.constant(testing::random_tensor(Shape{8, 4}, rng));
    auto out = model::coupled_layer(c, p, bound, 1, ctx);
    CHECK(out.c.value().identical(diff::tanh(diff::linear(c, bound["W_C.1"])).value()));
    CHECK(out.p.value().identical(diff::tanh(diff::linear(p, bound["W_P.1"])).value()));
}

TEST_CASE("two-node aggregation") {
    auto g = graph::Graph::from_edges(2, std::vector<graph::Edge>{{0, 1}}, true);
    const auto f = graph::structural_features(g);
    auto cfg = small(BaseModel::Gcn, true, GateSquash::Softmax);
    cfg.activation = model::Activation::Relu;
    auto ctx = model::GraphContext::build(cfg, g, f);
    auto params = model::init_params(cfg, g, f, 3);
    auto& w = params.get("W_C.1");
    w.fill(0.0);
    for (std::size_t i = 0; i < 4; ++i) w(i, i) = 1.0;

    diff::Tape tape;
    model::BoundParams bound(tape, params, false);
    auto c = tape.constant(Tensor::matrix(2, 4, {0.1, 0.2, 0.3, 0.4, 1.0, 2.0, 3.0, 4.0}));
    auto p = tape.constant(Tensor(Shape{2, 4}, 0.5));
    auto out = model::coupled_layer(c, p, bound, 1, ctx).c.value();
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(out(0, j) == doctest::Approx(c.value()(0, j)));
        CHECK(out(1, j) == doctest::Approx(c.value()(0, j) + c.value()(1, j)));
    }

    auto plain = model::GraphContext::build(small(BaseModel::Gcn, false), g, f);
    CHECK(plain.gcn_norm[0] == doctest::Approx(0.5));
}

TEST_CASE("closed-form heads") {
    const auto d = tiny_dataset(4, 9);
    const auto& cascade = d.cascades.front();

    SUBCASE("zero parameters predict half the nodes") {
        for (auto gated : {false, true}) {
            auto cfg = small(BaseModel::Gcn, gated);
            auto ctx = model::GraphContext::build(cfg, d.graph, d.features);
            auto params = model::init_params(cfg, d.graph, d.features, 1);
            for (auto& t : params.tensors()) t.fill(0.0);
            CHECK(model::forward_cascade(params, ctx, cascade).size == doctest::Approx(2.0));
        }
    }
    SUBCASE("negative personality head clips to zero") {
        auto cfg = small(BaseModel::Gat, true);
        cfg.activation = model::Activation::Relu;
        auto ctx = model::GraphContext::build(cfg, d.graph, d.features);
        auto params = model::init_params(cfg, d.graph, d.features, 1);
        for (auto& v : params.get("W_PP").data()) v = -std::abs(v) - 0.01;
        const auto q = model::predict_personality(params, ctx);
        CHECK(q.shape() == Shape{4, 5});
        for (double v : q.data()) CHECK(v == 0.0);
    }
    SUBCASE("zero influence weights freeze the states") {
        auto cfg = small(BaseModel::StateGnn, true);
        auto ctx = model::GraphContext::build(cfg, d.graph, d.features);
        auto params = model::init_params(cfg, d.graph, d.features, 1);
        for (std::size_t k = 0; k < cfg.layers; ++k) params.get(model::layer_param("w_S", k)).fill(0.0);
        CHECK(model::forward_cascade(params, ctx, cascade).size == static_cast<double>(cascade.observed_len));
    }
}

TEST_CASE("state update on a single edge") {
    auto edges = one_edge();
    diff::Tape tape;
    auto w = tape.constant(Tensor::matrix(1, 1, {1.0}));
    auto weight = tape.constant(Tensor::vector({1.0}));
    auto c = tape.constant(Tensor::matrix(2, 1, {std::log(0.3 / 0.7), 5.0}));
    auto s = model::state_layer(tape.constant(Tensor::matrix(2, 1, {1.0, 0.0})), c, weight, w, edges).value();
    CHECK(s[0] == 1.0);
    CHECK(s[1] == doctest::Approx(0.3));

    auto idle = model::state_layer(tape.constant(Tensor(Shape{2, 1}, 0.0)), c, weight, w, edges).value();
    CHECK(idle[0] == 0.0);
    CHECK(idle[1] == 0.0);

    CHECK_THROWS_AS(model::state_layer(tape.constant(Tensor::matrix(2, 1, {1.5, 0.0})), c, weight, w, edges),
                    std::logic_error);
}

TEST_CASE("predictions stay in range and states only grow") {
    const auto d = tiny_dataset(25, 4);
    util::Rng rng(13);
    for (const auto& cfg : all_variants()) {
        INFO(label(cfg));
        auto ctx = model::GraphContext::build(cfg, d.graph, d.features);
        auto params = model::init_params(cfg, d.graph, d.features, 7);
        jitter(params, rng, 1.0);
        for (const auto& cascade : d.cascades) {
            const auto r = model::forward_cascade(params, ctx, cascade);
            const double n = static_cast<double>(d.node_count());
            CHECK(r.q_hat.shape() == Shape{25, 5});
            for (double v : r.q_hat.data()) CHECK(v >= 0.0);
            if (cfg.base != BaseModel::StateGnn) {
                CHECK(r.size > 0.0);
                CHECK(r.size < n);
                continue;
            }
            CHECK(r.states.size() == cfg.layers + 1);
            CHECK(r.size >= static_cast<double>(cascade.observed_len));
            CHECK(r.size <= n);
            for (auto u : cascade.observed())
                for (const auto& s : r.states) CHECK(s[u] == 1.0);
            for (std::size_t k = 1; k < r.states.size(); ++k)
                for (std::size_t v = 0; v < d.node_count(); ++v) {
                    CHECK(r.states[k][v] >= r.states[k - 1][v]);
                    CHECK(r.states[k][v] <= 1.0);
                }
        }
    }
}

TEST_CASE("relabeling nodes permutes the outputs") {
    const auto d = tiny_dataset(15, 5);
    util::Rng rng(14);
    const auto perm = oracle::random_permutation(d.node_count(), rng);
    const auto g = oracle::permute(d.graph, perm);
    graph::StructuralFeatures f = d.features;
    for (std::size_t u = 0; u < d.node_count(); ++u) f.rows[perm[u]] = d.features.rows[u];

    for (const auto& cfg : all_variants()) {
        INFO(label(cfg));
        auto params = model::init_params(cfg, d.graph, d.features, 8);
        jitter(params, rng);
        auto moved = params;
        for (const char* table : {"embed_c", "embed_p"}) {
            const auto& src = params.get(table);
            auto& dst = moved.get(table);
            for (std::size_t u = 0; u < src.rows(); ++u)
                for (std::size_t j = 0; j < src.cols(); ++j) dst(perm[u], j) = src(u, j);
        }
        auto ctx = model::GraphContext::build(cfg, d.graph, d.features);
        auto ctx2 = model::GraphContext::build(cfg, g, f);
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& cascade = d.cascades[i];
            data::Cascade relabeled = cascade;
            for (auto& u : relabeled.adopters) u = perm[u];
            const auto a = model::forward_cascade(params, ctx, cascade);
            const auto b = model::forward_cascade(moved, ctx2, relabeled);
            CHECK(b.size == doctest::Approx(a.size).epsilon(1e-12));
            for (std::size_t u = 0; u < d.node_count(); ++u)
                for (std::size_t t = 0; t < 5; ++t) CHECK(std::abs(b.q_hat(perm[u], t) - a.q_hat(u, t)) < 1e-12);
        }
    }
}

TEST_CASE("checkpoint round trip is bitwise") {
    const auto d = tiny_dataset();
    util::Rng rng(15);
    for (const auto& cfg : all_variants()) {
        model::Checkpoint ck{cfg, model::init_params(cfg, d.graph, d.features, 4), 4, d.node_count()};
        jitter(ck.params, rng);
        const auto dir = testing::scratch_dir("ckpt_" + label(cfg));
        model::save_checkpoint(ck, dir);
        const auto back = model::load_checkpoint(dir);
        CHECK(back.config == cfg);
        CHECK(back.seed == 4);
        CHECK(back.node_count == d.node_count());
        CHECK(back.params.identical(ck.params));
    }
    const auto dir = testing::scratch_dir("ckpt_missing");
    CHECK_THROWS(model::load_checkpoint(dir));
}

TEST_CASE("layer gradients match finite differences") {
    util::Rng rng(16);
    auto g = testing::random_graph(10, 0.3, false, rng);
    const auto f = graph::structural_features(g);
    for (const auto& cfg : all_variants()) {
        INFO(label(cfg));
        auto ctx = model::GraphContext::build(cfg, g, f);
        auto params = model::init_params(cfg, g, f, 9);
        jitter(params, rng);
        std::vector<Tensor> inputs = params.tensors();
        inputs.push_back(testing::random_tensor(Shape{10, cfg.dim_c}, rng));
        inputs.push_back(testing::random_tensor(Shape{10, cfg.dim_p}, rng));
        const auto probe_c = testing::random_tensor(Shape{10, cfg.dim_c}, rng);
        const auto probe_p = testing::random_tensor(Shape{10, cfg.dim_p}, rng);
        auto builder = [&](diff::Tape& tape, std::span<const diff::Var> vars) {
            const std::size_t m = params.size();
            model::BoundParams bound(params, std::vector<diff::Var>(vars.begin(), vars.begin() + m));
            auto out = model::coupled_layer(vars[m], vars[m + 1], bound, 1, ctx);
            return diff::add(diff::sum(diff::mul(out.c, tape.constant(probe_c))),
                             diff::sum(diff::mul(out.p, tape.constant(probe_p))));
        };
        const auto r = diff::finite_diff_check(builder, inputs, 1e-5);
        INFO("worst input " << r.worst_param << "[" << r.worst_index << "] analytic " << r.analytic << " numeric "
                            << r.numeric);
        CHECK(r.max_relative_error < 1e-4);
    }
}

TEST_CASE("head gradients match finite differences") {
    util::Rng rng(18);
    std::vector<Tensor> inputs{testing::random_tensor(Shape{10, 4}, rng), testing::random_tensor(Shape{1, 4}, rng),
                               testing::random_tensor(Shape{10, 4}, rng, 0.1, 1.0),
                               testing::random_tensor(Shape{5, 4}, rng, 0.1, 1.0)};
    auto size_head = [](diff::Tape&, std::span<const diff::Var> v) {
        return diff::sum(diff::sigmoid(diff::linear(v[0], v[1])));
    };
    auto trait_head = [](diff::Tape&, std::span<const diff::Var> v) {
        return diff::sum(diff::square(diff::relu(diff::linear(v[2], v[3]))));
    };
    CHECK(diff::finite_diff_check(size_head, inputs, 1e-5).max_relative_error < 1e-4);
    CHECK(diff::finite_diff_check(trait_head, inputs, 1e-5).max_relative_error < 1e-4);
}

TEST_CASE("state layer gradients match finite differences") {
    util::Rng rng(17);
    auto g = testing::random_graph(7, 0.5, true, rng);
    auto edges = testing::edge_index(g);
    std::vector<Tensor> inputs{testing::random_tensor(Shape{7, 1}, rng, 0.05, 0.95),
                               testing::random_tensor(Shape{7, 3}, rng), testing::random_tensor(Shape{1, 3}, rng),
                               testing::random_tensor(Shape{edges->edge_count()}, rng, 0.1, 1.0)};
    auto builder = [&](diff::Tape&, std::span<const diff::Var> v) {
        return diff::sum(diff::square(model::state_layer(v[0], v[1], v[3], v[2], edges)));
    };
    CHECK(diff::finite_diff_check(builder, inputs, 1e-6).max_relative_error < 1e-6);
}
