#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "pgate/data/synth.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

using namespace pgate;
using data::Cascade;
using data::Split;

namespace {

std::vector<Cascade> parse(const std::string& text, const std::vector<std::string>& names) {
    std::istringstream in(text);
    return data::load_cascades(in, names);
}

Cascade sized(std::size_t n) {
    Cascade c{"c", {}};
    for (std::size_t i = 0; i < n; ++i) c.adopters.push_back(static_cast<data::NodeId>(i));
    return c;
}

std::size_t count(const std::vector<Split>& s, Split which) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), which)); }

data::SynthConfig small_config() {
    data::SynthConfig c;
    c.nodes = 60;
    c.cascades = 40;
    return c;
}

} // namespace

TEST_CASE("cascade file parsing") {
    const std::vector<std::string> names{"a", "b", "c"};
    auto cs = parse("c1\ta,b,c\n", names);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].total_size() == 3);
    CHECK(cs[0].observed_len == 0);
    CHECK(cs[0].adopters == std::vector<data::NodeId>{0, 1, 2});
    CHECK_THROWS_AS(parse("c2\ta,a\n", names), data::DataError);
    CHECK_THROWS_AS(parse("c3\tzz\n", names), data::DataError);
    CHECK_THROWS_AS(parse("c4\t\n", names), data::DataError);

    std::ostringstream out;
    data::write_cascades(out, cs, names);
    CHECK(parse(out.str(), names) == cs);
}

TEST_CASE("observed prefix rule") {
    CHECK(data::observe_prefix(sized(10), 0.5).observed_len == 5);
    CHECK(data::observe_prefix(sized(3), 0.1).observed_len == 1);
    auto one = data::observe_prefix(sized(1), 0.5);
    CHECK(one.observed_len == 1);
    CHECK(one.degenerate);
    CHECK_FALSE(data::observe_prefix(sized(2), 0.9).degenerate);
    CHECK(data::observe_prefix(sized(2), 0.9).observed_len == 1);
    CHECK_THROWS(data::observe_prefix(sized(4), 0.0));
    CHECK_THROWS(data::observe_prefix(sized(4), 1.0));
}

TEST_CASE("split sizes and determinism") {
    auto s99 = data::split_cascades(99, 0.15, 0.15, 7);
    CHECK(count(s99, Split::Train) == 71);
    CHECK(count(s99, Split::Val) == 14);
    CHECK(count(s99, Split::Test) == 14);
    auto s10 = data::split_cascades(10, 0.2, 0.2, 7);
    CHECK(count(s10, Split::Train) == 6);
    CHECK(count(s10, Split::Val) == 2);
    CHECK(count(s10, Split::Test) == 2);
    CHECK(data::split_cascades(99, 0.15, 0.15, 7) == s99);
    CHECK(data::split_cascades(99, 0.15, 0.15, 8) != s99);
    CHECK_THROWS(data::split_cascades(2, 0.2, 0.2, 1));
    CHECK_THROWS(data::split_cascades(10, 0.5, 0.5, 1));
}

TEST_CASE("independent cascade on a path averages 1.75") {
    // A -> B -> C, q = 0.5 everywhere, seed A
    auto g = graph::Graph::from_edges(3, std::vector<graph::Edge>{{0, 1}, {1, 2}}, true);
    const std::vector<double> q{0.5, 0.5, 0.5};
    const std::vector<data::NodeId> seeds{0};
    util::Rng rng(42);
    double total = 0.0;
    for (int i = 0; i < 10000; ++i) total += static_cast<double>(data::simulate_cascade(g, q, seeds, rng).size());
    CHECK(std::abs(total / 10000.0 - 1.75) < 0.05);
}

TEST_CASE("zero and certain propagation") {
    util::Rng rng(1);
    auto g = testing::random_graph(30, 0.1, false, rng);
    const auto seeds = data::sample_seeds(30, 3, rng);
    const std::vector<double> zero(30, 0.0), one(30, 1.0);
    CHECK(data::simulate_cascade(g, zero, seeds, rng).size() == 3);

    // certain propagation reaches exactly the component of the seeds
    auto reached = data::simulate_cascade(g, one, seeds, rng);
    std::set<data::NodeId> expected(seeds.begin(), seeds.end());
    std::vector<data::NodeId> frontier(seeds.begin(), seeds.end());
    while (!frontier.empty()) {
        auto u = frontier.back();
        frontier.pop_back();
        for (auto v : g.out_neighbors(u))
            if (expected.insert(v).second) frontier.push_back(v);
    }
    CHECK(std::set<data::NodeId>(reached.begin(), reached.end()) == expected);

    auto cfg = small_config();
    cfg.base_prob = 0.0;
    cfg.w_extroversion = 0.0;
    cfg.w_neuroticism = 0.0;
    for (const auto& c : data::synth_generate(cfg).cascades) CHECK(c.total_size() == cfg.seeds_per_cascade);
}

TEST_CASE("activation probabilities follow the planted rule") {
    std::vector<data::Personality> people(3);
    people[0].traits = {50, 50, 20, 50, 80};
    people[1].traits = {50, 50, 80, 50, 20};
    people[2].traits = {50, 50, 50, 50, 50};
    const auto q = data::activation_probabilities(people, 0.1, 0.4, 0.4);
    CHECK(q[0] == doctest::Approx(0.0)); // 0.1 + 0 - 0.4 clamps
    CHECK(q[1] == doctest::Approx(0.5));
    CHECK(q[2] == doctest::Approx(0.1));
}

TEST_CASE("common random numbers make cascade size monotone in the trait weights") {
    util::Rng cfg_rng(2718);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 20 + cfg_rng.index(30);
        auto g = testing::random_graph(n, 0.12, trial % 2 == 0, cfg_rng);
        std::vector<data::Personality> people(n);
        for (auto& p : people)
            for (auto& t : p.traits) t = cfg_rng.uniform(20, 80);
        const double base = cfg_rng.uniform(0.0, 0.3), w = cfg_rng.uniform(0.0, 0.5), dw = cfg_rng.uniform(0.01, 0.4);
        const std::uint64_t stream = cfg_rng.next();

        auto run = [&](double w_e, double w_n) {
            util::Rng rng(stream);
            const auto seeds = data::sample_seeds(n, 2, rng);
            const auto q = data::activation_probabilities(people, base, w_e, w_n);
            auto a = data::simulate_cascade(g, q, seeds, rng);
            return std::set<data::NodeId>(a.begin(), a.end());
        };
        const auto ref = run(w, w);
        const auto more_e = run(w + dw, w);
        const auto more_n = run(w, w + dw);
        INFO("trial " << trial);
        CHECK(std::includes(more_e.begin(), more_e.end(), ref.begin(), ref.end()));
        CHECK(std::includes(ref.begin(), ref.end(), more_n.begin(), more_n.end()));
    }
}

TEST_CASE("generated cascades are seeded, connected and in BFS order") {
    const auto d = data::synth_generate(small_config());
    CHECK(d.cascades.size() == 40);
    CHECK(d.personalities.size() == 60);
    for (const auto& p : d.personalities)
        for (double t : p.traits) CHECK((t >= 20.0 && t <= 80.0));
    for (const auto& c : d.cascades) {
        CHECK(c.observed_len >= 1);
        CHECK(c.observed_len <= c.total_size());
        std::set<data::NodeId> active(c.adopters.begin(), c.adopters.begin() + 3);
        for (std::size_t i = 3; i < c.adopters.size(); ++i) {
            const auto v = c.adopters[i];
            auto in = d.graph.in_neighbors(v);
            CHECK(std::any_of(in.begin(), in.end(), [&](auto u) { return active.contains(u); }));
            active.insert(v);
        }
    }
}

TEST_CASE("generator is deterministic per seed") {
    auto cfg = small_config();
    CHECK(data::synth_generate(cfg) == data::synth_generate(cfg));
    auto other = cfg;
    other.seed = 2;
    CHECK_FALSE(data::synth_generate(other) == data::synth_generate(cfg));
}

TEST_CASE("all-degenerate generation aborts") {
    auto cfg = small_config();
    cfg.seeds_per_cascade = 1;
    cfg.base_prob = 0.0;
    cfg.w_extroversion = 0.0;
    cfg.w_neuroticism = 0.0;
    CHECK_THROWS_AS(data::synth_generate(cfg), data::DataError);
}

TEST_CASE("dataset export and import round trip") {
    const auto d = data::synth_generate(small_config());
    const auto dir = testing::scratch_dir("roundtrip");
    data::export_dataset(d, dir / "d");
    const auto back = data::import_dataset(dir / "d");
    CHECK(back == d);

    SUBCASE("missing split file is named") {
        std::filesystem::remove(dir / "d" / "split.csv");
        try {
            data::import_dataset(dir / "d");
            FAIL("expected an error");
        } catch (const std::exception& e) {
            CHECK(std::string(e.what()).find("split.csv") != std::string::npos);
        }
    }
}

TEST_CASE("personality csv rejects non-positive traits") {
    const std::vector<std::string> names{"a", "b"};
    std::istringstream ok("node,O,C,E,A,N\na,1,2,3,4,5\nb,5,4,3,2,1\n");
    CHECK(data::read_personality_csv(ok, names).size() == 2);
    std::istringstream zero("node,O,C,E,A,N\na,1,2,0,4,5\nb,5,4,3,2,1\n");
    CHECK_THROWS(data::read_personality_csv(zero, names));
    std::istringstream header("node,O,C,E,A\na,1,2,3,4\nb,5,4,3,2\n");
    CHECK_THROWS(data::read_personality_csv(header, names));
}
