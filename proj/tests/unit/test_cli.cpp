#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "pgate/cli/commands.hpp"
#include "pgate/util/text.hpp"

#include <sstream>
#include <sys/wait.h>

using namespace pgate;
using cli::RunConfig;
using cli::Source;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const fs::path& root) {
    RunConfig cfg;
    for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
             {"synth.nodes", "40"}, {"synth.cascades", "24"}, {"synth.base_prob", "0.2"},
             {"model.dim_c", "6"}, {"model.dim_p", "6"}, {"model.embed_dim", "4"},
             {"train.max_epochs", "2"}, {"train.learning_rate", "0.01"}, {"baseline.epochs", "20"}})
        cfg.set(k, v, Source::Flag);
    cfg.dataset = root / "data";
    cfg.out = root / "runs";
    return cfg;
}

void make_dataset(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.command = "synth";
    std::ostringstream log;
    cli::run_command(cfg, log);
}

std::map<std::string, std::string> section(const std::string& text, const std::string& name) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line, current;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '[') {
            current = line;
            continue;
        }
        const auto eq = line.find('=');
        if (current == "[" + name + "]" && eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

int run_exe(const std::string& args) {
    const std::string cmd = std::string(PGATE_EXE) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config keys and provenance") {
    RunConfig cfg;
    CHECK_THROWS_AS(cfg.set("train.nonsense", "1", Source::Flag), cli::ConfigError);
    CHECK_THROWS_AS(cfg.set("train.lambda", "abc", Source::Flag), cli::ConfigError);
    CHECK_FALSE(cfg.provenance.contains("train.lambda"));

    std::istringstream file("# comment\ntrain.lambda = 10\nmodel.layers=3\n[results]\nignored=1\n");
    cli::load_config(cfg, file);
    cfg.set("train.learning_rate", "0.0005", Source::Flag);
    CHECK(cfg.train.lambda == 10.0);
    CHECK(cfg.model.layers == 3);
    CHECK(cfg.provenance.at("train.lambda") == Source::File);
    CHECK(cfg.provenance.at("train.learning_rate") == Source::Flag);
    CHECK_FALSE(cfg.provenance.contains("model.base"));

    std::istringstream bad("no_such.key=1\n");
    CHECK_THROWS_AS(cli::load_config(cfg, bad), cli::ConfigError);

    std::ostringstream echo;
    cli::write_config(echo, cfg);
    RunConfig back;
    std::istringstream in(echo.str());
    cli::load_config(back, in);
    for (const auto& key : cli::config_keys()) CHECK(back.get(key) == cfg.get(key));
}

TEST_CASE("synth is byte-identical for a fixed seed") {
    const auto root = testing::scratch_dir("cli_synth");
    auto a = small_config(root);
    auto b = a;
    b.dataset = root / "data2";
    make_dataset(a);
    make_dataset(b);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a.dataset)) {
        ++files;
        CHECK(testing::read_file(entry.path()) == testing::read_file(b.dataset / entry.path().filename()));
    }
    CHECK(files >= 4);
    CHECK_THROWS(make_dataset(a));
}

TEST_CASE("train report echoes the configuration and reproduces") {
    const auto root = testing::scratch_dir("cli_train");
    auto cfg = small_config(root);
    make_dataset(cfg);
    cfg.command = "train";
    cfg.set("train.lambda", "10.0", Source::Flag);
    cfg.set("train.learning_rate", "0.0005", Source::Flag);
    cfg.set("model.layers", "3", Source::Flag);
    std::ostringstream log;
    const auto first = cli::cmd_train(cfg, log);
    CHECK(first.run_dir.filename() == "train_seed1_lambda10");
    for (const char* f : {"report.txt", "history.csv", "checkpoint/manifest.txt"}) CHECK(fs::exists(first.run_dir / f));

    const auto report = testing::read_file(first.run_dir / "report.txt");
    const auto echo = section(report, "config");
    CHECK(echo.at("train.lambda") == "10");
    CHECK(echo.at("train.learning_rate") == "0.0005");
    CHECK(echo.at("model.layers") == "3");
    CHECK(section(report, "provenance").at("train.lambda") == "flag");
    const auto results = section(report, "results");
    CHECK(results.at("epochs_run") == "2");
    CHECK(results.contains("test.cascade.rmrse"));

    RunConfig again;
    cli::load_config_file(again, first.run_dir / "report.txt");
    again.command = "train";
    const auto second = cli::cmd_train(again, log);
    CHECK(second.run_dir.filename() == "train_seed1_lambda10.2");
    CHECK(section(testing::read_file(second.run_dir / "report.txt"), "results") == results);
    CHECK(testing::read_file(second.run_dir / "history.csv") == testing::read_file(first.run_dir / "history.csv"));
    CHECK(testing::read_file(first.run_dir / "report.txt") == report);

    cfg.command = "eval";
    cfg.checkpoint = first.run_dir / "checkpoint";
    const auto eval_dir = cli::cmd_eval(cfg, log);
    const auto eval = section(testing::read_file(eval_dir / "report.txt"), "results");
    CHECK(eval.at("test.cascade.rmrse") == results.at("test.cascade.rmrse"));
}

TEST_CASE("sweep writes one row per cell and per-lambda means") {
    const auto root = testing::scratch_dir("cli_sweep");
    auto cfg = small_config(root);
    make_dataset(cfg);
    cfg.command = "sweep";
    cfg.set("sweep.lambdas", "0,1", Source::Flag);
    cfg.set("sweep.seeds", "1,2", Source::Flag);
    std::ostringstream log;
    const auto dir = cli::cmd_sweep(cfg, log);
    const auto rows = lines(testing::read_file(dir / "summary.csv"));
    REQUIRE(rows.size() == 7);
    CHECK(rows[0].starts_with("lambda,seed,"));
    CHECK(rows[1].starts_with("0,1,"));
    CHECK(rows[2].starts_with("0,2,"));
    CHECK(rows[3].starts_with("0,mean,"));
    CHECK(rows[4].starts_with("1,1,"));
    CHECK(rows[5].starts_with("1,2,"));
    CHECK(rows[6].starts_with("1,mean,"));
    for (const char* cell : {"train_seed1_lambda0", "train_seed2_lambda0", "train_seed1_lambda1", "train_seed2_lambda1"})
        CHECK(fs::exists(dir / cell / "report.txt"));
}

TEST_CASE("baseline and feature commands") {
    const auto root = testing::scratch_dir("cli_baseline");
    auto cfg = small_config(root);
    make_dataset(cfg);
    std::ostringstream log;
    const auto dir = cli::cmd_baseline(cfg, log);
    const auto results = section(testing::read_file(dir / "report.txt"), "results");
    for (const char* key : {"fbc-r.test.rmrse", "fbc-m.test.mape", "fbp-r.all.rmrse", "fbp-m.all.mape"})
        CHECK(results.contains(key));

    cfg.graph = cfg.dataset / "edges.txt";
    const auto features = cli::cmd_features(cfg, log);
    const auto rows = lines(testing::read_file(features));
    CHECK(rows.size() == 41);
    CHECK_THROWS(cli::cmd_features(cfg, log));
}

TEST_CASE("run directories are never reused") {
    const auto root = testing::scratch_dir("cli_dirs");
    const auto a = cli::make_run_dir(root, "train", 3, 0.01);
    const auto b = cli::make_run_dir(root, "train", 3, 0.01);
    CHECK(a.filename() == "train_seed3_lambda0.01");
    CHECK(b.filename() == "train_seed3_lambda0.01.2");
}

TEST_CASE("exit codes") {
    const auto root = testing::scratch_dir("cli_exit");
    const std::string data = (root / "data").string();
    CHECK(run_exe("synth --out " + root.string() + " --dataset " + data + " --set synth.nodes=30 --set synth.cascades=20") == 0);
    CHECK(run_exe("train --bogus-flag") == 1);
    CHECK(run_exe("frobnicate") == 1);
    CHECK(run_exe("train --set no.such=1 --dataset " + data) == 1);
    CHECK(run_exe("train --dataset " + (root / "missing").string()) == 1);
    CHECK(run_exe("train --set train.learning_rate=-1 --dataset " + data) == 1);
    fs::create_directories(root / "broken");
    CHECK(run_exe("eval --dataset " + data + " --checkpoint " + (root / "broken").string()) == 2);
    CHECK(run_exe("train --list-keys") == 0);
}

TEST_CASE("number formatting round-trips") {
    CHECK(util::format_double(0.0005) == "0.0005");
    CHECK(util::format_double(10.0) == "10");
    CHECK(util::format_double(1e-8) == "1e-08");
    util::Rng rng(41);
    for (int i = 0; i < 2000; ++i) {
        const double x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.index(120)) - 60);
        CHECK(util::parse_double(util::format_double(x)) == x);
    }
}
