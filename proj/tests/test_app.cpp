#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "dgp/app.hpp"

using namespace dgp;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag)
        : path(std::filesystem::temp_directory_path() / ("dgp_app_" + tag + "_" + std::to_string(::getpid()))) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig tiny(const std::filesystem::path& out) {
    std::istringstream in(
        "seed = 3\n"
        "synth.per_class = 20\n"
        "pretrain.epochs = 1\n"
        "dgp.epochs = 2\n"
        "dgp.batch = 16\n");
    ExperimentConfig c = parse_config(in);
    c.out = out;
    return c;
}

}  // namespace

TEST_CASE("config parsing") {
    std::istringstream in(
        "# comment\n"
        "seed = 7\n"
        "dgp.gamma = 0.5   # trailing\n"
        "grid.lambda = 0.1, 1, 10\n"
        "dgp.standardize = false\n"
        "\n");
    const ExperimentConfig c = parse_config(in);
    CHECK(c.seed == 7);
    CHECK(c.dgp.gamma == 0.5);
    CHECK(c.grid.lambda == std::vector<double>{0.1, 1, 10});
    CHECK_FALSE(c.dgp.standardize);

    std::istringstream back(config_text(c));
    const ExperimentConfig again = parse_config(back);
    CHECK(config_text(again) == config_text(c));
    CHECK(config_json(again) == config_json(c));

    std::istringstream unknown("dgp.gama = 1\n");
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
    std::istringstream bad("dgp.epochs = -3\n");
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    std::istringstream no_eq("seed 3\n");
    CHECK_THROWS_AS(parse_config(no_eq), ConfigError);
    for (const auto& k : config_keys()) CHECK_FALSE(k.doc.empty());
}

TEST_CASE("grid search") {
    GridSpec spec;
    spec.lambda = {0.1, 1.0};
    spec.gamma = {0.0, 1.0, 2.0};
    spec.alpha1 = {10, 100};
    spec.alpha2 = {100};
    spec.lr = {1e-3, 1e-2};
    std::size_t calls = 0;

    SUBCASE("dominant cell wins") {
        const auto eval = [&](const DgpConfig& c, const std::vector<double>& gammas) {
            ++calls;
            std::vector<double> out;
            for (double g : gammas) out.push_back(c.lambda == 1.0 && c.alpha1 == 10 && c.lr == 1e-2 && g == 2.0 ? 0.9 : 0.5);
            return out;
        };
        const GridResult r = run_grid(spec, DgpConfig{}, eval);
        CHECK(r.cells.size() == spec.cardinality());
        CHECK(r.cells.size() == 24);
        CHECK(calls == 8);
        CHECK(r.best.val_auc == 0.9);
        CHECK(r.best.tuple() == std::vector<double>{1.0, 2.0, 10, 100, 1e-2});
    }
    SUBCASE("ties go to the smaller tuple") {
        const GridResult r = run_grid(spec, DgpConfig{}, [](const DgpConfig&, const std::vector<double>& g) {
            return std::vector<double>(g.size(), 0.7);
        });
        CHECK(r.best.tuple() == std::vector<double>{0.1, 0.0, 10, 100, 1e-3});
    }
    SUBCASE("single point") {
        GridSpec one;
        const GridResult r = run_grid(one, DgpConfig{}, [](const DgpConfig&, const std::vector<double>& g) {
            return std::vector<double>(g.size(), 0.6);
        });
        CHECK(r.cells.size() == 1);
        CHECK(r.best.val_auc == 0.6);
    }
    SUBCASE("empty axis") {
        spec.gamma.clear();
        CHECK_THROWS(run_grid(spec, DgpConfig{}, [](const DgpConfig&, const std::vector<double>& g) {
            return std::vector<double>(g.size(), 0.6);
        }));
    }
}

TEST_CASE("synth output parses back to the same graphs") {
    TempDir tmp("synth");
    ExperimentConfig c = tiny(tmp.path);
    std::ostringstream log;
    REQUIRE(cmd_synth(c, log) == 0);
    const Datasets ds = load_datasets(c);
    const std::string id_name = ds.id.name, ood_name = ds.ood.name;
    const GraphDataset id = parse_tu_dataset(tmp.path / "id", id_name);
    const GraphDataset ood = parse_tu_dataset(tmp.path / "ood", ood_name);
    REQUIRE(id.size() == ds.id.size());
    REQUIRE(ood.size() == ds.ood.size());
    for (std::size_t k = 0; k < id.size(); ++k) {
        CHECK(id.graphs[k].label == ds.id.graphs[k].label);
        CHECK(id.graphs[k].graph.node_count == ds.id.graphs[k].graph.node_count);
        CHECK(id.graphs[k].graph.edges == ds.id.graphs[k].graph.edges);
    }
    for (std::size_t k = 0; k < ood.size(); ++k) CHECK(ood.graphs[k].graph.edges == ds.ood.graphs[k].graph.edges);
}

TEST_CASE("prompt dump") {
    TempDir tmp("prompts");
    ExperimentConfig c = tiny(tmp.path);
    const Datasets ds = load_datasets(c);
    const SplitBundle split = split_datasets(c, ds);
    GinEncoder enc = run_pretrain(c, split).encoder;
    enc.freeze();
    TrainResult tr = run_train(c, dgp_config(c), enc, split, ds.id.class_count);
    REQUIRE(!split.test_ood.empty());
    for (const auto& lg : split.test_ood) {
        const Graph& g = lg.graph;
        const auto rows = dump_prompts(g, "g", tr.model);
        CHECK(rows.size() * 2 == g.edge_count());
        for (const auto& r : rows) {
            CHECK(r.u < r.v);
            CHECK(r.has_reverse);
            CHECK(r.w1_avg == (r.w1_uv + r.w1_vu) / 2);
            CHECK(r.w2_avg == (r.w2_uv + r.w2_vu) / 2);
            for (double w : {r.w1_uv, r.w1_vu, r.w2_uv, r.w2_vu}) {
                CHECK(w > 0.0);
                CHECK(w < 1.0);
            }
        }
    }
}

TEST_CASE("pipeline matches the composed subcommands and repeats exactly") {
    TempDir a("pipe_a"), b("pipe_b"), c("pipe_c");
    std::ostringstream log;
    REQUIRE(cmd_pipeline(tiny(a.path), log) == 0);
    REQUIRE(cmd_pipeline(tiny(b.path), log) == 0);
    CHECK(slurp(a.path / "metrics.json") == slurp(b.path / "metrics.json"));
    CHECK(slurp(a.path / "scores.csv") == slurp(b.path / "scores.csv"));

    const ExperimentConfig step = tiny(c.path);
    for (const char* cmd : {"pretrain", "train", "score", "eval"}) REQUIRE(run_command(cmd, step, log) == 0);
    CHECK(slurp(a.path / "encoder.ckpt") == slurp(c.path / "encoder.ckpt"));
    CHECK(slurp(a.path / "scores.csv") == slurp(c.path / "scores.csv"));
    CHECK(slurp(a.path / "metrics.json") == slurp(c.path / "metrics.json"));
    CHECK(std::filesystem::exists(a.path / "manifest.json"));
    CHECK_THROWS(run_command("frobnicate", step, log));
}
