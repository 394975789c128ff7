#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "imtl/cli/commands.hpp"
#include "imtl/cli/config_file.hpp"
#include "imtl/cli/plot.hpp"
#include "imtl/env/dataset_io.hpp"
#include "imtl/errors.hpp"
#include "imtl/harness/metrics.hpp"
#include "json.hpp"

using namespace imtl;
using namespace imtl::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(const std::vector<std::string>& args, Environment env = {}) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err, env);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / "imtl_test_cli" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

const char* kSmallRun =
    "[run]\nepochs = 24\ncache_size = 1200\nseeds = 1\nthreads = 1\n"
    "[strategy]\nkind = emlp\nk = 0.7\n";

}  // namespace

TEST_CASE("config file: every documented key parses") {
    const auto c = apply_config(parse_config_text(
        "# comment\n[run]\nepochs = 50\nbatch = 50\nlearning_rate = 0.001\nweight_decay = 0\n"
        "seeds = 1-3\ndata_seed = 9\ncache_size = 2000\neval_batch = 100\ninteractions = 100\nthreads = 2\n"
        "label = mine\n[strategy]\nkind = block\norder = stack, push, hit\nepsilon = 0.2\nwindow = 4\n"
        "[network]\ntier = medium\nattention = false\nflag = no\n[tasks]\nlist = push, hit, stack\n"));
    CHECK(c.epochs == 50);
    CHECK(c.batch == 50);
    CHECK(c.learning_rate == 0.001);
    CHECK(c.weight_decay == 0.0);
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(c.data_seed == 9);
    CHECK(c.steps_per_engagement() == 2);
    CHECK(c.label == "mine");
    CHECK(c.strategy.kind == arbitration::StrategyKind::Block);
    CHECK(c.strategy.order == std::vector<std::size_t>{2, 0, 1});
    CHECK(c.strategy.epsilon == 0.2);
    CHECK(c.strategy.window == 4);
    CHECK(c.tier == mtl::Tier::Medium);
    CHECK_FALSE(c.use_attention);
    CHECK_FALSE(c.use_flag);
    CHECK(known_keys().size() >= 20);
}

TEST_CASE("config file: errors name the offending key or line") {
    try {
        apply_config(parse_config_text("[run]\nepochs = 5\nepoch = 7\n"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.epoch") != std::string::npos);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("[run]\nepochs = 5\nepochs = 6\n"), ConfigError);
    CHECK_THROWS_AS(apply_config(parse_config_text("epochs = 5\n")), ConfigError);
    CHECK_THROWS_AS(apply_config(parse_config_text("[run]\nepochs = five\n")), ConfigError);
    CHECK_THROWS_AS(parse_seed_list("3-1"), ConfigError);
    CHECK(parse_seed_list("4,9") == std::vector<std::uint64_t>{4, 9});
}

TEST_CASE("seed precedence: flag over environment over file") {
    const auto dir = scratch("prec");
    const auto f = write_text(dir / "c.ini", "[run]\nseeds = 5\n");
    CHECK(load_run_config({f, std::nullopt, std::nullopt}).seeds == std::vector<std::uint64_t>{5});
    CHECK(load_run_config({f, std::nullopt, "8"}).seeds == std::vector<std::uint64_t>{8});
    CHECK(load_run_config({f, 11, "8"}).seeds == std::vector<std::uint64_t>{11});
    CHECK(load_run_config({std::nullopt, std::nullopt, std::nullopt}).seeds.size() == 10);
    CHECK_THROWS_AS(load_run_config({f, std::nullopt, "x"}), ConfigError);
}

TEST_CASE("gen-data writes a reproducible CSV and rejects n < batch") {
    const auto dir = scratch("gen");
    const auto a = invoke({"gen-data", "--task", "hit", "--n", "300", "--seed", "4", "--out", (dir / "a.csv").string()});
    const auto b = invoke({"gen-data", "--task", "hit", "--n", "300", "--seed", "4", "--out", (dir / "b.csv").string()});
    REQUIRE(a.code == 0);
    CHECK(env::file_checksum(dir / "a.csv") == env::file_checksum(dir / "b.csv"));
    CHECK(a.out.find("checksum=" + env::file_checksum(dir / "a.csv")) != std::string::npos);
    CHECK(env::read_dataset(dir / "a.csv").size() == 300);

    const auto zero = invoke({"gen-data", "--task", "push", "--n", "0", "--seed", "1", "--out", (dir / "z.csv").string()});
    CHECK(zero.code == 2);
    CHECK(zero.err.find("n must be") != std::string::npos);
    CHECK(invoke({"gen-data", "--task", "fly", "--n", "200", "--seed", "1", "--out", (dir / "f.csv").string()}).code == 2);
}

TEST_CASE("run writes metrics, summary and checkpoint") {
    const auto dir = scratch("run");
    const auto cfg = write_text(dir / "c.ini", kSmallRun);
    const auto r = invoke({"run", "--config", cfg.string(), "--out", dir.string(), "--progress", "12"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("progress seed=1 epoch=12") != std::string::npos);
    const auto stem = dir / "emlp-k0.7_seed1";
    std::ifstream js(stem.string() + "_summary.json");
    REQUIRE(js.good());
    const auto j = nlohmann::json::parse(js);
    std::size_t total = 0;
    for (const auto& v : j["engagement_counts"]) total += v.get<std::size_t>();
    CHECK(total == 24);
    CHECK(j["config"]["strategy"]["k"].get<double>() == 0.7);
    CHECK(j["format_version"] == 1);
    CHECK(harness::read_csv(stem.string() + "_metrics.csv").rows.size() == 24);
    CHECK(fs::exists(stem.string() + ".ckpt"));
}

TEST_CASE("run: seed from the environment, missing dataset, unknown key") {
    const auto dir = scratch("run_env");
    const auto cfg = write_text(dir / "c.ini", kSmallRun);
    Environment env;
    env.imtl_seed = "3";
    REQUIRE(invoke({"run", "--config", cfg.string(), "--out", dir.string()}, env).code == 0);
    CHECK(fs::exists(dir / "emlp-k0.7_seed3_metrics.csv"));

    const auto missing = write_text(dir / "m.ini", "[run]\nepochs = 5\ncache_size = 1200\nseeds = 1\ndata_dir = " + (dir / "nodata").string() + "\n");
    const auto m = invoke({"run", "--config", missing.string(), "--out", dir.string()});
    CHECK(m.code == 2);
    CHECK(m.err.find("dataset file not found") != std::string::npos);

    const auto bad = write_text(dir / "bad.ini", "[run]\nepochz = 5\n");
    const auto b = invoke({"run", "--config", bad.string(), "--out", dir.string()});
    CHECK(b.code == 2);
    CHECK(b.err.find("epochz") != std::string::npos);
    CHECK(invoke({"run"}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
}

TEST_CASE("run: divergence exits with the abort code") {
    const auto dir = scratch("abort");
    const auto cfg = write_text(dir / "c.ini", "[run]\nepochs = 100\ncache_size = 1200\nseeds = 1\nlearning_rate = 1e90\n"
                                               "weight_decay = 0\n[strategy]\nkind = rand\n");
    const auto r = invoke({"run", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 3);
    const auto t = harness::read_csv(dir / "rand_seed1_metrics.csv");
    CHECK(t.comments.back().find("aborted at epoch") != std::string::npos);
}

TEST_CASE("compare refuses mismatched horizons and writes curves otherwise") {
    const auto dir = scratch("compare");
    const auto a = write_text(dir / "a.ini", "[run]\nepochs = 10\ncache_size = 1200\nseeds = 1\n[strategy]\nkind = rand\n");
    const auto b = write_text(dir / "b.ini", "[run]\nepochs = 12\ncache_size = 1200\nseeds = 1\n[strategy]\nkind = lp\n");
    const auto c = write_text(dir / "c.ini", "[run]\nepochs = 10\ncache_size = 1200\nseeds = 1\n[strategy]\nkind = lp\n");
    CHECK(invoke({"compare", "--configs", a.string(), b.string(), "--out", dir.string()}).code == 2);
    const auto ok = invoke({"compare", "--configs", a.string(), c.string(), "--out", dir.string()});
    REQUIRE(ok.code == 0);
    const auto curves = harness::read_csv(dir / "curves.csv");
    CHECK(curves.has_column("rand_mean"));
    CHECK(curves.has_column("lp_std"));
    CHECK(curves.rows.size() == 10);
}

TEST_CASE("ablate enumerates modes and rejects unknown ones") {
    const auto dir = scratch("ablate");
    const auto cfg = write_text(dir / "c.ini", "[run]\nepochs = 6\ncache_size = 1200\nseeds = 1\n");
    const auto r = invoke({"ablate", "--config", cfg.string(), "--mode", "all", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto mid = harness::read_csv(dir / "midpoint.csv");
    CHECK(mid.rows.size() == 4);
    CHECK(invoke({"ablate", "--config", cfg.string(), "--mode", "no-head", "--out", dir.string()}).code == 2);
}

TEST_CASE("transfer and regime run on artifacts of a previous run") {
    const auto dir = scratch("transfer");
    for (const char* t : {"push", "hit", "stack"}) {
        REQUIRE(invoke({"gen-data", "--task", t, "--n", "1200", "--seed", "2024", "--out", (dir / (std::string(t) + ".csv")).string()}).code == 0);
    }
    const auto cfg = write_text(dir / "c.ini", "[run]\nepochs = 60\nseeds = 1\ndata_dir = " + dir.string() + "\n");
    REQUIRE(invoke({"run", "--config", cfg.string(), "--out", dir.string()}).code == 0);
    const auto tr = invoke({"transfer", "--checkpoint", (dir / "lp_seed1.ckpt").string(), "--data", dir.string(), "--out",
                         (dir / "transfer.csv").string()});
    REQUIRE(tr.code == 0);
    CHECK(fs::exists(dir / "transfer_matrix.csv"));
    CHECK(invoke({"transfer", "--checkpoint", (dir / "none.ckpt").string(), "--data", dir.string(), "--out",
               (dir / "t.csv").string()}).code == 2);

    const auto rg = invoke({"regime", "--metrics", (dir / "lp_seed1_metrics.csv").string(), "--out", (dir / "regime.csv").string()});
    REQUIRE(rg.code == 0);
    CHECK(rg.out.find("windows=2") != std::string::npos);
}

TEST_CASE("plot: single series without a band, mean series with one") {
    const auto dir = scratch("plot");
    write_text(dir / "c.csv", "epoch,a,b_mean,b_std\n0,1,2,0.1\n1,0.5,1.5,0.2\n2,0.25,1,0.1\n");
    write_text(dir / "p.ini", "[plot]\ninput = c.csv\noutput = one.svg\nseries = a\n[plot]\ninput = c.csv\noutput = two.svg\nseries = b_mean\n");
    const auto specs = read_plot_spec(dir / "p.ini");
    REQUIRE(specs.size() == 2);
    CHECK(specs[0].input == dir / "c.csv");
    const auto table = harness::read_csv(dir / "c.csv");
    std::vector<RenderedSeries> drawn;
    const auto svg = render_svg(table, specs[0], &drawn);
    REQUIRE(drawn.size() == 1);
    CHECK_FALSE(drawn[0].band);
    CHECK(svg.find("class=\"band\"") == std::string::npos);
    CHECK(render_svg(table, specs[1], &drawn).find("class=\"band\"") != std::string::npos);
    CHECK(drawn.back().band);
    REQUIRE(invoke({"plot", "--spec", (dir / "p.ini").string()}).code == 0);
    CHECK(fs::exists(dir / "one.svg"));
    CHECK(fs::exists(dir / "two.svg"));
}
