#include "imtl/cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <ostream>

#include "CLI11.hpp"

#include "imtl/cli/config_file.hpp"
#include "imtl/cli/plot.hpp"
#include "imtl/env/dataset_io.hpp"
#include "imtl/errors.hpp"
#include "imtl/harness/experiments.hpp"
#include "imtl/harness/summary.hpp"
#include "imtl/mtl/checkpoint.hpp"

namespace imtl::cli {

namespace fs = std::filesystem;
using harness::RunConfig;

Environment Environment::from_process() {
    Environment e;
    if (const char* s = std::getenv("IMTL_SEED")) e.imtl_seed = std::string(s);
    return e;
}

namespace {

struct Context {
    std::ostream& out;
    std::ostream& err;
    const Environment& env;
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

RunConfig load(const Context& ctx, const std::string& file, const std::optional<std::uint64_t>& seed) {
    ConfigSources src;
    if (!file.empty()) src.file = file;
    src.cli_seed = seed;
    src.env_seed = ctx.env.imtl_seed;
    return load_run_config(src);
}

void print_aggregate(const Context& ctx, const harness::Aggregate& a) {
    const auto mid = harness::stat_of(a.midpoint_overall);
    const auto fin = harness::stat_of(a.final_overall);
    const auto en = harness::stat_of(a.midpoint_energy);
    char buf[256];
    std::snprintf(buf, sizeof buf, "aggregate label=%s seeds=%zu midpoint_mae=%.6g midpoint_mae_std=%.6g final_mae=%.6g midpoint_energy=%.6g\n",
                  a.label.c_str(), a.seeds.size(), mid.mean, mid.std, fin.mean, en.mean);
    ctx.out << buf;
}

std::vector<harness::Aggregate> run_aggregates(const Context& ctx, std::vector<RunConfig> configs) {
    std::map<std::string, int> used;
    std::vector<harness::Aggregate> out;
    for (auto& c : configs) {
        if (int n = used[c.label]++; n > 0) c.label += "_" + std::to_string(n + 1);
        const auto data = harness::prepare_datasets(c);
        const auto results = harness::run_seeds(c, data);
        for (const auto& r : results) {
            if (r.log.aborted) throw NumericError(c.label + " seed " + std::to_string(r.log.seed) + ": " + r.log.failure);
        }
        out.push_back(harness::aggregate(harness::logs_of(results), c.label));
        print_aggregate(ctx, out.back());
    }
    return out;
}

void write_aggregates(const Context& ctx, const std::vector<harness::Aggregate>& aggs, const fs::path& dir) {
    ensure_dir(dir);
    harness::write_curves_csv(aggs, dir / "curves.csv");
    harness::write_midpoint_csv(aggs, dir / "midpoint.csv");
    ctx.out << "wrote " << (dir / "curves.csv").string() << "\n";
    ctx.out << "wrote " << (dir / "midpoint.csv").string() << "\n";
}

// ---- subcommands -----------------------------------------------------------

int cmd_gen_data(const Context& ctx, const std::string& task, std::size_t n, std::uint64_t seed,
                 std::size_t batch, const fs::path& out_path) {
    const env::TaskKind kind = env::parse_task_kind(task);
    if (n < batch) throw ConfigError("n must be ≥ batch (n=" + std::to_string(n) + ", batch=" + std::to_string(batch) + ")");
    const env::Dataset d = env::generate_dataset(kind, n, seed);
    env::write_dataset(d, out_path);
    ctx.out << "gen-data task=" << task << " d_s=" << d.spec.state_dim << " d_a=" << d.spec.action_dim
            << " d_e=" << d.spec.effect_dim << " rows=" << d.size() << " seed=" << seed
            << " checksum=" << env::file_checksum(out_path) << " out=" << out_path.string() << "\n";
    return kExitOk;
}

int cmd_run(const Context& ctx, const std::string& config_file, const std::optional<std::uint64_t>& seed,
            const fs::path& out_dir, std::size_t progress) {
    const RunConfig config = load(ctx, config_file, seed);
    ensure_dir(out_dir);
    const auto data = harness::prepare_datasets(config);
    bool aborted = false;
    for (std::uint64_t s : config.seeds) {
        harness::EpochHook hook;
        if (progress > 0) {
            hook = [&](const harness::EpochRow& r) {
                if ((r.epoch + 1) % progress == 0) {
                    char buf[160];
                    std::snprintf(buf, sizeof buf, "progress seed=%llu epoch=%zu task=%zu overall_mae=%.6g\n",
                                  static_cast<unsigned long long>(s), r.epoch + 1, r.task, r.overall());
                    ctx.out << buf << std::flush;
                }
            };
        }
        harness::RunResult result = harness::run(config, s, data, hook);
        const std::string stem = config.label + "_seed" + std::to_string(s);
        harness::write_metrics_csv(result.log, out_dir / (stem + "_metrics.csv"));
        harness::write_json(harness::run_summary(config, result.log, data), out_dir / (stem + "_summary.json"));
        if (!result.log.rows.empty()) mtl::save_checkpoint(out_dir / (stem + ".ckpt"), result.models);
        const auto counts = result.log.engagement_counts();
        ctx.out << "run label=" << config.label << " seed=" << s << " epochs=" << result.log.rows.size()
                << " status=" << (result.log.aborted ? "aborted" : "ok") << " counts=";
        for (std::size_t i = 0; i < counts.size(); ++i) ctx.out << (i ? "," : "") << counts[i];
        if (!result.log.rows.empty()) {
            const auto& mid = result.log.rows[result.log.midpoint_index()];
            ctx.out << " midpoint_mae=" << mid.overall() << " final_mae=" << result.log.rows.back().overall();
        }
        ctx.out << " metrics=" << (out_dir / (stem + "_metrics.csv")).string() << "\n";
        if (result.log.aborted) {
            ctx.err << "error: run aborted (seed " << s << "): " << result.log.failure << "\n";
            aborted = true;
        }
    }
    return aborted ? kExitAbort : kExitOk;
}

int cmd_compare(const Context& ctx, const std::vector<std::string>& files, const std::optional<std::uint64_t>& seed,
                const fs::path& out_dir) {
    std::vector<RunConfig> configs;
    for (const auto& f : files) configs.push_back(load(ctx, f, seed));
    for (const auto& c : configs) {
        if (c.epochs != configs.front().epochs) {
            throw ConfigError("configs disagree on epochs (" + std::to_string(configs.front().epochs) + " vs " +
                              std::to_string(c.epochs) + ")");
        }
        if (c.tasks != configs.front().tasks) throw ConfigError("configs disagree on the task list");
    }
    write_aggregates(ctx, run_aggregates(ctx, configs), out_dir);
    return kExitOk;
}

int cmd_block_suite(const Context& ctx, const std::string& file, const std::optional<std::uint64_t>& seed,
                    const fs::path& out_dir) {
    const RunConfig config = load(ctx, file, seed);
    harness::permutations(config.tasks.size());  // guard before any work
    const auto data = harness::prepare_datasets(config);
    const auto runs = harness::run_block_suite(config, data);
    std::vector<harness::Aggregate> aggs;
    for (const auto& r : runs) {
        aggs.push_back(r.aggregate);
        print_aggregate(ctx, r.aggregate);
    }
    write_aggregates(ctx, aggs, out_dir);
    std::vector<std::string> names;
    for (auto k : config.tasks) names.push_back(env::to_string(k));
    harness::write_forgetting_csv(runs, names, out_dir / "forgetting.csv");
    ctx.out << "wrote " << (out_dir / "forgetting.csv").string() << "\n";
    return kExitOk;
}

int cmd_ablate(const Context& ctx, const std::string& file, const std::string& mode,
               const std::optional<std::uint64_t>& seed, const fs::path& out_dir) {
    const RunConfig config = load(ctx, file, seed);
    std::vector<RunConfig> configs;
    if (mode == "all") {
        for (auto m : harness::kAblationModes) configs.push_back(harness::apply_ablation(config, m));
    } else {
        configs.push_back(harness::apply_ablation(config, harness::parse_ablation_mode(mode)));
    }
    write_aggregates(ctx, run_aggregates(ctx, configs), out_dir);
    return kExitOk;
}

int cmd_transfer(const Context& ctx, const std::vector<std::string>& checkpoints, const fs::path& data_dir,
                 const fs::path& out_path) {
    std::vector<mtl::MultiTaskModel> models;
    for (const auto& c : checkpoints) {
        if (!fs::exists(c)) throw IoError("checkpoint not found: " + c);
        auto loaded = mtl::load_checkpoint(c);
        if (loaded.size() != 1) throw ConfigError("checkpoint '" + c + "' holds single-task models; transfer needs one multi-task model");
        models.push_back(std::move(loaded.front()));
    }
    std::vector<env::TaskKind> kinds;
    std::vector<env::Dataset> datasets;
    for (const auto& t : models.front().tasks()) {
        kinds.push_back(env::parse_task_kind(t.name));
        const fs::path p = data_dir / (t.name + ".csv");
        if (!fs::exists(p)) throw IoError("dataset file not found: " + p.string());
        datasets.push_back(env::read_dataset(p, t));
    }
    const auto report = harness::run_transfer_analysis(models, kinds, datasets);
    for (const auto& n : report.notes) ctx.err << "note: " << n << "\n";
    harness::write_transfer_csv(report, out_path);
    fs::path matrix = out_path;
    matrix.replace_filename(out_path.stem().string() + "_matrix.csv");
    harness::write_transfer_matrix_csv(report, matrix);
    ctx.out << "transfer models=" << models.size() << " cells=" << report.cells.size() << " skipped=" << report.notes.size()
            << " out=" << out_path.string() << " matrix=" << matrix.string() << "\n";
    return kExitOk;
}

int cmd_regime(const Context& ctx, const fs::path& metrics, std::size_t window, std::size_t step, const fs::path& out_path) {
    const auto table = harness::read_csv(metrics);
    std::vector<std::string> names;
    for (const auto& h : table.header) {
        if (h.rfind("eval_mae_", 0) == 0) names.push_back(h.substr(9));
    }
    if (names.empty()) throw IoError(metrics.string() + ": no eval_mae_<task> columns");
    const auto engaged = harness::read_engagements(metrics);
    const auto regime = harness::selection_regime(engaged, names.size(), window, step);
    harness::write_regime_csv(regime, names, out_path);
    ctx.out << "regime windows=" << regime.starts.size() << " window=" << window << " step=" << step
            << " out=" << out_path.string() << "\n";
    return kExitOk;
}

int cmd_plot(const Context& ctx, const fs::path& spec_path) {
    for (const auto& spec : read_plot_spec(spec_path)) {
        write_plot(spec);
        ctx.out << "plot out=" << spec.output.string() << "\n";
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Environment& env) {
    Context ctx{out, err, env};
    CLI::App app{"Interleaved multi-task learning with learning-progress task arbitration"};
    app.name("imtl");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    std::string task, out_str = ".", config_file, mode, data_dir, metrics, spec;
    std::size_t n = 10000, batch = 100, window = 50, step = 10, progress = 0;
    std::uint64_t data_seed = 0;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> configs, checkpoints;

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset CSV");
    gen->add_option("--task", task, "push | hit | stack")->required();
    gen->add_option("--n", n, "Number of samples")->capture_default_str();
    gen->add_option("--seed", data_seed, "Data seed")->required();
    gen->add_option("--batch", batch, "Training batch size the data must cover")->capture_default_str();
    gen->add_option("--out", out_str, "Output CSV path")->required();

    auto* run = app.add_subcommand("run", "Train one configuration (every configured seed)");
    run->add_option("--config", config_file, "Config file")->required();
    run->add_option("--seed", seed, "Run a single seed (overrides IMTL_SEED and the file)");
    run->add_option("--out", out_str, "Output directory")->capture_default_str();
    run->add_option("--progress", progress, "Print a progress line every N epochs (0 = off)");

    auto* compare = app.add_subcommand("compare", "Aggregate several configurations");
    compare->add_option("--configs", configs, "Config files")->required()->expected(1, -1);
    compare->add_option("--seed", seed, "Run a single seed");
    compare->add_option("--out", out_str, "Output directory")->capture_default_str();

    auto* block = app.add_subcommand("block-suite", "BLOCK runs over every task order");
    block->add_option("--config", config_file, "Config file")->required();
    block->add_option("--seed", seed, "Run a single seed");
    block->add_option("--out", out_str, "Output directory")->capture_default_str();

    auto* ablate = app.add_subcommand("ablate", "Train an architecture ablation");
    ablate->add_option("--config", config_file, "Config file")->required();
    ablate->add_option("--mode", mode, "full | no-flag | no-attn | no-both | all")->required();
    ablate->add_option("--seed", seed, "Run a single seed");
    ablate->add_option("--out", out_str, "Output directory")->capture_default_str();

    auto* transfer = app.add_subcommand("transfer", "Attention transfer analysis of trained checkpoints");
    transfer->add_option("--checkpoint", checkpoints, "Checkpoint files (one per seed)")->required()->expected(1, -1);
    transfer->add_option("--data", data_dir, "Directory with <task>.csv datasets")->required();
    transfer->add_option("--out", out_str, "Output CSV path")->required();

    auto* regime = app.add_subcommand("regime", "Windowed task-selection counts of a metrics CSV");
    regime->add_option("--metrics", metrics, "Metrics CSV")->required();
    regime->add_option("--window", window, "Window length")->capture_default_str();
    regime->add_option("--step", step, "Window step")->capture_default_str();
    regime->add_option("--out", out_str, "Output CSV path")->required();

    auto* plot = app.add_subcommand("plot", "Render SVG charts from CSV files");
    plot->add_option("--spec", spec, "Plot spec file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*gen) return cmd_gen_data(ctx, task, n, data_seed, batch, out_str);
        if (*run) return cmd_run(ctx, config_file, seed, out_str, progress);
        if (*compare) return cmd_compare(ctx, configs, seed, out_str);
        if (*block) return cmd_block_suite(ctx, config_file, seed, out_str);
        if (*ablate) return cmd_ablate(ctx, config_file, mode, seed, out_str);
        if (*transfer) return cmd_transfer(ctx, checkpoints, data_dir, out_str);
        if (*regime) return cmd_regime(ctx, metrics, window, step, out_str);
        if (*plot) return cmd_plot(ctx, spec);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        err << "error: run aborted: " << e.what() << "\n";
        return kExitAbort;
    }
    return kExitUsage;
}

}  // namespace imtl::cli
