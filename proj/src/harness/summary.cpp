#include "imtl/harness/summary.hpp"

#include <cstdio>
#include <fstream>

#include "imtl/env/dataset_io.hpp"
#include "imtl/errors.hpp"

namespace imtl::harness {

using nlohmann::json;

json config_json(const RunConfig& c, bool full) {
    json j;
    json tasks = json::array();
    for (auto k : c.tasks) tasks.push_back(env::to_string(k));
    j["run"] = {{"epochs", c.epochs},
                {"batch", c.batch},
                {"learning_rate", c.learning_rate},
                {"weight_decay", c.weight_decay},
                {"data_seed", c.data_seed},
                {"cache_size", c.cache_size},
                {"eval_batch", c.eval_batch},
                {"interactions", c.interactions}};
    if (c.data_dir) j["run"]["data_dir"] = c.data_dir->string();
    json strategy = {{"kind", arbitration::to_string(c.strategy.kind)},
                     {"k", c.strategy.k},
                     {"epsilon", c.strategy.epsilon},
                     {"window", c.strategy.window},
                     {"numeric_floor", c.strategy.numeric_floor},
                     {"order", c.strategy.order}};
    strategy["single_task"] = c.strategy.single_task ? json(*c.strategy.single_task) : json(nullptr);
    j["strategy"] = strategy;
    j["network"] = {{"variant", to_string(c.variant)},
                    {"tier", mtl::to_string(c.tier)},
                    {"use_attention", c.use_attention},
                    {"use_flag", c.use_flag}};
    j["tasks"] = tasks;
    if (full) {
        j["label"] = c.label;
        j["run"]["seeds"] = c.seeds;
        j["run"]["threads"] = c.threads;
    }
    return j;
}

json network_json(const RunConfig& c) {
    const mtl::NetworkSpec n = c.network();
    return {{"variant", mtl::to_string(n.variant)},
            {"tier", mtl::to_string(n.tier)},
            {"width_scale", n.width_scale},
            {"state_dim", n.state_dim},
            {"shared_hidden", n.shared_hidden},
            {"shared_out", n.shared_out},
            {"task_hidden", n.task_hidden},
            {"latent_dim", n.latent_dim},
            {"action_dim", n.action_dim},
            {"decoder_hidden", n.decoder_hidden},
            {"decoder_layers", n.decoder_layers},
            {"heads", n.heads},
            {"use_attention", n.use_attention},
            {"use_flag", n.use_flag},
            {"parameter_count", mtl::parameter_count(n, c.task_specs())}};
}

namespace {

json row_stats(const MetricsLog& log, std::size_t idx) {
    const EpochRow& r = log.rows.at(idx);
    json per_task = json::object();
    for (std::size_t i = 0; i < log.task_names.size(); ++i) per_task[log.task_names[i]] = r.eval_mae[i];
    return {{"epoch", r.epoch},
            {"overall_eval_mae", r.overall()},
            {"eval_mae", per_task},
            {"cumulative_energy", r.cumulative_energy}};
}

}  // namespace

json run_summary(const RunConfig& config, const MetricsLog& log, const std::vector<env::Dataset>& datasets) {
    json j;
    j["format_version"] = kSummaryFormatVersion;
    j["config"] = config_json(config);
    j["seed"] = log.seed;
    json checksums = json::object();
    for (std::size_t i = 0; i < datasets.size() && i < log.task_names.size(); ++i) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(env::dataset_checksum(datasets[i])));
        checksums[log.task_names[i]] = {{"samples", datasets[i].size()}, {"fnv1a64", buf}};
    }
    j["data"] = checksums;
    j["network"] = network_json(config);
    json counts = json::object();
    const auto c = log.engagement_counts();
    for (std::size_t i = 0; i < c.size(); ++i) counts[log.task_names[i]] = c[i];
    j["engagement_counts"] = counts;
    j["epochs_completed"] = log.rows.size();
    j["aborted"] = log.aborted;
    if (log.aborted) j["failure"] = log.failure;
    if (!log.rows.empty()) {
        j["midpoint"] = row_stats(log, log.midpoint_index());
        j["final"] = row_stats(log, log.rows.size() - 1);
    }
    return j;
}

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace imtl::harness
