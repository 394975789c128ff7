#include "imtl/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "imtl/env/objects.hpp"
#include "imtl/errors.hpp"

namespace imtl::harness {

Stat stat_of(const std::vector<double>& values) {
    Stat s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / (n - 1.0));
    }
    return s;
}

std::vector<MetricsLog> logs_of(const std::vector<RunResult>& results) {
    std::vector<MetricsLog> out;
    out.reserve(results.size());
    for (const auto& r : results) out.push_back(r.log);
    return out;
}

Aggregate aggregate(const std::vector<MetricsLog>& logs, const std::string& label) {
    if (logs.empty()) throw ConfigError("aggregate '" + label + "' needs at least one run");
    const MetricsLog& first = logs.front();
    for (const auto& l : logs) {
        if (!l.complete()) {
            throw ConfigError("aggregate '" + label + "': run with seed " + std::to_string(l.seed) + " is incomplete");
        }
        if (l.config_id != first.config_id || l.task_names != first.task_names ||
            l.planned_epochs != first.planned_epochs) {
            throw ConfigError("aggregate '" + label + "' mixes different configurations");
        }
    }
    Aggregate a;
    a.label = label;
    a.task_names = first.task_names;
    a.epochs = first.planned_epochs;
    a.midpoint = first.midpoint_index();
    const std::size_t m = a.task_names.size();
    a.task_mae.assign(m, {});
    std::vector<double> buf(logs.size());
    for (std::size_t e = 0; e < a.epochs; ++e) {
        for (std::size_t s = 0; s < logs.size(); ++s) buf[s] = logs[s].rows[e].overall();
        a.overall.push_back(stat_of(buf));
        for (std::size_t s = 0; s < logs.size(); ++s) buf[s] = logs[s].rows[e].cumulative_energy;
        a.cumulative_energy.push_back(stat_of(buf));
        for (std::size_t t = 0; t < m; ++t) {
            for (std::size_t s = 0; s < logs.size(); ++s) buf[s] = logs[s].rows[e].eval_mae[t];
            a.task_mae[t].push_back(stat_of(buf));
        }
    }
    for (const auto& l : logs) {
        a.seeds.push_back(l.seed);
        const EpochRow& mid = l.rows[a.midpoint];
        a.midpoint_overall.push_back(mid.overall());
        a.midpoint_energy.push_back(mid.cumulative_energy);
        a.midpoint_task_mae.push_back(mid.eval_mae);
        a.final_overall.push_back(l.rows.back().overall());
        a.engagement_counts.push_back(l.engagement_counts());
    }
    return a;
}

double allocation_variance(const Aggregate& agg) {
    std::vector<double> per_seed;
    for (const auto& counts : agg.engagement_counts) {
        std::vector<double> c(counts.begin(), counts.end());
        const Stat s = stat_of(c);
        per_seed.push_back(s.std * s.std);
    }
    return stat_of(per_seed).mean;
}

namespace {

std::FILE* open_out(const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    return f;
}

void close_out(std::FILE* f, const std::filesystem::path& path) {
    if (std::fclose(f) != 0) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace

void write_curves_csv(const std::vector<Aggregate>& aggs, const std::filesystem::path& path) {
    if (aggs.empty()) throw ConfigError("nothing to write");
    for (const auto& a : aggs) {
        if (a.epochs != aggs.front().epochs) throw ConfigError("aggregates have different epoch counts");
    }
    std::FILE* f = open_out(path);
    std::fprintf(f, "# imtl-curves v1\n");
    std::fprintf(f, "epoch");
    for (const auto& a : aggs) {
        std::fprintf(f, ",%s_mean,%s_std", a.label.c_str(), a.label.c_str());
        for (const auto& t : a.task_names) std::fprintf(f, ",%s_%s_mean,%s_%s_std", a.label.c_str(), t.c_str(), a.label.c_str(), t.c_str());
        std::fprintf(f, ",%s_energy_mean,%s_energy_std", a.label.c_str(), a.label.c_str());
    }
    std::fprintf(f, "\n");
    for (std::size_t e = 0; e < aggs.front().epochs; ++e) {
        std::fprintf(f, "%zu", e);
        for (const auto& a : aggs) {
            std::fprintf(f, ",%.10g,%.10g", a.overall[e].mean, a.overall[e].std);
            for (const auto& tm : a.task_mae) std::fprintf(f, ",%.10g,%.10g", tm[e].mean, tm[e].std);
            std::fprintf(f, ",%.10g,%.10g", a.cumulative_energy[e].mean, a.cumulative_energy[e].std);
        }
        std::fprintf(f, "\n");
    }
    close_out(f, path);
}

void write_midpoint_csv(const std::vector<Aggregate>& aggs, const std::filesystem::path& path) {
    if (aggs.empty()) throw ConfigError("nothing to write");
    std::FILE* f = open_out(path);
    std::fprintf(f, "# imtl-midpoint v1\n");
    std::fprintf(f, "label,seeds,midpoint_epoch,midpoint_mae_mean,midpoint_mae_std,final_mae_mean,final_mae_std,"
                    "midpoint_energy_mean,midpoint_energy_std,allocation_variance");
    for (const auto& t : aggs.front().task_names) std::fprintf(f, ",%s_midpoint_mean,%s_midpoint_std", t.c_str(), t.c_str());
    std::fprintf(f, "\n");
    for (const auto& a : aggs) {
        const Stat mid = stat_of(a.midpoint_overall);
        const Stat fin = stat_of(a.final_overall);
        const Stat en = stat_of(a.midpoint_energy);
        std::fprintf(f, "%s,%zu,%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g", a.label.c_str(), a.seeds.size(),
                     a.midpoint, mid.mean, mid.std, fin.mean, fin.std, en.mean, en.std, allocation_variance(a));
        for (std::size_t t = 0; t < a.task_names.size(); ++t) {
            std::vector<double> v;
            for (const auto& s : a.midpoint_task_mae) v.push_back(s[t]);
            const Stat st = stat_of(v);
            std::fprintf(f, ",%.10g,%.10g", st.mean, st.std);
        }
        std::fprintf(f, "\n");
    }
    close_out(f, path);
}

// ---- blocked training -------------------------------------------------------

std::size_t ForgettingDelta::seeds_increased() const {
    return static_cast<std::size_t>(std::count_if(per_seed.begin(), per_seed.end(), [](double d) { return d > 0.0; }));
}

std::vector<std::vector<std::size_t>> permutations(std::size_t m) {
    if (m == 0) throw ConfigError("empty task set");
    if (m > kMaxBlockTasks) {
        throw ConfigError("block suite supports at most " + std::to_string(kMaxBlockTasks) + " tasks (" +
                          std::to_string(m) + "! orders requested)");
    }
    std::vector<std::size_t> p(m);
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

std::vector<std::size_t> block_starts(std::size_t epochs, std::size_t m) {
    std::vector<std::size_t> starts;
    std::size_t prev = m;
    for (std::size_t e = 0; e < epochs; ++e) {
        const std::size_t b = std::min(m - 1, e * m / epochs);
        if (b != prev) {
            starts.push_back(e);
            prev = b;
        }
    }
    return starts;
}

std::vector<ForgettingDelta> forgetting_deltas(const std::vector<MetricsLog>& logs,
                                               const std::vector<std::size_t>& order) {
    if (logs.empty()) return {};
    const std::size_t R = logs.front().planned_epochs;
    const std::size_t m = order.size();
    const auto starts = block_starts(R, m);
    std::vector<ForgettingDelta> out;
    for (std::size_t b = 0; b + 1 < starts.size(); ++b) {
        ForgettingDelta d;
        d.boundary = b;
        d.task = order[b];
        d.end_epoch = starts[b + 1] - 1;
        d.later_epoch = std::min(R - 1, d.end_epoch + R / m);
        for (const auto& l : logs) {
            if (!l.complete()) throw ConfigError("forgetting deltas need complete runs");
            d.per_seed.push_back(l.rows[d.later_epoch].eval_mae[d.task] - l.rows[d.end_epoch].eval_mae[d.task]);
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<BlockRun> run_block_suite(const RunConfig& config, const std::vector<env::Dataset>& datasets) {
    std::vector<BlockRun> out;
    for (const auto& order : permutations(config.tasks.size())) {
        RunConfig c = config;
        c.strategy.kind = arbitration::StrategyKind::Block;
        c.strategy.order = order;
        c.label = default_label(c);
        const auto logs = logs_of(run_seeds(c, datasets));
        out.push_back({order, aggregate(logs, c.label), forgetting_deltas(logs, order)});
    }
    return out;
}

void write_forgetting_csv(const std::vector<BlockRun>& runs, const std::vector<std::string>& task_names,
                          const std::filesystem::path& path) {
    std::FILE* f = open_out(path);
    std::fprintf(f, "# imtl-forgetting v1\n");
    std::fprintf(f, "order,boundary,task,end_epoch,later_epoch,delta_mean,delta_std,seeds_increased,seeds\n");
    for (const auto& r : runs) {
        std::string order;
        for (auto t : r.order) order += (order.empty() ? "" : "-") + task_names.at(t);
        for (const auto& d : r.forgetting) {
            const Stat s = stat_of(d.per_seed);
            std::fprintf(f, "%s,%zu,%s,%zu,%zu,%.10g,%.10g,%zu,%zu\n", order.c_str(), d.boundary,
                         task_names.at(d.task).c_str(), d.end_epoch, d.later_epoch, s.mean, s.std,
                         d.seeds_increased(), d.per_seed.size());
        }
    }
    close_out(f, path);
}

// ---- EMLP sensitivity ----------------------------------------------------------

std::vector<Aggregate> run_k_sweep(const RunConfig& config, const std::vector<env::Dataset>& datasets,
                                   const std::vector<double>& ks) {
    std::vector<RunConfig> configs;
    for (double k : ks) {
        RunConfig c = config;
        c.strategy.kind = arbitration::StrategyKind::EMLP;
        c.strategy.k = k;
        configs.push_back(c);
    }
    RunConfig lp = config;
    lp.strategy.kind = arbitration::StrategyKind::LP;
    configs.push_back(lp);
    RunConfig single = config;
    single.strategy.kind = arbitration::StrategyKind::Single;
    single.strategy.single_task.reset();
    configs.push_back(single);

    std::vector<Aggregate> out;
    for (auto& c : configs) {
        c.label = default_label(c);
        out.push_back(aggregate(logs_of(run_seeds(c, datasets)), c.label));
    }
    return out;
}

// ---- architecture ablation -------------------------------------------------------

std::string to_string(AblationMode mode) {
    switch (mode) {
        case AblationMode::Full: return "full";
        case AblationMode::NoFlag: return "no-flag";
        case AblationMode::NoAttention: return "no-attn";
        case AblationMode::NoBoth: return "no-both";
    }
    return "full";
}

AblationMode parse_ablation_mode(const std::string& s) {
    for (auto m : kAblationModes) {
        if (to_string(m) == s) return m;
    }
    throw ConfigError("unknown ablation mode '" + s + "' (expected full|no-flag|no-attn|no-both)");
}

RunConfig apply_ablation(RunConfig config, AblationMode mode) {
    config.use_attention = mode == AblationMode::Full || mode == AblationMode::NoFlag;
    config.use_flag = mode == AblationMode::Full || mode == AblationMode::NoAttention;
    config.label = default_label(config);
    return config;
}

// ---- attention transfer ------------------------------------------------------------

std::vector<ObjectGroup> object_groups(env::TaskKind kind, const env::Dataset& data,
                                       const std::vector<std::size_t>& eval_rows) {
    std::map<std::size_t, std::vector<std::size_t>> by_key;
    for (std::size_t r : eval_rows) {
        const auto action = data.actions.row(r);
        std::size_t key = 0;
        if (kind == env::TaskKind::Stack) {
            const auto [p, t] = env::object_pair(action);
            key = p * env::kObjects.size() + t;
        } else {
            key = env::single_object(action);
        }
        by_key[key].push_back(r);
    }
    std::vector<ObjectGroup> out;
    const std::size_t n = env::kObjects.size();
    const std::size_t keys = kind == env::TaskKind::Stack ? n * n : n;
    for (std::size_t key = 0; key < keys; ++key) {
        ObjectGroup g;
        g.label = kind == env::TaskKind::Stack
                      ? std::string(env::kObjects[key / n].name) + "/" + std::string(env::kObjects[key % n].name)
                      : std::string(env::kObjects[key].name);
        auto it = by_key.find(key);
        if (it != by_key.end()) g.rows = it->second;
        out.push_back(std::move(g));
    }
    return out;
}

const TransferCell* TransferReport::find(std::size_t target, std::size_t source, const std::string& group) const {
    for (const auto& c : cells) {
        if (c.target == target && c.source == source && c.group == group) return &c;
    }
    return nullptr;
}

TransferReport run_transfer_analysis(const std::vector<mtl::MultiTaskModel>& models,
                                     const std::vector<env::TaskKind>& kinds,
                                     const std::vector<env::Dataset>& datasets, double train_fraction) {
    if (models.empty()) throw ConfigError("transfer analysis needs at least one trained model");
    const std::size_t m = kinds.size();
    if (datasets.size() != m) throw ConfigError("dataset count does not match task count");
    for (const auto& model : models) {
        if (model.network().variant != mtl::Variant::MultiTask || !model.network().use_attention) {
            throw ConfigError("transfer analysis needs multi-task models with attention");
        }
        if (model.task_count() != m) throw ConfigError("checkpoint task count does not match the data");
        for (std::size_t t = 0; t < m; ++t) {
            if (!(model.task(t) == env::task_spec(kinds[t]))) {
                throw ConfigError("checkpoint task " + std::to_string(t) + " does not match '" +
                                  env::to_string(kinds[t]) + "'");
            }
        }
    }

    TransferReport report;
    for (auto k : kinds) report.task_names.push_back(env::to_string(k));
    for (std::size_t t = 0; t < m; ++t) {
        const env::Dataset& data = datasets[t];
        const std::size_t start = env::train_split_size(data.size(), train_fraction);
        std::vector<std::size_t> eval_rows(data.size() - start);
        std::iota(eval_rows.begin(), eval_rows.end(), start);
        for (const auto& g : object_groups(kinds[t], data, eval_rows)) {
            if (g.rows.empty()) {
                report.notes.push_back(report.task_names[t] + " group '" + g.label + "' has no eval samples; skipped");
                continue;
            }
            const env::Batch b = env::gather(data, g.rows);
            std::vector<TransferCell> cells(m + 1);
            for (std::size_t s = 0; s <= m; ++s) {
                cells[s].target = t;
                cells[s].source = s;
                cells[s].group = g.label;
                cells[s].samples = g.rows.size();
            }
            for (const auto& model : models) {
                const double full = mtl::batch_loss(model.forward(t, b.states, b.actions).prediction, b.effects).mae;
                for (std::size_t s = 0; s < m; ++s) {
                    const auto abl = mtl::forward_transfer_ablated(model, t, s, b.states, b.actions);
                    cells[s].per_seed.push_back(mtl::batch_loss(abl.prediction, b.effects).mae - full);
                }
                const double again = mtl::batch_loss(model.forward(t, b.states, b.actions).prediction, b.effects).mae;
                cells[m].per_seed.push_back(again - full);
            }
            for (auto& c : cells) {
                c.delta = stat_of(c.per_seed);
                report.cells.push_back(std::move(c));
            }
        }
    }
    return report;
}

namespace {

std::string source_name(const TransferReport& r, std::size_t s) {
    return s < r.task_names.size() ? r.task_names[s] : std::string("none");
}

}  // namespace

void write_transfer_csv(const TransferReport& report, const std::filesystem::path& path) {
    std::FILE* f = open_out(path);
    std::fprintf(f, "# imtl-transfer v1\n");
    for (const auto& n : report.notes) std::fprintf(f, "# %s\n", n.c_str());
    std::fprintf(f, "target,source,group,samples,seeds,delta_mean,delta_std\n");
    for (const auto& c : report.cells) {
        std::fprintf(f, "%s,%s,%s,%zu,%zu,%.10g,%.10g\n", report.task_names[c.target].c_str(),
                     source_name(report, c.source).c_str(), c.group.c_str(), c.samples, c.per_seed.size(),
                     c.delta.mean, c.delta.std);
    }
    close_out(f, path);
}

void write_transfer_matrix_csv(const TransferReport& report, const std::filesystem::path& path) {
    const std::size_t m = report.task_names.size();
    std::vector<std::string> groups;
    for (const auto& c : report.cells) {
        if (std::find(groups.begin(), groups.end(), c.group) == groups.end()) groups.push_back(c.group);
    }
    std::FILE* f = open_out(path);
    std::fprintf(f, "# imtl-transfer-matrix v1\n");
    std::fprintf(f, "group");
    for (std::size_t t = 0; t < m; ++t) {
        for (std::size_t s = 0; s < m; ++s) {
            if (s == t) continue;
            const std::string col = report.task_names[s] + "->" + report.task_names[t];
            std::fprintf(f, ",%s_mean,%s_std", col.c_str(), col.c_str());
        }
    }
    std::fprintf(f, "\n");
    for (const auto& g : groups) {
        std::fprintf(f, "%s", g.c_str());
        for (std::size_t t = 0; t < m; ++t) {
            for (std::size_t s = 0; s < m; ++s) {
                if (s == t) continue;
                if (const TransferCell* c = report.find(t, s, g)) {
                    std::fprintf(f, ",%.10g,%.10g", c->delta.mean, c->delta.std);
                } else {
                    std::fprintf(f, ",,");
                }
            }
        }
        std::fprintf(f, "\n");
    }
    close_out(f, path);
}

// ---- selection regimes ---------------------------------------------------------------

SelectionRegime selection_regime(const std::vector<std::size_t>& engaged, std::size_t task_count,
                                 std::size_t window, std::size_t step) {
    if (window == 0 || step == 0) throw ConfigError("window and step must be >= 1");
    SelectionRegime r;
    r.window = window;
    r.step = step;
    // Prefix counts per task.
    std::vector<std::vector<std::size_t>> prefix(task_count, std::vector<std::size_t>(engaged.size() + 1, 0));
    for (std::size_t e = 0; e < engaged.size(); ++e) {
        if (engaged[e] >= task_count) throw ConfigError("engaged task index out of range");
        for (std::size_t t = 0; t < task_count; ++t) prefix[t][e + 1] = prefix[t][e] + (engaged[e] == t ? 1 : 0);
    }
    for (std::size_t start = 0; start + window <= engaged.size(); start += step) {
        r.starts.push_back(start);
        std::vector<std::size_t> c(task_count);
        for (std::size_t t = 0; t < task_count; ++t) c[t] = prefix[t][start + window] - prefix[t][start];
        r.counts.push_back(std::move(c));
    }
    return r;
}

void write_regime_csv(const SelectionRegime& regime, const std::vector<std::string>& task_names,
                      const std::filesystem::path& path) {
    std::FILE* f = open_out(path);
    std::fprintf(f, "# imtl-regime v1 window=%zu step=%zu\n", regime.window, regime.step);
    std::fprintf(f, "start");
    for (const auto& n : task_names) std::fprintf(f, ",%s", n.c_str());
    std::fprintf(f, "\n");
    for (std::size_t w = 0; w < regime.starts.size(); ++w) {
        std::fprintf(f, "%zu", regime.starts[w]);
        for (auto c : regime.counts[w]) std::fprintf(f, ",%zu", c);
        std::fprintf(f, "\n");
    }
    close_out(f, path);
}

}  // namespace imtl::harness
