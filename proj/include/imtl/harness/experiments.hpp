#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "imtl/env/experience_cache.hpp"
#include "imtl/harness/runner.hpp"

namespace imtl::harness {

/// Mean and sample standard deviation (n-1; 0 for a single value).
struct Stat {
    double mean = 0.0;
    double std = 0.0;
};
Stat stat_of(const std::vector<double>& values);

/// Seed-aggregated curves and midpoint/final summaries of one configuration.
struct Aggregate {
    std::string label;
    std::vector<std::string> task_names;
    std::size_t epochs = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<Stat> overall;                 // per epoch
    std::vector<std::vector<Stat>> task_mae;   // [task][epoch]
    std::vector<Stat> cumulative_energy;       // per epoch
    std::size_t midpoint = 0;
    std::vector<double> midpoint_overall;      // per seed
    std::vector<double> final_overall;         // per seed
    std::vector<double> midpoint_energy;       // per seed
    std::vector<std::vector<double>> midpoint_task_mae;  // [seed][task]
    std::vector<std::vector<std::size_t>> engagement_counts;  // [seed][task]
};

/// Throws ConfigError on an empty set, incomplete runs, or mixed configurations.
Aggregate aggregate(const std::vector<MetricsLog>& logs, const std::string& label);

std::vector<MetricsLog> logs_of(const std::vector<RunResult>& results);

/// Mean over seeds of the across-task variance (n-1) of engagement counts.
double allocation_variance(const Aggregate& agg);

/// One CSV of mean/std overall curves per aggregate, sharing an epoch column.
void write_curves_csv(const std::vector<Aggregate>& aggs, const std::filesystem::path& path);
/// One row per aggregate: midpoint and final overall MAE, per-task midpoint MAE, energy.
void write_midpoint_csv(const std::vector<Aggregate>& aggs, const std::filesystem::path& path);

// ---- blocked training -------------------------------------------------------

struct ForgettingDelta {
    std::size_t boundary = 0;        // index of the finished block
    std::size_t task = 0;            // task of the finished block
    std::size_t end_epoch = 0;       // last epoch of the block
    std::size_t later_epoch = 0;     // end_epoch + R/m, clamped to R-1
    std::vector<double> per_seed;    // eval MAE(later) - eval MAE(end)
    std::size_t seeds_increased() const;
};

struct BlockRun {
    std::vector<std::size_t> order;
    Aggregate aggregate;
    std::vector<ForgettingDelta> forgetting;
};

/// Upper bound on m for the permutation suite (m! runs per seed).
inline constexpr std::size_t kMaxBlockTasks = 5;

std::vector<std::vector<std::size_t>> permutations(std::size_t m);
/// First epoch of each block for R epochs and m tasks.
std::vector<std::size_t> block_starts(std::size_t epochs, std::size_t m);
std::vector<ForgettingDelta> forgetting_deltas(const std::vector<MetricsLog>& logs,
                                               const std::vector<std::size_t>& order);

/// BLOCK runs for every task order over all seeds of `config`.
std::vector<BlockRun> run_block_suite(const RunConfig& config, const std::vector<env::Dataset>& datasets);
void write_forgetting_csv(const std::vector<BlockRun>& runs, const std::vector<std::string>& task_names,
                          const std::filesystem::path& path);

// ---- EMLP sensitivity ----------------------------------------------------------

inline const std::vector<double> kDefaultKs = {0.4, 0.7, 1.0, 1.2};

/// EMLP aggregates for each k, then LP and SINGLE references (in that order).
std::vector<Aggregate> run_k_sweep(const RunConfig& config, const std::vector<env::Dataset>& datasets,
                                   const std::vector<double>& ks = kDefaultKs);

// ---- architecture ablation -------------------------------------------------------

enum class AblationMode { Full, NoFlag, NoAttention, NoBoth };
inline constexpr AblationMode kAblationModes[] = {AblationMode::Full, AblationMode::NoFlag,
                                                  AblationMode::NoAttention, AblationMode::NoBoth};
std::string to_string(AblationMode mode);
AblationMode parse_ablation_mode(const std::string& s);
RunConfig apply_ablation(RunConfig config, AblationMode mode);

// ---- attention transfer ------------------------------------------------------------

/// Eval samples of one task sharing an object (push/hit) or object pair (stack).
struct ObjectGroup {
    std::string label;
    std::vector<std::size_t> rows;  // row indices into the dataset
};
std::vector<ObjectGroup> object_groups(env::TaskKind kind, const env::Dataset& data,
                                       const std::vector<std::size_t>& eval_rows);

struct TransferCell {
    std::size_t target = 0;
    std::size_t source = 0;  // == task count for "no ablation"
    std::string group;
    std::size_t samples = 0;
    std::vector<double> per_seed;  // L_ablate - L_full (MAE)
    Stat delta;
};

struct TransferReport {
    std::vector<std::string> task_names;
    std::vector<TransferCell> cells;
    std::vector<std::string> notes;  // skipped groups

    const TransferCell* find(std::size_t target, std::size_t source, const std::string& group) const;
};

/// ΔL for every (target, source, object group) over the given trained models
/// (one multi-task model per seed), on the eval split of each dataset.
TransferReport run_transfer_analysis(const std::vector<mtl::MultiTaskModel>& models,
                                     const std::vector<env::TaskKind>& kinds,
                                     const std::vector<env::Dataset>& datasets, double train_fraction = 0.9);

/// Long form: one row per cell.
void write_transfer_csv(const TransferReport& report, const std::filesystem::path& path);
/// Matrix form: rows = object group, columns = "source->target" mean and std.
void write_transfer_matrix_csv(const TransferReport& report, const std::filesystem::path& path);

// ---- selection regimes ---------------------------------------------------------------

struct SelectionRegime {
    std::size_t window = 50;
    std::size_t step = 10;
    std::vector<std::size_t> starts;
    std::vector<std::vector<std::size_t>> counts;  // [window][task]
};

SelectionRegime selection_regime(const std::vector<std::size_t>& engaged, std::size_t task_count,
                                 std::size_t window = 50, std::size_t step = 10);
void write_regime_csv(const SelectionRegime& regime, const std::vector<std::string>& task_names,
                      const std::filesystem::path& path);

}  // namespace imtl::harness
