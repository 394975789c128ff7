#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace imtl::harness {

struct EpochRow {
    std::size_t epoch = 0;
    std::size_t task = 0;  // engaged task
    double train_mse = 0.0;
    double train_mae = 0.0;
    double energy = 0.0;             // activation energy of this engagement
    double cumulative_energy = 0.0;  // sum of `energy` up to and including this epoch
    std::vector<double> eval_mae;    // per task, fixed eval batch
    std::vector<double> lp;
    std::vector<double> ec;
    std::vector<double> score;
    bool warmup = false;
    bool explored = false;
    double wall_ms = 0.0;

    /// Sum over tasks of eval MAE.
    double overall() const;
};

struct MetricsLog {
    std::vector<std::string> task_names;
    std::size_t planned_epochs = 0;
    std::uint64_t seed = 0;
    /// Configuration identity without the seed; aggregation refuses mixed ids.
    std::string config_id;
    std::vector<EpochRow> rows;
    bool aborted = false;
    std::string failure;

    bool complete() const noexcept { return !aborted && rows.size() == planned_epochs; }
    std::vector<std::size_t> engagement_counts() const;
    /// Row index ⌊R/2⌋ (clamped to the last row).
    std::size_t midpoint_index() const;
};

inline constexpr const char* kMetricsFormat = "# imtl-metrics v1";

void write_metrics_csv(const MetricsLog& log, const std::filesystem::path& path);

/// Comment lines (leading '#') and a header, then numeric or text cells.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a column; throws IoError when absent.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
    std::vector<double> numeric(const std::string& name) const;
};

/// Throws IoError (with byte offset) on ragged rows or a missing header.
CsvTable read_csv(const std::filesystem::path& path);

/// Engaged-task column of a metrics CSV.
std::vector<std::size_t> read_engagements(const std::filesystem::path& path);

}  // namespace imtl::harness
