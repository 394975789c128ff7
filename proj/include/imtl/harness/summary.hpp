#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"

#include "imtl/env/experience_cache.hpp"
#include "imtl/harness/metrics.hpp"
#include "imtl/harness/run_config.hpp"

namespace imtl::harness {

inline constexpr int kSummaryFormatVersion = 1;

/// Effective configuration; seeds and execution settings only when `full`.
nlohmann::json config_json(const RunConfig& config, bool full = true);

/// Network widths and parameter count of the configured learner.
nlohmann::json network_json(const RunConfig& config);

/// Config echo, data checksums, engagement counts, midpoint and final statistics.
nlohmann::json run_summary(const RunConfig& config, const MetricsLog& log, const std::vector<env::Dataset>& datasets);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace imtl::harness
