#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "imtl/arbitration.hpp"
#include "imtl/env/generators.hpp"
#include "imtl/mtl/network_spec.hpp"

namespace imtl::harness {

/// Which network family a run trains.
enum class VariantChoice { Auto, MultiTask, SingleTask };

std::string to_string(VariantChoice v);
VariantChoice parse_variant(const std::string& s);

struct RunConfig {
    std::string label;
    arbitration::StrategyConfig strategy;
    std::size_t epochs = 3000;
    std::size_t batch = 100;
    double learning_rate = 1e-4;
    double weight_decay = 1e-2;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::uint64_t data_seed = 2024;
    std::size_t cache_size = 10000;
    std::size_t eval_batch = 200;
    /// Samples per engagement; a multiple of `batch`, one step per batch.
    std::size_t interactions = 100;

    /// Auto: single-task networks for the SINGLE strategy, multi-task otherwise.
    VariantChoice variant = VariantChoice::Auto;
    mtl::Tier tier = mtl::Tier::PaperDefault;
    bool use_attention = true;
    bool use_flag = true;

    std::vector<env::TaskKind> tasks = {env::TaskKind::Push, env::TaskKind::Hit, env::TaskKind::Stack};
    /// When set, datasets are read from <data_dir>/<task>.csv instead of generated.
    std::optional<std::filesystem::path> data_dir;

    /// Runs executed concurrently by the multi-seed drivers (0 = hardware).
    std::size_t threads = 0;

    mtl::Variant resolved_variant() const;
    std::vector<mtl::TaskSpec> task_specs() const;
    /// Network widths after applying tier, variant and ablation flags.
    mtl::NetworkSpec network() const;
    std::size_t steps_per_engagement() const { return interactions / batch; }

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

/// Short name for logs and CSV columns, e.g. "lp", "emlp-k1", "block-2-0-1".
std::string default_label(const RunConfig& config);

}  // namespace imtl::harness
