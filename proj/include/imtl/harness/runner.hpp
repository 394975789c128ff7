#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "imtl/env/experience_cache.hpp"
#include "imtl/harness/metrics.hpp"
#include "imtl/harness/run_config.hpp"
#include "imtl/mtl/model.hpp"

namespace imtl::harness {

/// One multi-task model, or one single-task model per task, plus optimizers.
class Learner {
public:
    Learner(const RunConfig& config, std::uint64_t seed);
    explicit Learner(std::vector<mtl::MultiTaskModel> models, const RunConfig& config);

    std::size_t task_count() const noexcept { return task_count_; }
    mtl::TrainResult train(std::size_t task, const env::Batch& batch);
    mtl::ForwardResult predict(std::size_t task, const nn::Matrix& states, const nn::Matrix& actions) const;
    /// Changes whenever a parameter the task's prediction depends on changes.
    std::uint64_t version(std::size_t task) const;

    std::vector<mtl::MultiTaskModel>& models() noexcept { return models_; }
    const std::vector<mtl::MultiTaskModel>& models() const noexcept { return models_; }
    std::size_t parameter_count() const;

private:
    std::pair<std::size_t, std::size_t> locate(std::size_t task) const;

    std::size_t task_count_ = 0;
    bool single_ = false;
    std::vector<mtl::MultiTaskModel> models_;
    std::vector<nn::OptimizerState> optimizers_;
};

/// Generated (or read) datasets for every task of `config`.
std::vector<env::Dataset> prepare_datasets(const RunConfig& config);

struct RunResult {
    MetricsLog log;
    std::vector<mtl::MultiTaskModel> models;
};

/// Per-epoch hook, e.g. progress printing. Called after the row is appended.
using EpochHook = std::function<void(const EpochRow&)>;

/// Arbitrated training loop. Deterministic given (config, seed, datasets).
/// A NumericError aborts the run; the partial log is returned with a marker.
RunResult run(const RunConfig& config, std::uint64_t seed, const std::vector<env::Dataset>& datasets,
              const EpochHook& hook = {});

/// Runs every seed of `config`, up to config.threads at a time.
std::vector<RunResult> run_seeds(const RunConfig& config, const std::vector<env::Dataset>& datasets);

/// Identity of `config` without seeds or execution settings.
std::string config_id(const RunConfig& config);

}  // namespace imtl::harness
