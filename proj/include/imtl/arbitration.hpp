#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imtl/rng.hpp"

namespace imtl::arbitration {

enum class StrategyKind { LP, EMLP, Rand, Block, Single };

std::string to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(const std::string& s);

struct StrategyConfig {
    StrategyKind kind = StrategyKind::LP;
    double k = 1.0;                          // EMLP sensitivity
    std::vector<std::size_t> order;          // BLOCK task order (empty = identity)
    std::optional<std::size_t> single_task;  // SINGLE: fixed task; unset = round-robin
    double epsilon = 0.1;
    std::size_t window = 5;  // L
    double numeric_floor = 1e-6;

    /// Throws ConfigError for out-of-range values given m tasks.
    void validate(std::size_t task_count) const;
};

/// Last `capacity` values with the global step at which each was recorded.
class History {
public:
    explicit History(std::size_t capacity = 5);

    void push(double value, std::size_t step);
    std::size_t size() const noexcept { return values_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    /// Oldest first.
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<std::size_t>& steps() const noexcept { return steps_; }
    double sum() const;

private:
    std::size_t capacity_;
    std::vector<double> values_;
    std::vector<std::size_t> steps_;
};

/// Least-squares slope against t = 0, 1, ..., n-1; nullopt for fewer than two values.
std::optional<double> slope(std::span<const double> errors);
/// |slope| when the slope is negative, else 0; nullopt for fewer than two values.
std::optional<double> learning_progress(std::span<const double> errors);
/// Sum of buffered energies.
double energy_consumption(const History& energies);
/// (v - min) / (max - min); all 0.5 when max == min.
std::vector<double> minmax_scale(std::span<const double> values);
/// exp(k * lp) / max(ec, floor). Throws ConfigError for k <= 0.
std::vector<double> emlp_scores(std::span<const double> lp_scaled, std::span<const double> ec_scaled,
                                double k, double numeric_floor = 1e-6);

/// Argmax with uniformly random tie-breaking, then with probability epsilon a
/// uniform pick among the other tasks. Sets `explored` when exploration fired.
std::size_t epsilon_greedy(std::span<const double> scores, double epsilon, Rng& rng, bool* explored = nullptr);

struct Decision {
    std::size_t task = 0;
    std::vector<double> lp;     // per task, 0 when undefined
    std::vector<double> ec;     // per task
    std::vector<double> score;  // per task, kind-dependent
    bool warmup = false;
    bool explored = false;
};

/// Per-task error and energy windows, epoch counter and the selection stream.
class ArbitrationState {
public:
    ArbitrationState(std::size_t task_count, std::size_t window, Rng rng);

    std::size_t task_count() const noexcept { return errors_.size(); }
    std::size_t epoch() const noexcept { return epoch_; }
    const History& errors(std::size_t task) const { return errors_.at(task); }
    const History& energies(std::size_t task) const { return energies_.at(task); }

    /// Appends one engagement's error and energy to the task's windows.
    void record(std::size_t task, double error, double energy);

    Rng& rng() noexcept { return rng_; }
    void advance() noexcept { ++epoch_; }

private:
    std::vector<History> errors_;
    std::vector<History> energies_;
    std::size_t epoch_ = 0;
    Rng rng_;
};

/// Chooses the task for the current epoch and advances the epoch counter.
/// LP/EMLP run m*L round-robin warm-up epochs before scoring starts.
Decision select_task(ArbitrationState& state, const StrategyConfig& strategy, std::size_t total_epochs);

}  // namespace imtl::arbitration
