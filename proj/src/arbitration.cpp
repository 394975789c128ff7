#include "imtl/arbitration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "imtl/errors.hpp"

namespace imtl::arbitration {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::LP: return "lp";
        case StrategyKind::EMLP: return "emlp";
        case StrategyKind::Rand: return "rand";
        case StrategyKind::Block: return "block";
        case StrategyKind::Single: return "single";
    }
    return "lp";
}

StrategyKind parse_strategy_kind(const std::string& s) {
    if (s == "lp") return StrategyKind::LP;
    if (s == "emlp") return StrategyKind::EMLP;
    if (s == "rand") return StrategyKind::Rand;
    if (s == "block") return StrategyKind::Block;
    if (s == "single") return StrategyKind::Single;
    throw ConfigError("unknown strategy '" + s + "' (expected lp|emlp|rand|block|single)");
}

void StrategyConfig::validate(std::size_t task_count) const {
    if (task_count == 0) throw ConfigError("empty task set");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (window < 2) throw ConfigError("LP window must hold at least 2 values");
    if (!(numeric_floor > 0.0)) throw ConfigError("numeric floor must be > 0");
    if (kind == StrategyKind::EMLP && !(k > 0.0)) throw ConfigError("EMLP k must be > 0");
    if (kind == StrategyKind::Block && !order.empty()) {
        std::vector<std::size_t> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted.size() != task_count || sorted[i] != i) {
                throw ConfigError("block order must be a permutation of the tasks");
            }
        }
    }
    if (kind == StrategyKind::Single && single_task && *single_task >= task_count) {
        throw ConfigError("single task index out of range");
    }
}

History::History(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("history capacity must be >= 1");
}

void History::push(double value, std::size_t step) {
    if (values_.size() == capacity_) {
        values_.erase(values_.begin());
        steps_.erase(steps_.begin());
    }
    values_.push_back(value);
    steps_.push_back(step);
}

double History::sum() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

std::optional<double> slope(std::span<const double> errors) {
    const std::size_t n = errors.size();
    if (n < 2) return std::nullopt;
    const double t_mean = static_cast<double>(n - 1) / 2.0;
    const double y_mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double dt = static_cast<double>(t) - t_mean;
        sxy += dt * (errors[t] - y_mean);
        sxx += dt * dt;
    }
    return sxy / sxx;
}

std::optional<double> learning_progress(std::span<const double> errors) {
    const auto beta = slope(errors);
    if (!beta) return std::nullopt;
    return *beta < 0.0 ? -*beta : 0.0;
}

double energy_consumption(const History& energies) {
    return energies.sum();
}

std::vector<double> minmax_scale(std::span<const double> values) {
    std::vector<double> out(values.size(), 0.5);
    if (values.empty()) return out;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double range = *hi - *lo;
    if (range == 0.0) return out;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
    return out;
}

std::vector<double> emlp_scores(std::span<const double> lp_scaled, std::span<const double> ec_scaled,
                                double k, double numeric_floor) {
    if (!(k > 0.0)) throw ConfigError("EMLP k must be > 0");
    if (lp_scaled.size() != ec_scaled.size()) throw ConfigError("LP and EC must cover the same tasks");
    std::vector<double> s(lp_scaled.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = std::exp(k * lp_scaled[i]) / std::max(ec_scaled[i], numeric_floor);
    }
    return s;
}

std::size_t epsilon_greedy(std::span<const double> scores, double epsilon, Rng& rng, bool* explored) {
    const std::size_t m = scores.size();
    if (m == 0) throw ConfigError("empty task set");
    const double best = *std::max_element(scores.begin(), scores.end());
    std::vector<std::size_t> ties;
    for (std::size_t i = 0; i < m; ++i) {
        if (scores[i] == best) ties.push_back(i);
    }
    const std::size_t argmax = ties.size() == 1 ? ties.front() : ties[rng.index(ties.size())];
    const double r = rng.uniform();
    if (explored) *explored = false;
    if (r < epsilon && m > 1) {
        std::size_t pick = rng.index(m - 1);
        if (pick >= argmax) ++pick;
        if (explored) *explored = true;
        return pick;
    }
    return argmax;
}

ArbitrationState::ArbitrationState(std::size_t task_count, std::size_t window, Rng rng)
    : errors_(task_count, History(window)), energies_(task_count, History(window)), rng_(rng) {
    if (task_count == 0) throw ConfigError("empty task set");
}

void ArbitrationState::record(std::size_t task, double error, double energy) {
    errors_.at(task).push(error, epoch_);
    energies_.at(task).push(energy, epoch_);
}

Decision select_task(ArbitrationState& state, const StrategyConfig& strategy, std::size_t total_epochs) {
    const std::size_t m = state.task_count();
    strategy.validate(m);
    const std::size_t epoch = state.epoch();

    Decision d;
    d.lp.assign(m, 0.0);
    d.ec.assign(m, 0.0);
    d.score.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        d.lp[i] = learning_progress(state.errors(i).values()).value_or(0.0);
        d.ec[i] = energy_consumption(state.energies(i));
    }

    switch (strategy.kind) {
        case StrategyKind::LP:
        case StrategyKind::EMLP: {
            if (epoch < m * strategy.window) {
                d.warmup = true;
                d.task = epoch % m;
                break;
            }
            if (strategy.kind == StrategyKind::LP) {
                d.score = d.lp;
            } else {
                d.score = emlp_scores(minmax_scale(d.lp), minmax_scale(d.ec), strategy.k, strategy.numeric_floor);
            }
            d.task = epsilon_greedy(d.score, strategy.epsilon, state.rng(), &d.explored);
            break;
        }
        case StrategyKind::Rand:
            d.task = state.rng().index(m);
            break;
        case StrategyKind::Block: {
            if (total_epochs == 0) throw ConfigError("block schedule needs R > 0");
            const std::size_t slot = std::min(m - 1, epoch * m / total_epochs);
            d.task = strategy.order.empty() ? slot : strategy.order[slot];
            break;
        }
        case StrategyKind::Single:
            d.task = strategy.single_task ? *strategy.single_task : epoch % m;
            break;
    }
    state.advance();
    return d;
}

}  // namespace imtl::arbitration
