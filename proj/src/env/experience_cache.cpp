#include "imtl/env/experience_cache.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "imtl/errors.hpp"

namespace imtl::env {

void Dataset::append(const Sample& s) {
    if (s.state.size() != spec.state_dim || s.action.size() != spec.action_dim ||
        s.effect.size() != spec.effect_dim) {
        throw ConfigError("sample does not match task '" + spec.name + "'");
    }
    auto grow = [](nn::Matrix& m, const std::vector<double>& row) {
        std::vector<double> values(m.values().begin(), m.values().end());
        values.insert(values.end(), row.begin(), row.end());
        m = nn::Matrix(m.rows() + 1, row.size(), std::move(values));
    };
    grow(states, s.state);
    grow(actions, s.action);
    grow(effects, s.effect);
}

Dataset generate_dataset(TaskKind kind, std::size_t n, std::uint64_t seed) {
    Dataset d;
    d.spec = task_spec(kind);
    Rng rng(seed, streams::kDataBase + static_cast<std::uint64_t>(kind));
    std::vector<double> s, a, e;
    s.reserve(n * d.spec.state_dim);
    a.reserve(n * d.spec.action_dim);
    e.reserve(n * d.spec.effect_dim);
    for (std::size_t i = 0; i < n; ++i) {
        const Sample sample = generate(kind, rng);
        s.insert(s.end(), sample.state.begin(), sample.state.end());
        a.insert(a.end(), sample.action.begin(), sample.action.end());
        e.insert(e.end(), sample.effect.begin(), sample.effect.end());
    }
    d.states = nn::Matrix(n, d.spec.state_dim, std::move(s));
    d.actions = nn::Matrix(n, d.spec.action_dim, std::move(a));
    d.effects = nn::Matrix(n, d.spec.effect_dim, std::move(e));
    return d;
}

std::size_t train_split_size(std::size_t n, double train_fraction) {
    const auto t = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
    return std::min(t, n);
}

Batch gather(const Dataset& data, const std::vector<std::size_t>& rows) {
    Batch b{nn::Matrix(rows.size(), data.spec.state_dim), nn::Matrix(rows.size(), data.spec.action_dim),
            nn::Matrix(rows.size(), data.spec.effect_dim)};
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t src = rows[r];
        std::copy_n(data.states.row(src).begin(), data.spec.state_dim, b.states.row(r).begin());
        std::copy_n(data.actions.row(src).begin(), data.spec.action_dim, b.actions.row(r).begin());
        std::copy_n(data.effects.row(src).begin(), data.spec.effect_dim, b.effects.row(r).begin());
    }
    return b;
}

ExperienceCache::ExperienceCache(Dataset data, CacheOptions options, Rng minibatch_rng)
    : data_(std::move(data)), options_(options), rng_(minibatch_rng) {
    if (options_.batch == 0) throw ConfigError("batch size must be >= 1");
    if (!(options_.train_fraction > 0.0 && options_.train_fraction < 1.0)) {
        throw ConfigError("train fraction must lie in (0, 1)");
    }
    const std::size_t n = data_.size();
    train_size_ = train_split_size(n, options_.train_fraction);
    if (train_size_ < options_.batch) {
        throw ConfigError("task '" + data_.spec.name + "': n must be >= batch (train split has " +
                          std::to_string(train_size_) + " samples, batch is " +
                          std::to_string(options_.batch) + ")");
    }
    if (train_size_ == n) throw ConfigError("task '" + data_.spec.name + "': eval split is empty");
    train_.resize(train_size_);
    std::iota(train_.begin(), train_.end(), std::size_t{0});
    eval_.resize(n - train_size_);
    std::iota(eval_.begin(), eval_.end(), train_size_);
    const std::size_t eval_n = std::min(options_.eval_batch, eval_.size());
    eval_batch_ = gather(data_, std::vector<std::size_t>(eval_.begin(), eval_.begin() + static_cast<std::ptrdiff_t>(eval_n)));
}

Batch ExperienceCache::draw_minibatch() {
    return draw_minibatch(options_.batch);
}

Batch ExperienceCache::draw_minibatch(std::size_t batch) {
    std::vector<std::size_t> rows(batch);
    for (auto& r : rows) r = train_[rng_.index(train_.size())];
    return gather(data_, rows);
}

Batch ExperienceCache::eval_split() const {
    return gather(data_, eval_);
}

}  // namespace imtl::env
