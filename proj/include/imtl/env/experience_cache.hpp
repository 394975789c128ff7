#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "imtl/env/generators.hpp"
#include "imtl/mtl/network_spec.hpp"
#include "imtl/nn/matrix.hpp"
#include "imtl/rng.hpp"

namespace imtl::env {

/// Samples of one task stored column-block-wise.
struct Dataset {
    mtl::TaskSpec spec;
    nn::Matrix states;
    nn::Matrix actions;
    nn::Matrix effects;

    std::size_t size() const noexcept { return states.rows(); }
    void append(const Sample& s);
};

/// n samples of `kind`; a pure function of (kind, seed, n).
Dataset generate_dataset(TaskKind kind, std::size_t n, std::uint64_t seed);

struct Batch {
    nn::Matrix states;
    nn::Matrix actions;
    nn::Matrix effects;
    std::size_t size() const noexcept { return states.rows(); }
};

/// Rows of `data` selected by index.
Batch gather(const Dataset& data, const std::vector<std::size_t>& rows);

/// Size of the leading train split of n samples.
std::size_t train_split_size(std::size_t n, double train_fraction = 0.9);

struct CacheOptions {
    std::size_t batch = 100;
    std::size_t eval_batch = 200;
    double train_fraction = 0.9;
};

/// Fixed store of one task's samples: the first 90% train, the rest evaluate.
/// Mini-batches are drawn uniformly with replacement from the train split.
class ExperienceCache {
public:
    /// Throws ConfigError when the train split is smaller than one batch.
    ExperienceCache(Dataset data, CacheOptions options, Rng minibatch_rng);

    const Dataset& data() const noexcept { return data_; }
    const mtl::TaskSpec& spec() const noexcept { return data_.spec; }
    std::size_t train_size() const noexcept { return train_size_; }
    std::size_t eval_size() const noexcept { return data_.size() - train_size_; }
    const std::vector<std::size_t>& train_indices() const noexcept { return train_; }
    const std::vector<std::size_t>& eval_indices() const noexcept { return eval_; }

    Batch draw_minibatch();
    Batch draw_minibatch(std::size_t batch);
    /// First `eval_batch` samples of the eval split; identical for the whole run.
    const Batch& eval_batch() const noexcept { return eval_batch_; }
    /// The whole eval split.
    Batch eval_split() const;

    Rng& minibatch_rng() noexcept { return rng_; }

private:
    Dataset data_;
    CacheOptions options_;
    std::size_t train_size_ = 0;
    std::vector<std::size_t> train_;
    std::vector<std::size_t> eval_;
    Batch eval_batch_;
    Rng rng_;
};

}  // namespace imtl::env
