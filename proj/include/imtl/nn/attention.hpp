#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "imtl/nn/forward_cache.hpp"
#include "imtl/nn/matrix.hpp"
#include "imtl/rng.hpp"

namespace imtl::nn {

/// Multi-head scaled dot-product attention without biases.
/// Per head: W_Q, W_K, W_V are model_dim x key_dim. W_O is (heads*key_dim) x model_dim.
struct AttentionBlock {
    std::size_t model_dim = 0;
    std::size_t heads = 1;
    std::size_t key_dim = 0;
    std::vector<Matrix> w_query, w_key, w_value;
    Matrix w_out;

    std::vector<Matrix> grad_query, grad_key, grad_value;
    Matrix grad_out;

    AttentionBlock() = default;
    AttentionBlock(std::size_t model_dim, std::size_t heads, std::size_t key_dim);

    /// Entries uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    static AttentionBlock uniform_init(std::size_t model_dim, std::size_t heads, std::size_t key_dim,
                                       Rng& rng);
    /// All projections identity (requires heads == 1 and key_dim == model_dim).
    static AttentionBlock identity(std::size_t model_dim);

    std::size_t parameter_count() const noexcept;
    void zero_grad();
};

/// Everything the reverse pass needs for one query.
struct AttentionTrace {
    std::vector<double> query;            // d
    Matrix keys, values;                  // m x d
    std::vector<std::vector<double>> q;   // per head, key_dim
    std::vector<Matrix> k, v;             // per head, m x key_dim
    std::vector<std::vector<double>> weights;  // per head, m (softmax rows)
    std::vector<double> concat;           // heads * key_dim
    std::vector<double> output;           // d
};

/// softmax(q K^T / sqrt(d_k)) V per head, concatenated and projected by W_O.
std::vector<double> attention_forward(const AttentionBlock& block, std::span<const double> query,
                                      const Matrix& keys, const Matrix& values,
                                      AttentionTrace* trace = nullptr);
std::vector<double> attention_forward(const AttentionBlock& block, std::span<const double> query,
                                      const Matrix& keys, const Matrix& values, ForwardCache& cache,
                                      std::string layer_id, AttentionTrace* trace = nullptr);

struct AttentionInputGrads {
    std::vector<double> query;  // d
    Matrix keys, values;        // m x d
};

AttentionInputGrads attention_backward(AttentionBlock& block, const AttentionTrace& trace,
                                       std::span<const double> grad_output, bool accumulate);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace imtl::nn
