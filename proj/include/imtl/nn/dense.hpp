#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "imtl/nn/forward_cache.hpp"
#include "imtl/nn/matrix.hpp"
#include "imtl/rng.hpp"

namespace imtl::nn {

enum class Activation { ReLU, Identity };

/// Fully connected layer y = act(x W^T + b), weight is out x in.
struct DenseLayer {
    Matrix weight;
    std::vector<double> bias;
    Activation activation = Activation::Identity;

    Matrix grad_weight;
    std::vector<double> grad_bias;

    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out, Activation act);

    /// Weights and biases uniform in [-1/sqrt(in), 1/sqrt(in)].
    static DenseLayer uniform_init(std::size_t in, std::size_t out, Activation act, Rng& rng);

    std::size_t in_dim() const noexcept { return weight.cols(); }
    std::size_t out_dim() const noexcept { return weight.rows(); }
    std::size_t parameter_count() const noexcept { return weight.size() + bias.size(); }
    void zero_grad();
};

Matrix dense_forward(const DenseLayer& layer, const Matrix& input);
Matrix dense_forward(const DenseLayer& layer, const Matrix& input, ForwardCache& cache,
                     std::string layer_id);

/// Reverse pass of one dense layer. `output` is the cached post-activation.
/// Parameter gradients are accumulated when `accumulate` is set; the input
/// gradient is returned when `want_input_grad` is set (empty matrix otherwise).
Matrix dense_backward(DenseLayer& layer, const Matrix& input, const Matrix& output,
                      const Matrix& grad_output, bool accumulate, bool want_input_grad);

}  // namespace imtl::nn
