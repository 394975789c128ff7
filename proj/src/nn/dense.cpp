#include "imtl/nn/dense.hpp"

#include <cmath>
#include <string>

#include "imtl/errors.hpp"

namespace imtl::nn {

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act)
    : weight(out, in), bias(out, 0.0), activation(act), grad_weight(out, in), grad_bias(out, 0.0) {
    if (in == 0 || out == 0) throw ConfigError("dense layer dims must be >= 1");
}

DenseLayer DenseLayer::uniform_init(std::size_t in, std::size_t out, Activation act, Rng& rng) {
    DenseLayer layer(in, out, act);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    return layer;
}

void DenseLayer::zero_grad() {
    grad_weight.fill(0.0);
    std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& input) {
    const std::size_t in = layer.in_dim();
    const std::size_t out = layer.out_dim();
    if (input.cols() != in) {
        throw ConfigError("dense input has " + std::to_string(input.cols()) + " columns, layer expects " +
                          std::to_string(in));
    }
    Matrix y(input.rows(), out);
    const bool relu = layer.activation == Activation::ReLU;
    for (std::size_t b = 0; b < input.rows(); ++b) {
        const auto x = input.row(b);
        auto yr = y.row(b);
        for (std::size_t o = 0; o < out; ++o) {
            const auto w = layer.weight.row(o);
            double acc = layer.bias[o];
            for (std::size_t i = 0; i < in; ++i) acc += x[i] * w[i];
            yr[o] = (relu && acc < 0.0) ? 0.0 : acc;
        }
    }
    return y;
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& input, ForwardCache& cache,
                     std::string layer_id) {
    Matrix y = dense_forward(layer, input);
    cache.append(std::move(layer_id), y);
    return y;
}

Matrix dense_backward(DenseLayer& layer, const Matrix& input, const Matrix& output,
                      const Matrix& grad_output, bool accumulate, bool want_input_grad) {
    const std::size_t in = layer.in_dim();
    const std::size_t out = layer.out_dim();
    if (grad_output.rows() != input.rows() || grad_output.cols() != out || output.cols() != out) {
        throw InternalError("dense_backward: cache does not match layer");
    }
    const bool relu = layer.activation == Activation::ReLU;
    Matrix grad_in = want_input_grad ? Matrix(input.rows(), in) : Matrix();
    for (std::size_t b = 0; b < input.rows(); ++b) {
        const auto x = input.row(b);
        for (std::size_t o = 0; o < out; ++o) {
            double g = grad_output(b, o);
            if (relu && output(b, o) <= 0.0) g = 0.0;
            if (g == 0.0) continue;
            if (accumulate) {
                layer.grad_bias[o] += g;
                auto gw = layer.grad_weight.row(o);
                for (std::size_t i = 0; i < in; ++i) gw[i] += g * x[i];
            }
            if (want_input_grad) {
                const auto w = layer.weight.row(o);
                auto gi = grad_in.row(b);
                for (std::size_t i = 0; i < in; ++i) gi[i] += g * w[i];
            }
        }
    }
    return grad_in;
}

}  // namespace imtl::nn
