#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace imtl::nn {

struct AdamWConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-2;
};

/// Moments for one parameter tensor. The step count is per tensor, so a
/// tensor that sits out a step keeps its own bias-correction clock.
struct MomentSlot {
    std::vector<double> m;
    std::vector<double> v;
    std::vector<double> v_max;
    std::uint64_t step = 0;
};

/// AdamW with the AMSGrad denominator:
///   w <- w (1 - lr wd)
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,  v_max <- max(v_max, v)
///   w <- w - lr / (1 - b1^t) * m / (sqrt(v_max / (1 - b2^t)) + eps)
class AdamW {
public:
    explicit AdamW(AdamWConfig config = {}) : config_(config) {}

    const AdamWConfig& config() const noexcept { return config_; }
    void set_learning_rate(double lr) { config_.learning_rate = lr; }

    /// Throws NumericError naming `param_id` (before touching anything) if a
    /// gradient is not finite.
    void step(std::span<double> params, std::span<const double> grads, MomentSlot& slot,
              const std::string& param_id) const;

private:
    AdamWConfig config_;
};

/// Optimizer configuration plus one moment slot per parameter tensor.
struct OptimizerState {
    AdamW optimizer;
    std::vector<MomentSlot> slots;
};

}  // namespace imtl::nn
