#include "imtl/nn/adamw.hpp"

#include <algorithm>
#include <cmath>

#include "imtl/errors.hpp"

namespace imtl::nn {

void AdamW::step(std::span<double> params, std::span<const double> grads, MomentSlot& slot,
                 const std::string& param_id) const {
    if (params.size() != grads.size()) {
        throw InternalError("adamw: gradient size mismatch for " + param_id);
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw NumericError("non-finite gradient in parameter " + param_id + "[" +
                               std::to_string(i) + "]");
        }
    }
    const std::size_t n = params.size();
    if (slot.m.size() != n) {
        slot.m.assign(n, 0.0);
        slot.v.assign(n, 0.0);
        slot.v_max.assign(n, 0.0);
        slot.step = 0;
    }
    ++slot.step;
    const auto& c = config_;
    const double t = static_cast<double>(slot.step);
    const double bias1 = 1.0 - std::pow(c.beta1, t);
    const double bias2_sqrt = std::sqrt(1.0 - std::pow(c.beta2, t));
    const double step_size = c.learning_rate / bias1;
    const double decay = 1.0 - c.learning_rate * c.weight_decay;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        params[i] *= decay;
        slot.m[i] = c.beta1 * slot.m[i] + (1.0 - c.beta1) * g;
        slot.v[i] = c.beta2 * slot.v[i] + (1.0 - c.beta2) * g * g;
        slot.v_max[i] = std::max(slot.v_max[i], slot.v[i]);
        const double denom = std::sqrt(slot.v_max[i]) / bias2_sqrt + c.epsilon;
        params[i] -= step_size * slot.m[i] / denom;
    }
}

}  // namespace imtl::nn
