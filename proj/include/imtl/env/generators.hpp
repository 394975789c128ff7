#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imtl/mtl/network_spec.hpp"
#include "imtl/nn/matrix.hpp"
#include "imtl/rng.hpp"

namespace imtl::env {

enum class TaskKind { Push, Hit, Stack };

std::string to_string(TaskKind kind);
TaskKind parse_task_kind(const std::string& s);
mtl::TaskSpec task_spec(TaskKind kind);
/// Kind whose dimensions and name match `spec`, if any.
std::optional<TaskKind> kind_of(const mtl::TaskSpec& spec);

struct Sample {
    std::vector<double> state;
    std::vector<double> action;
    std::vector<double> effect;
};

/// Fixed random network standing in for the simulator:
///   u = tanh(T [x ; Ca a] + t0),  effect = C u
/// T: 16x13, t0: 16, Ca: 4x8, C: 9x16. Seeded once; identical for every task.
class Teacher {
public:
    static constexpr std::size_t kHidden = 16;
    static constexpr std::size_t kStateDim = 9;
    static constexpr std::size_t kActionDim = 8;
    static constexpr std::size_t kCompressed = 4;
    static constexpr std::size_t kEffectDim = 9;
    static constexpr std::uint64_t kSeed = 0x7EAC4E5ULL;

    Teacher();
    static const Teacher& instance();

    /// C tanh(T [x ; Ca a] + t0), unscaled. x: 9 values, a: 8 values.
    std::array<double, kEffectDim> raw_effect(std::span<const double> state, std::span<const double> action) const;

    const nn::Matrix& core() const noexcept { return core_; }
    const std::vector<double>& core_bias() const noexcept { return core_bias_; }
    const nn::Matrix& compressor() const noexcept { return compressor_; }
    const nn::Matrix& head() const noexcept { return head_; }

private:
    nn::Matrix core_;        // 16 x 13
    std::vector<double> core_bias_;
    nn::Matrix compressor_;  // 4 x 8
    nn::Matrix head_;        // 9 x 16
};

/// Folds v into [-1, 1] by repeated reflection at the boundaries.
double reflect(double v);

/// Push/hit effect of one object given its state and an 8-wide action.
std::array<double, 9> push_effect(std::span<const double> state, std::span<const double> action, std::size_t object);
std::array<double, 9> hit_effect(std::span<const double> state, std::span<const double> action, std::size_t object);

Sample gen_push(Rng& rng);
Sample gen_hit(Rng& rng);
Sample gen_stack(Rng& rng);
Sample generate(TaskKind kind, Rng& rng);

/// Object id encoded in a push/hit action (one-hot at a[2..8]).
std::size_t single_object(std::span<const double> action);
/// (picked, target) encoded in a stack action.
std::pair<std::size_t, std::size_t> object_pair(std::span<const double> action);

/// Amplitude of the target-object residual in stable stacks.
inline constexpr double kStableResidual = 0.02;

}  // namespace imtl::env
