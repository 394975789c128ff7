#include "imtl/env/generators.hpp"

#include <cmath>
#include <numbers>

#include "imtl/env/objects.hpp"
#include "imtl/errors.hpp"

namespace imtl::env {

std::string to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::Push: return "push";
        case TaskKind::Hit: return "hit";
        case TaskKind::Stack: return "stack";
    }
    return "push";
}

TaskKind parse_task_kind(const std::string& s) {
    if (s == "push") return TaskKind::Push;
    if (s == "hit") return TaskKind::Hit;
    if (s == "stack") return TaskKind::Stack;
    throw ConfigError("unknown task '" + s + "' (expected push|hit|stack)");
}

mtl::TaskSpec task_spec(TaskKind kind) {
    if (kind == TaskKind::Stack) return {"stack", 18, 12, 18};
    return {to_string(kind), 9, 8, 9};
}

std::optional<TaskKind> kind_of(const mtl::TaskSpec& spec) {
    for (TaskKind k : {TaskKind::Push, TaskKind::Hit, TaskKind::Stack}) {
        if (task_spec(k) == spec) return k;
    }
    return std::nullopt;
}

Teacher::Teacher()
    : core_(kHidden, kStateDim + kCompressed),
      core_bias_(kHidden),
      compressor_(kCompressed, kActionDim),
      head_(kEffectDim, kHidden) {
    Rng rng(kSeed, streams::kTeacher);
    for (double& w : core_.values()) w = rng.uniform(-1.0, 1.0);
    for (double& b : core_bias_) b = rng.uniform(-0.5, 0.5);
    for (double& w : compressor_.values()) w = rng.uniform(-1.0, 1.0);
    for (double& w : head_.values()) w = rng.uniform(-0.5, 0.5);
}

const Teacher& Teacher::instance() {
    static const Teacher teacher;
    return teacher;
}

std::array<double, Teacher::kEffectDim> Teacher::raw_effect(std::span<const double> state,
                                                            std::span<const double> action) const {
    if (state.size() != kStateDim || action.size() != kActionDim) {
        throw InternalError("teacher expects a 9-wide state and an 8-wide action");
    }
    double input[kStateDim + kCompressed];
    for (std::size_t i = 0; i < kStateDim; ++i) input[i] = state[i];
    for (std::size_t c = 0; c < kCompressed; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < kActionDim; ++j) acc += compressor_(c, j) * action[j];
        input[kStateDim + c] = acc;
    }
    double hidden[kHidden];
    for (std::size_t h = 0; h < kHidden; ++h) {
        double acc = core_bias_[h];
        for (std::size_t i = 0; i < kStateDim + kCompressed; ++i) acc += core_(h, i) * input[i];
        hidden[h] = std::tanh(acc);
    }
    std::array<double, kEffectDim> out{};
    for (std::size_t e = 0; e < kEffectDim; ++e) {
        double acc = 0.0;
        for (std::size_t h = 0; h < kHidden; ++h) acc += head_(e, h) * hidden[h];
        out[e] = acc;
    }
    return out;
}

double reflect(double v) {
    double t = std::fmod(v + 1.0, 4.0);
    if (t < 0.0) t += 4.0;
    if (t > 2.0) t = 4.0 - t;
    return t - 1.0;
}

std::array<double, 9> push_effect(std::span<const double> state, std::span<const double> action,
                                  std::size_t object) {
    auto e = Teacher::instance().raw_effect(state, action);
    for (double& v : e) v *= kObjects.at(object).rollability;
    return e;
}

std::array<double, 9> hit_effect(std::span<const double> state, std::span<const double> action,
                                 std::size_t object) {
    auto e = push_effect(state, action, object);
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] *= 2.0;
        if (i < 3) e[i] = reflect(e[i]);
    }
    return e;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> object_state(Rng& rng, std::size_t object) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    std::vector<double> s{x, y, kObjects[object].rest_height};
    for (int axis = 0; axis < 3; ++axis) {
        const double phi = rng.uniform(0.0, kTwoPi);
        s.push_back(std::sin(phi));
        s.push_back(std::cos(phi));
    }
    return s;
}

void append_one_hot(std::vector<double>& v, std::size_t index) {
    for (std::size_t i = 0; i < kObjectCount; ++i) v.push_back(i == index ? 1.0 : 0.0);
}

Sample single_object_sample(Rng& rng, bool hit) {
    const std::size_t object = rng.index(kObjectCount);
    Sample s;
    s.state = object_state(rng, object);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    s.action = {std::sin(theta), std::cos(theta)};
    append_one_hot(s.action, object);
    const auto e = hit ? hit_effect(s.state, s.action, object) : push_effect(s.state, s.action, object);
    s.effect.assign(e.begin(), e.end());
    return s;
}

}  // namespace

Sample gen_push(Rng& rng) {
    return single_object_sample(rng, false);
}

Sample gen_hit(Rng& rng) {
    return single_object_sample(rng, true);
}

Sample gen_stack(Rng& rng) {
    const std::size_t picked = rng.index(kObjectCount);
    const std::size_t target = rng.index(kObjectCount);
    const auto sp = object_state(rng, picked);
    const auto st = object_state(rng, target);

    Sample s;
    s.state = sp;
    s.state.insert(s.state.end(), st.begin(), st.end());
    append_one_hot(s.action, picked);
    append_one_hot(s.action, target);

    // move the picked object onto the top face of the target
    std::array<double, 9> placement{};
    placement[0] = st[0] - sp[0];
    placement[1] = st[1] - sp[1];
    placement[2] = 2.0 * kObjects[target].rest_height;

    double approach = std::atan2(placement[1], placement[0]);
    approach = std::fmod(approach + kTwoPi, std::numbers::pi);
    std::vector<double> picked_action{std::sin(approach), std::cos(approach)};
    append_one_hot(picked_action, picked);
    std::vector<double> target_action{std::sin(approach), std::cos(approach)};
    append_one_hot(target_action, target);

    std::array<double, 9> ep{};
    std::array<double, 9> et{};
    if (stable_pair(picked, target)) {
        const auto residual = push_effect(sp, picked_action, picked);
        const auto settle = push_effect(st, target_action, target);
        for (std::size_t i = 0; i < 9; ++i) {
            ep[i] = placement[i] + 0.1 * residual[i];
            et[i] = kStableResidual * std::tanh(settle[i]);
        }
    } else {
        const auto fall_p = hit_effect(sp, picked_action, picked);
        const auto fall_t = hit_effect(st, target_action, target);
        for (std::size_t i = 0; i < 9; ++i) {
            ep[i] = placement[i] + fall_p[i];
            et[i] = fall_t[i];
        }
    }
    s.effect.assign(ep.begin(), ep.end());
    s.effect.insert(s.effect.end(), et.begin(), et.end());
    return s;
}

Sample generate(TaskKind kind, Rng& rng) {
    switch (kind) {
        case TaskKind::Push: return gen_push(rng);
        case TaskKind::Hit: return gen_hit(rng);
        case TaskKind::Stack: return gen_stack(rng);
    }
    return gen_push(rng);
}

namespace {
std::size_t argmax_block(std::span<const double> v, std::size_t begin) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kObjectCount; ++i) {
        if (v[begin + i] > v[begin + best]) best = i;
    }
    return best;
}
}  // namespace

std::size_t single_object(std::span<const double> action) {
    if (action.size() != 8) throw ConfigError("push/hit actions are 8 wide");
    return argmax_block(action, 2);
}

std::pair<std::size_t, std::size_t> object_pair(std::span<const double> action) {
    if (action.size() != 12) throw ConfigError("stack actions are 12 wide");
    return {argmax_block(action, 0), argmax_block(action, 6)};
}

}  // namespace imtl::env
