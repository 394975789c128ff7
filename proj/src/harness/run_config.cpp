#include "imtl/harness/run_config.hpp"

#include <algorithm>
#include <cstdio>

#include "imtl/errors.hpp"

namespace imtl::harness {

std::string to_string(VariantChoice v) {
    switch (v) {
        case VariantChoice::Auto: return "auto";
        case VariantChoice::MultiTask: return "multi";
        case VariantChoice::SingleTask: return "single";
    }
    return "auto";
}

VariantChoice parse_variant(const std::string& s) {
    if (s == "auto") return VariantChoice::Auto;
    if (s == "multi" || s == "multi-task") return VariantChoice::MultiTask;
    if (s == "single" || s == "single-task") return VariantChoice::SingleTask;
    throw ConfigError("unknown network variant '" + s + "' (expected auto|multi|single)");
}

mtl::Variant RunConfig::resolved_variant() const {
    switch (variant) {
        case VariantChoice::MultiTask: return mtl::Variant::MultiTask;
        case VariantChoice::SingleTask: return mtl::Variant::SingleTask;
        case VariantChoice::Auto: break;
    }
    return strategy.kind == arbitration::StrategyKind::Single ? mtl::Variant::SingleTask
                                                              : mtl::Variant::MultiTask;
}

std::vector<mtl::TaskSpec> RunConfig::task_specs() const {
    std::vector<mtl::TaskSpec> out;
    for (auto k : tasks) out.push_back(env::task_spec(k));
    return out;
}

mtl::NetworkSpec RunConfig::network() const {
    mtl::NetworkSpec net = mtl::NetworkSpec::for_tier(tier, resolved_variant(), task_specs());
    net.use_attention = use_attention;
    if (net.variant == mtl::Variant::MultiTask) net.use_flag = use_flag;
    return net;
}

void RunConfig::validate() const {
    if (tasks.empty()) throw ConfigError("at least one task is required");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        for (std::size_t j = i + 1; j < tasks.size(); ++j) {
            if (tasks[i] == tasks[j]) throw ConfigError("task '" + env::to_string(tasks[i]) + "' listed twice");
        }
    }
    if (epochs == 0) throw ConfigError("epochs must be >= 1");
    if (batch == 0) throw ConfigError("batch must be >= 1");
    if (interactions == 0 || interactions % batch != 0) {
        throw ConfigError("interactions must be a positive multiple of batch");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (weight_decay < 0.0) throw ConfigError("weight decay must be >= 0");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (eval_batch == 0) throw ConfigError("eval batch must be >= 1");
    strategy.validate(tasks.size());
    mtl::validate(network(), task_specs());
}

std::string default_label(const RunConfig& c) {
    using arbitration::StrategyKind;
    std::string s = arbitration::to_string(c.strategy.kind);
    if (c.strategy.kind == StrategyKind::EMLP) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "-k%g", c.strategy.k);
        s += buf;
    }
    if (c.strategy.kind == StrategyKind::Block && !c.strategy.order.empty()) {
        for (auto t : c.strategy.order) s += "-" + std::to_string(t);
    }
    if (c.strategy.kind == StrategyKind::Single && c.strategy.single_task) {
        s += "-" + std::to_string(*c.strategy.single_task);
    }
    if (!c.use_attention) s += "-noattn";
    if (!c.use_flag) s += "-noflag";
    if (c.tier != mtl::Tier::PaperDefault) s += "-" + mtl::to_string(c.tier);
    return s;
}

}  // namespace imtl::harness
