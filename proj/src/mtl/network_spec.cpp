#include "imtl/mtl/network_spec.hpp"

#include <cmath>
#include <cstdlib>

#include "imtl/errors.hpp"

namespace imtl::mtl {

std::string to_string(Variant v) {
    return v == Variant::MultiTask ? "multi_task" : "single_task";
}

std::string to_string(Tier t) {
    switch (t) {
        case Tier::PaperDefault: return "paper";
        case Tier::Low: return "low";
        case Tier::Medium: return "medium";
        case Tier::High: return "high";
    }
    return "paper";
}

Tier parse_tier(const std::string& s) {
    if (s == "paper" || s == "default") return Tier::PaperDefault;
    if (s == "low") return Tier::Low;
    if (s == "medium") return Tier::Medium;
    if (s == "high") return Tier::High;
    throw ConfigError("unknown tier '" + s + "' (expected paper|low|medium|high)");
}

NetworkSpec NetworkSpec::paper_default(Variant variant) {
    NetworkSpec n;
    n.variant = variant;
    if (variant == Variant::SingleTask) {
        n.state_dim = 4;
        n.shared_hidden = 4;
        n.shared_out = 4;
        n.use_flag = false;
    }
    return n;
}

std::size_t tier_target(Tier tier) {
    switch (tier) {
        case Tier::Low: return 800;
        case Tier::Medium: return 2000;
        case Tier::High: return 5200;
        case Tier::PaperDefault: return 0;
    }
    return 0;
}

namespace {

NetworkSpec scaled(const NetworkSpec& base, double c) {
    auto w = [c](std::size_t width) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(width) * c)));
    };
    NetworkSpec n = base;
    n.state_dim = w(base.state_dim);
    n.shared_hidden = w(base.shared_hidden);
    n.shared_out = w(base.shared_out);
    n.task_hidden = w(base.task_hidden);
    n.latent_dim = w(base.latent_dim);
    n.decoder_hidden = w(base.decoder_hidden);
    n.width_scale = c;
    return n;
}

std::size_t single_model_count(const NetworkSpec& n, const std::vector<TaskSpec>& tasks) {
    auto dense = [](std::size_t in, std::size_t out) { return in * out + out; };
    std::size_t total = dense(n.state_dim, n.shared_hidden) + dense(n.shared_hidden, n.shared_out);
    const std::size_t m = tasks.size();
    const std::size_t z = n.attention_dim();
    std::size_t decoder_in = 0;
    if (n.use_attention) {
        total += 3 * n.heads * z * z + n.heads * z * z;
        decoder_in = z + n.action_dim;
    } else {
        decoder_in = m * z + n.action_dim;
    }
    for (const auto& t : tasks) {
        total += dense(t.state_dim, n.state_dim) + dense(t.action_dim, n.action_dim);
        total += dense(n.shared_out, n.task_hidden) + dense(n.task_hidden, n.latent_dim);
        std::size_t in = decoder_in;
        for (std::size_t l = 0; l + 1 < n.decoder_layers; ++l) {
            total += dense(in, n.decoder_hidden);
            in = n.decoder_hidden;
        }
        total += dense(in, t.effect_dim);
    }
    return total;
}

}  // namespace

NetworkSpec NetworkSpec::for_tier(Tier tier, Variant variant, const std::vector<TaskSpec>& tasks) {
    NetworkSpec base = paper_default(variant);
    base.tier = tier;
    if (tier == Tier::PaperDefault) return base;
    const NetworkSpec multi_base = paper_default(Variant::MultiTask);
    const auto target = static_cast<double>(tier_target(tier));
    double best_c = 1.0;
    double best_err = -1.0;
    for (int k = 50; k <= 600; ++k) {
        const double c = k / 100.0;
        const double count = static_cast<double>(single_model_count(scaled(multi_base, c), tasks));
        const double err = std::fabs(count - target);
        if (best_err < 0.0 || err < best_err) {
            best_err = err;
            best_c = c;
        }
    }
    return scaled(base, best_c);
}

std::size_t parameter_count(const NetworkSpec& net, const std::vector<TaskSpec>& tasks) {
    if (net.variant == Variant::SingleTask) {
        std::size_t total = 0;
        for (const auto& t : tasks) total += single_model_count(net, {t});
        return total;
    }
    return single_model_count(net, tasks);
}

void validate(const NetworkSpec& n, const std::vector<TaskSpec>& tasks) {
    if (tasks.empty()) throw ConfigError("at least one task is required");
    for (const auto& t : tasks) {
        if (t.state_dim == 0 || t.action_dim == 0 || t.effect_dim == 0) {
            throw ConfigError("task '" + t.name + "' has a zero dimension");
        }
    }
    if (n.state_dim == 0 || n.shared_hidden == 0 || n.shared_out == 0 || n.task_hidden == 0 ||
        n.latent_dim == 0 || n.action_dim == 0 || n.decoder_hidden == 0 || n.heads == 0) {
        throw ConfigError("network widths must be >= 1");
    }
    if (n.decoder_layers < 1) throw ConfigError("decoder needs at least one layer");
}

}  // namespace imtl::mtl
