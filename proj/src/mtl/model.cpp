#include "imtl/mtl/model.hpp"

#include <algorithm>
#include <cmath>

#include "imtl/errors.hpp"

namespace imtl::mtl {

using nn::Activation;
using nn::DenseLayer;

std::string to_string(const ModuleId& id) {
    std::string kind;
    switch (id.kind) {
        case ModuleKind::StateProjection: kind = "state_projection"; break;
        case ModuleKind::ActionProjection: kind = "action_projection"; break;
        case ModuleKind::SharedEncoder: kind = "shared_encoder"; break;
        case ModuleKind::TaskEncoder: kind = "task_encoder"; break;
        case ModuleKind::Attention: kind = "attention"; break;
        case ModuleKind::Decoder: kind = "decoder"; break;
    }
    return id.shared() ? kind : kind + "[" + std::to_string(id.task) + "]";
}

FrozenSet FrozenSet::for_training(std::size_t engaged, std::size_t task_count) {
    FrozenSet f;
    for (std::size_t i = 0; i < task_count; ++i) {
        if (i != engaged) f.freeze({ModuleKind::TaskEncoder, static_cast<int>(i)});
    }
    return f;
}

bool FrozenSet::contains(const ModuleId& id) const {
    return all_ || std::find(modules_.begin(), modules_.end(), id) != modules_.end();
}

MultiTaskModel MultiTaskModel::build(std::vector<TaskSpec> tasks, NetworkSpec net, Rng& rng) {
    validate(net, tasks);
    if (net.variant == Variant::SingleTask && tasks.size() != 1) {
        throw ConfigError("a single-task network holds exactly one task");
    }
    MultiTaskModel model;
    model.tasks_ = std::move(tasks);
    model.net_ = net;
    const std::size_t m = model.tasks_.size();
    const std::size_t z = net.attention_dim();
    const std::size_t context = net.use_attention ? z : m * z;

    for (const auto& t : model.tasks_) {
        TaskModules tm;
        tm.state_projection = DenseLayer::uniform_init(t.state_dim, net.state_dim, Activation::Identity, rng);
        tm.action_projection =
            DenseLayer::uniform_init(t.action_dim, net.action_dim, Activation::Identity, rng);
        tm.encoder.push_back(DenseLayer::uniform_init(net.shared_out, net.task_hidden, Activation::ReLU, rng));
        tm.encoder.push_back(DenseLayer::uniform_init(net.task_hidden, net.latent_dim, Activation::ReLU, rng));
        std::size_t in = context + net.action_dim;
        for (std::size_t l = 0; l + 1 < net.decoder_layers; ++l) {
            tm.decoder.push_back(DenseLayer::uniform_init(in, net.decoder_hidden, Activation::ReLU, rng));
            in = net.decoder_hidden;
        }
        tm.decoder.push_back(DenseLayer::uniform_init(in, t.effect_dim, Activation::Identity, rng));
        model.task_modules_.push_back(std::move(tm));
    }
    model.shared_.push_back(DenseLayer::uniform_init(net.state_dim, net.shared_hidden, Activation::ReLU, rng));
    model.shared_.push_back(DenseLayer::uniform_init(net.shared_hidden, net.shared_out, Activation::ReLU, rng));
    if (net.use_attention) {
        model.attention_ = nn::AttentionBlock::uniform_init(z, net.heads, z, rng);
    }
    return model;
}

std::size_t MultiTaskModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& tm : task_modules_) {
        n += tm.state_projection.parameter_count() + tm.action_projection.parameter_count();
        for (const auto& l : tm.encoder) n += l.parameter_count();
        for (const auto& l : tm.decoder) n += l.parameter_count();
    }
    for (const auto& l : shared_) n += l.parameter_count();
    if (net_.use_attention) n += attention_.parameter_count();
    return n;
}

std::vector<ParamRef> MultiTaskModel::parameters() {
    std::vector<ParamRef> out;
    auto add_dense = [&out](const std::string& prefix, ModuleId id, DenseLayer& l) {
        out.push_back({prefix + ".weight", id, l.weight.values(), l.grad_weight.values()});
        out.push_back({prefix + ".bias", id, l.bias, l.grad_bias});
    };
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        const int ti = static_cast<int>(i);
        const std::string& name = tasks_[i].name;
        auto& tm = task_modules_[i];
        add_dense(name + ".state_projection", {ModuleKind::StateProjection, ti}, tm.state_projection);
        add_dense(name + ".action_projection", {ModuleKind::ActionProjection, ti}, tm.action_projection);
        for (std::size_t l = 0; l < tm.encoder.size(); ++l) {
            add_dense(name + ".encoder." + std::to_string(l), {ModuleKind::TaskEncoder, ti}, tm.encoder[l]);
        }
        for (std::size_t l = 0; l < tm.decoder.size(); ++l) {
            add_dense(name + ".decoder." + std::to_string(l), {ModuleKind::Decoder, ti}, tm.decoder[l]);
        }
    }
    for (std::size_t l = 0; l < shared_.size(); ++l) {
        add_dense("shared_encoder." + std::to_string(l), {ModuleKind::SharedEncoder, -1}, shared_[l]);
    }
    if (net_.use_attention) {
        const ModuleId id{ModuleKind::Attention, -1};
        for (std::size_t h = 0; h < attention_.heads; ++h) {
            const std::string p = "attention.head" + std::to_string(h);
            out.push_back({p + ".w_query", id, attention_.w_query[h].values(), attention_.grad_query[h].values()});
            out.push_back({p + ".w_key", id, attention_.w_key[h].values(), attention_.grad_key[h].values()});
            out.push_back({p + ".w_value", id, attention_.w_value[h].values(), attention_.grad_value[h].values()});
        }
        out.push_back({"attention.w_out", id, attention_.w_out.values(), attention_.grad_out.values()});
    }
    return out;
}

std::vector<const DenseLayer*> MultiTaskModel::dense_layers(ModuleId id) const {
    std::vector<const DenseLayer*> out;
    auto all = [&out](const std::vector<DenseLayer>& v) {
        for (const auto& l : v) out.push_back(&l);
    };
    switch (id.kind) {
        case ModuleKind::StateProjection: out.push_back(&task_modules_.at(id.task).state_projection); break;
        case ModuleKind::ActionProjection: out.push_back(&task_modules_.at(id.task).action_projection); break;
        case ModuleKind::SharedEncoder: all(shared_); break;
        case ModuleKind::TaskEncoder: all(task_modules_.at(id.task).encoder); break;
        case ModuleKind::Decoder: all(task_modules_.at(id.task).decoder); break;
        case ModuleKind::Attention: break;
    }
    return out;
}

void MultiTaskModel::zero_grad() {
    for (auto& tm : task_modules_) {
        tm.state_projection.zero_grad();
        tm.action_projection.zero_grad();
        for (auto& l : tm.encoder) l.zero_grad();
        for (auto& l : tm.decoder) l.zero_grad();
    }
    for (auto& l : shared_) l.zero_grad();
    if (net_.use_attention) attention_.zero_grad();
}

ForwardResult MultiTaskModel::forward(std::size_t engaged, const Matrix& states, const Matrix& actions,
                                      const ForwardOptions& options) const {
    return forward_impl(engaged, states, actions, options, nullptr);
}

ForwardResult MultiTaskModel::forward(std::size_t engaged, const Matrix& states, const Matrix& actions,
                                      ForwardTrace& trace, const ForwardOptions& options) const {
    trace = ForwardTrace{};
    return forward_impl(engaged, states, actions, options, &trace);
}

ForwardResult MultiTaskModel::forward_impl(std::size_t engaged, const Matrix& states,
                                           const Matrix& actions, const ForwardOptions& options,
                                           ForwardTrace* trace) const {
    const std::size_t m = tasks_.size();
    if (engaged >= m) throw ConfigError("engaged task index " + std::to_string(engaged) + " out of range");
    const TaskSpec& spec = tasks_[engaged];
    if (states.cols() != spec.state_dim || actions.cols() != spec.action_dim) {
        throw ConfigError("inputs for task '" + spec.name + "' must be " + std::to_string(spec.state_dim) +
                          "/" + std::to_string(spec.action_dim) + " wide, got " +
                          std::to_string(states.cols()) + "/" + std::to_string(actions.cols()));
    }
    if (states.rows() != actions.rows()) throw ConfigError("state/action batch size mismatch");
    for (std::size_t r : options.zeroed_rows) {
        if (r >= m) throw ConfigError("zeroed row " + std::to_string(r) + " out of range");
    }

    const TaskModules& tm = task_modules_[engaged];
    const std::size_t batch = states.rows();
    const std::size_t z = net_.attention_dim();
    const std::size_t dr = net_.latent_dim;
    double energy = 0.0;
    auto record = [&](const std::string& id, const Matrix& out) {
        energy += nn::energy_of(out);
        if (trace) trace->cache.append(id, out);
    };

    if (trace) {
        trace->engaged = engaged;
        trace->version = version_;
        trace->states = states;
        trace->actions = actions;
        trace->zeroed_rows = options.zeroed_rows;
    }

    Matrix xhat = nn::dense_forward(tm.state_projection, states);
    record(spec.name + ".state_projection", xhat);
    Matrix h = xhat;
    std::vector<Matrix> shared_outs;
    for (std::size_t l = 0; l < shared_.size(); ++l) {
        h = nn::dense_forward(shared_[l], h);
        record("shared_encoder." + std::to_string(l), h);
        if (trace) shared_outs.push_back(h);
    }

    std::vector<Matrix> latents(m);
    std::vector<std::vector<Matrix>> encoder_outs(m);
    for (std::size_t i = 0; i < m; ++i) {
        Matrix r = h;
        for (std::size_t l = 0; l < task_modules_[i].encoder.size(); ++l) {
            r = nn::dense_forward(task_modules_[i].encoder[l], r);
            record(tasks_[i].name + ".encoder." + std::to_string(l), r);
            if (trace) encoder_outs[i].push_back(r);
        }
        latents[i] = std::move(r);
    }

    auto is_zeroed = [&](std::size_t i) {
        return std::find(options.zeroed_rows.begin(), options.zeroed_rows.end(), i) != options.zeroed_rows.end();
    };

    const std::size_t context_width = net_.use_attention ? z : m * z;
    Matrix context(batch, context_width);
    if (trace) {
        trace->latents.reserve(batch);
        if (net_.use_attention) trace->attention.resize(batch);
    }
    Matrix kv(m, z);
    std::vector<double> query(z);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto r = latents[i].row(b);
            const bool zero = is_zeroed(i);
            for (std::size_t c = 0; c < dr; ++c) kv(i, c) = zero ? 0.0 : r[c];
            if (net_.use_flag) kv(i, dr) = (!zero && i == engaged) ? 1.0 : 0.0;
            if (i == engaged) {
                for (std::size_t c = 0; c < dr; ++c) query[c] = r[c];
                if (net_.use_flag) query[dr] = 1.0;
            }
        }
        auto ctx = context.row(b);
        if (net_.use_attention) {
            auto out = nn::attention_forward(attention_, query, kv, kv, trace ? &trace->attention[b] : nullptr);
            std::copy(out.begin(), out.end(), ctx.begin());
        } else {
            std::copy(kv.values().begin(), kv.values().end(), ctx.begin());
        }
        if (trace) trace->latents.push_back(kv);
    }
    if (net_.use_attention) record("attention", context);

    Matrix ahat = nn::dense_forward(tm.action_projection, actions);
    record(spec.name + ".action_projection", ahat);
    Matrix dec_in = nn::hconcat(context, ahat);
    Matrix y = dec_in;
    std::vector<Matrix> decoder_outs;
    for (std::size_t l = 0; l < tm.decoder.size(); ++l) {
        y = nn::dense_forward(tm.decoder[l], y);
        record(spec.name + ".decoder." + std::to_string(l), y);
        if (trace) decoder_outs.push_back(y);
    }

    if (trace) {
        trace->projected_state = std::move(xhat);
        trace->shared = std::move(shared_outs);
        trace->encoders = std::move(encoder_outs);
        trace->context = std::move(context);
        trace->projected_action = std::move(ahat);
        trace->decoder_input = std::move(dec_in);
        trace->decoder = std::move(decoder_outs);
    }
    return {std::move(y), energy};
}

void MultiTaskModel::backward(const ForwardTrace& trace, const Matrix& grad_prediction,
                              const FrozenSet& frozen) {
    if (trace.version != version_ || trace.decoder.empty()) {
        throw InternalError("backward called with a missing or stale forward cache");
    }
    const std::size_t engaged = trace.engaged;
    const int et = static_cast<int>(engaged);
    const std::size_t m = tasks_.size();
    const std::size_t batch = trace.states.rows();
    const std::size_t z = net_.attention_dim();
    const std::size_t dr = net_.latent_dim;
    TaskModules& tm = task_modules_[engaged];
    if (grad_prediction.rows() != batch || grad_prediction.cols() != tasks_[engaged].effect_dim) {
        throw InternalError("gradient shape does not match prediction");
    }

    if (frozen.contains({ModuleKind::Decoder, et})) return;
    Matrix grad = grad_prediction;
    for (std::size_t l = tm.decoder.size(); l-- > 0;) {
        const Matrix& input = l == 0 ? trace.decoder_input : trace.decoder[l - 1];
        grad = nn::dense_backward(tm.decoder[l], input, trace.decoder[l], grad, true, true);
    }

    const std::size_t context_width = trace.context.cols();
    Matrix d_action(batch, net_.action_dim);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < net_.action_dim; ++c) d_action(b, c) = grad(b, context_width + c);
    }
    if (!frozen.contains({ModuleKind::ActionProjection, et})) {
        nn::dense_backward(tm.action_projection, trace.actions, trace.projected_action, d_action, true, false);
    }

    auto is_zeroed = [&](std::size_t i) {
        return std::find(trace.zeroed_rows.begin(), trace.zeroed_rows.end(), i) != trace.zeroed_rows.end();
    };

    // d(loss)/d(latent r_i), one matrix per task
    std::vector<Matrix> d_latent(m, Matrix(batch, dr));
    if (net_.use_attention) {
        if (frozen.contains({ModuleKind::Attention, -1})) return;
        std::vector<double> d_out(z);
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t c = 0; c < z; ++c) d_out[c] = grad(b, c);
            auto g = nn::attention_backward(attention_, trace.attention[b], d_out, true);
            for (std::size_t i = 0; i < m; ++i) {
                if (is_zeroed(i)) continue;
                for (std::size_t c = 0; c < dr; ++c) d_latent[i](b, c) += g.keys(i, c) + g.values(i, c);
            }
            for (std::size_t c = 0; c < dr; ++c) d_latent[engaged](b, c) += g.query[c];
        }
    } else {
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t i = 0; i < m; ++i) {
                if (is_zeroed(i)) continue;
                for (std::size_t c = 0; c < dr; ++c) d_latent[i](b, c) = grad(b, i * z + c);
            }
        }
    }

    const Matrix& h = trace.shared.back();
    Matrix d_h(batch, net_.shared_out);
    bool any = false;
    for (std::size_t i = 0; i < m; ++i) {
        if (frozen.contains({ModuleKind::TaskEncoder, static_cast<int>(i)})) continue;
        auto& enc = task_modules_[i].encoder;
        Matrix g = d_latent[i];
        for (std::size_t l = enc.size(); l-- > 0;) {
            const Matrix& input = l == 0 ? h : trace.encoders[i][l - 1];
            g = nn::dense_backward(enc[l], input, trace.encoders[i][l], g, true, true);
        }
        for (std::size_t k = 0; k < d_h.size(); ++k) d_h.values()[k] += g.values()[k];
        any = true;
    }
    if (!any || frozen.contains({ModuleKind::SharedEncoder, -1})) return;

    Matrix g = d_h;
    for (std::size_t l = shared_.size(); l-- > 0;) {
        const Matrix& input = l == 0 ? trace.projected_state : trace.shared[l - 1];
        g = nn::dense_backward(shared_[l], input, trace.shared[l], g, true, true);
    }
    if (!frozen.contains({ModuleKind::StateProjection, et})) {
        nn::dense_backward(tm.state_projection, trace.states, trace.projected_state, g, true, false);
    }
}

nn::OptimizerState make_optimizer_state(MultiTaskModel& model, nn::AdamWConfig config) {
    nn::OptimizerState state{nn::AdamW(config), {}};
    state.slots.resize(model.parameters().size());
    return state;
}

BatchLoss batch_loss(const Matrix& prediction, const Matrix& target) {
    if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
        throw ConfigError("effect batch is " + std::to_string(target.rows()) + "x" +
                          std::to_string(target.cols()) + ", prediction is " +
                          std::to_string(prediction.rows()) + "x" + std::to_string(prediction.cols()));
    }
    BatchLoss loss;
    const auto p = prediction.values();
    const auto t = target.values();
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double d = p[k] - t[k];
        loss.mse += d * d;
        loss.mae += std::fabs(d);
    }
    const auto n = static_cast<double>(std::max<std::size_t>(1, p.size()));
    loss.mse /= n;
    loss.mae /= n;
    return loss;
}

TrainResult train_step(MultiTaskModel& model, std::size_t engaged, const Matrix& states,
                       const Matrix& actions, const Matrix& effects, nn::OptimizerState& optimizer) {
    ForwardTrace trace;
    const ForwardResult fwd = model.forward(engaged, states, actions, trace);
    const BatchLoss loss = batch_loss(fwd.prediction, effects);
    if (!std::isfinite(loss.mse) || !std::isfinite(loss.mae)) {
        throw NumericError("non-finite training loss on task '" + model.task(engaged).name + "'");
    }

    Matrix grad(effects.rows(), effects.cols());
    const double scale = 2.0 / static_cast<double>(std::max<std::size_t>(1, effects.size()));
    for (std::size_t k = 0; k < grad.size(); ++k) {
        grad.values()[k] = scale * (fwd.prediction.values()[k] - effects.values()[k]);
    }
    model.zero_grad();
    const FrozenSet frozen = FrozenSet::for_training(engaged, model.task_count());
    model.backward(trace, grad, frozen);

    auto params = model.parameters();
    if (optimizer.slots.size() != params.size()) throw InternalError("optimizer state does not match model");
    const int et = static_cast<int>(engaged);
    auto trainable = [&](const ParamRef& p) {
        return (p.module.shared() || p.module.task == et) && !frozen.contains(p.module);
    };
    for (const auto& p : params) {
        if (!trainable(p)) continue;
        for (double g : p.grad) {
            if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + p.name);
        }
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (!trainable(params[k])) continue;
        optimizer.optimizer.step(params[k].value, params[k].grad, optimizer.slots[k], params[k].name);
    }
    model.touch();
    return {loss.mse, loss.mae, fwd.energy};
}

ForwardResult forward_ablated(const MultiTaskModel& model, std::size_t engaged, const Matrix& states,
                              const Matrix& actions, Ablation ablation) {
    const auto& net = model.network();
    if (ablation.use_attention != net.use_attention || ablation.use_flag != net.use_flag) {
        throw ConfigError("ablation flags do not match the flags the model was built with");
    }
    return model.forward(engaged, states, actions);
}

ForwardResult forward_transfer_ablated(const MultiTaskModel& model, std::size_t target,
                                       std::size_t zeroed_source, const Matrix& states,
                                       const Matrix& actions) {
    ForwardOptions options;
    options.zeroed_rows.push_back(zeroed_source);
    return model.forward(target, states, actions, options);
}

}  // namespace imtl::mtl
