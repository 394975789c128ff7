#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imtl/mtl/network_spec.hpp"
#include "imtl/nn/adamw.hpp"
#include "imtl/nn/attention.hpp"
#include "imtl/nn/dense.hpp"
#include "imtl/nn/forward_cache.hpp"
#include "imtl/rng.hpp"

namespace imtl::mtl {

using nn::Matrix;

enum class ModuleKind { StateProjection, ActionProjection, SharedEncoder, TaskEncoder, Attention, Decoder };

/// A module of the network; `task` is -1 for shared modules.
struct ModuleId {
    ModuleKind kind;
    int task = -1;

    bool shared() const noexcept { return task < 0; }
    friend bool operator==(const ModuleId&, const ModuleId&) = default;
};

std::string to_string(const ModuleId& id);

/// View of one parameter tensor and its gradient buffer.
struct ParamRef {
    std::string name;
    ModuleId module;
    std::span<double> value;
    std::span<double> grad;
};

/// Modules excluded from the reverse pass. A frozen module gets no gradient
/// and passes none to its inputs.
class FrozenSet {
public:
    static FrozenSet none() { return {}; }
    static FrozenSet all() {
        FrozenSet f;
        f.all_ = true;
        return f;
    }
    /// Task encoders of every task except `engaged`.
    static FrozenSet for_training(std::size_t engaged, std::size_t task_count);

    void freeze(ModuleId id) { modules_.push_back(id); }
    bool contains(const ModuleId& id) const;

private:
    bool all_ = false;
    std::vector<ModuleId> modules_;
};

struct ForwardOptions {
    /// Rows of Z replaced by zero in the keys/values (the query keeps its row).
    std::vector<std::size_t> zeroed_rows;
};

/// Intermediate values of one batched forward pass.
struct ForwardTrace {
    std::size_t engaged = 0;
    std::uint64_t version = 0;
    Matrix states, actions;
    Matrix projected_state;
    std::vector<Matrix> shared;                 // F layer outputs
    std::vector<std::vector<Matrix>> encoders;  // [task][layer] outputs
    std::vector<Matrix> latents;                // per sample Z (m x attention_dim), zeroed rows applied
    std::vector<nn::AttentionTrace> attention;  // per sample
    Matrix context;                             // A, or flatten(Z) without attention
    Matrix projected_action;
    Matrix decoder_input;
    std::vector<Matrix> decoder;  // layer outputs
    std::vector<std::size_t> zeroed_rows;
    nn::ForwardCache cache;
};

struct ForwardResult {
    Matrix prediction;
    double energy = 0.0;
};

struct TrainResult {
    double mse = 0.0;
    double mae = 0.0;
    double energy = 0.0;
};

struct TaskModules {
    nn::DenseLayer state_projection;
    nn::DenseLayer action_projection;
    std::vector<nn::DenseLayer> encoder;
    std::vector<nn::DenseLayer> decoder;
};

/// Shared encoder F + shared attention over per-task latents, with task
/// specific projections, encoders and decoders.
class MultiTaskModel {
public:
    static MultiTaskModel build(std::vector<TaskSpec> tasks, NetworkSpec net, Rng& rng);

    std::size_t task_count() const noexcept { return tasks_.size(); }
    const std::vector<TaskSpec>& tasks() const noexcept { return tasks_; }
    const TaskSpec& task(std::size_t i) const { return tasks_.at(i); }
    const NetworkSpec& network() const noexcept { return net_; }

    std::size_t parameter_count() const;
    /// All parameter tensors in declaration order (the checkpoint order).
    std::vector<ParamRef> parameters();
    std::vector<const nn::DenseLayer*> dense_layers(ModuleId id) const;

    TaskModules& task_modules(std::size_t i) { return task_modules_.at(i); }
    const TaskModules& task_modules(std::size_t i) const { return task_modules_.at(i); }
    std::vector<nn::DenseLayer>& shared_encoder() { return shared_; }
    const std::vector<nn::DenseLayer>& shared_encoder() const { return shared_; }
    nn::AttentionBlock& attention() { return attention_; }
    const nn::AttentionBlock& attention() const { return attention_; }

    ForwardResult forward(std::size_t engaged, const Matrix& states, const Matrix& actions,
                          const ForwardOptions& options = {}) const;
    ForwardResult forward(std::size_t engaged, const Matrix& states, const Matrix& actions,
                          ForwardTrace& trace, const ForwardOptions& options = {}) const;

    void zero_grad();
    /// Accumulates parameter gradients for d(loss)/d(prediction) = grad_prediction.
    void backward(const ForwardTrace& trace, const Matrix& grad_prediction, const FrozenSet& frozen);

    /// Called after parameters change; invalidates traces from earlier passes.
    void touch() noexcept { ++version_; }
    std::uint64_t version() const noexcept { return version_; }

private:
    ForwardResult forward_impl(std::size_t engaged, const Matrix& states, const Matrix& actions,
                               const ForwardOptions& options, ForwardTrace* trace) const;

    std::vector<TaskSpec> tasks_;
    NetworkSpec net_;
    std::vector<TaskModules> task_modules_;
    std::vector<nn::DenseLayer> shared_;
    nn::AttentionBlock attention_;
    std::uint64_t version_ = 0;
};

/// One moment slot per parameter tensor of `model`.
nn::OptimizerState make_optimizer_state(MultiTaskModel& model, nn::AdamWConfig config);

/// MSE and MAE averaged over every element.
struct BatchLoss {
    double mse = 0.0;
    double mae = 0.0;
};
BatchLoss batch_loss(const Matrix& prediction, const Matrix& target);

/// One optimisation step on the engaged task: MSE loss, gradients restricted
/// to shared modules and the engaged task's modules, other task encoders run
/// forward only. Throws NumericError on a non-finite loss.
TrainResult train_step(MultiTaskModel& model, std::size_t engaged, const Matrix& states,
                       const Matrix& actions, const Matrix& effects, nn::OptimizerState& optimizer);

/// Ablation switches; must match the configuration the model was built with.
struct Ablation {
    bool use_attention = true;
    bool use_flag = true;
};

ForwardResult forward_ablated(const MultiTaskModel& model, std::size_t engaged, const Matrix& states,
                              const Matrix& actions, Ablation ablation);

/// Forward pass with the source task's row zeroed in the attention keys/values.
ForwardResult forward_transfer_ablated(const MultiTaskModel& model, std::size_t target,
                                       std::size_t zeroed_source, const Matrix& states,
                                       const Matrix& actions);

}  // namespace imtl::mtl
