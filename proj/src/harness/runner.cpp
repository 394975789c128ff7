#include "imtl/harness/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "imtl/env/dataset_io.hpp"
#include "imtl/errors.hpp"
#include "imtl/harness/summary.hpp"

namespace imtl::harness {

Learner::Learner(const RunConfig& config, std::uint64_t seed) {
    const auto specs = config.task_specs();
    const mtl::NetworkSpec net = config.network();
    task_count_ = specs.size();
    single_ = net.variant == mtl::Variant::SingleTask;
    Rng init(seed, streams::kInit);
    if (single_) {
        for (const auto& s : specs) models_.push_back(mtl::MultiTaskModel::build({s}, net, init));
    } else {
        models_.push_back(mtl::MultiTaskModel::build(specs, net, init));
    }
    const nn::AdamWConfig opt{.learning_rate = config.learning_rate, .weight_decay = config.weight_decay};
    for (auto& m : models_) optimizers_.push_back(mtl::make_optimizer_state(m, opt));
}

Learner::Learner(std::vector<mtl::MultiTaskModel> models, const RunConfig& config) : models_(std::move(models)) {
    if (models_.empty()) throw ConfigError("no models");
    single_ = models_.front().network().variant == mtl::Variant::SingleTask;
    for (const auto& m : models_) task_count_ += m.task_count();
    const nn::AdamWConfig opt{.learning_rate = config.learning_rate, .weight_decay = config.weight_decay};
    for (auto& m : models_) optimizers_.push_back(mtl::make_optimizer_state(m, opt));
}

std::pair<std::size_t, std::size_t> Learner::locate(std::size_t task) const {
    if (task >= task_count_) throw ConfigError("task index " + std::to_string(task) + " out of range");
    return single_ ? std::pair<std::size_t, std::size_t>{task, 0} : std::pair<std::size_t, std::size_t>{0, task};
}

mtl::TrainResult Learner::train(std::size_t task, const env::Batch& batch) {
    const auto [m, local] = locate(task);
    return mtl::train_step(models_[m], local, batch.states, batch.actions, batch.effects, optimizers_[m]);
}

mtl::ForwardResult Learner::predict(std::size_t task, const nn::Matrix& states, const nn::Matrix& actions) const {
    const auto [m, local] = locate(task);
    return models_[m].forward(local, states, actions);
}

std::uint64_t Learner::version(std::size_t task) const {
    return models_[locate(task).first].version();
}

std::size_t Learner::parameter_count() const {
    std::size_t n = 0;
    for (const auto& m : models_) n += m.parameter_count();
    return n;
}

std::vector<env::Dataset> prepare_datasets(const RunConfig& config) {
    std::vector<env::Dataset> out;
    for (auto kind : config.tasks) {
        if (config.data_dir) {
            const auto path = *config.data_dir / (env::to_string(kind) + ".csv");
            if (!std::filesystem::exists(path)) throw IoError("dataset file not found: " + path.string());
            out.push_back(env::read_dataset(path, env::task_spec(kind)));
        } else {
            out.push_back(env::generate_dataset(kind, config.cache_size, config.data_seed));
        }
    }
    return out;
}

RunResult run(const RunConfig& config, std::uint64_t seed, const std::vector<env::Dataset>& datasets,
              const EpochHook& hook) {
    config.validate();
    const std::size_t m = config.tasks.size();
    if (datasets.size() != m) throw ConfigError("dataset count does not match task count");

    std::vector<env::ExperienceCache> caches;
    caches.reserve(m);
    const env::CacheOptions cache_opts{.batch = config.batch, .eval_batch = config.eval_batch};
    for (std::size_t i = 0; i < m; ++i) {
        if (!(datasets[i].spec == env::task_spec(config.tasks[i]))) {
            throw ConfigError("dataset " + std::to_string(i) + " does not match task '" +
                              env::to_string(config.tasks[i]) + "'");
        }
        caches.emplace_back(datasets[i], cache_opts, Rng(seed, streams::kMinibatchBase + i));
    }

    Learner learner(config, seed);
    arbitration::ArbitrationState arb(m, config.strategy.window, Rng(seed, streams::kArbitration));

    RunResult result;
    MetricsLog& log = result.log;
    for (auto k : config.tasks) log.task_names.push_back(env::to_string(k));
    log.planned_epochs = config.epochs;
    log.seed = seed;
    log.config_id = config_id(config);
    log.rows.reserve(config.epochs);

    std::vector<double> eval_cache(m, 0.0);
    std::vector<std::uint64_t> eval_version(m, 0);
    std::vector<bool> eval_valid(m, false);
    double cumulative = 0.0;
    const std::size_t steps = config.steps_per_engagement();
    const auto t0 = std::chrono::steady_clock::now();

    try {
        for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
            const arbitration::Decision d = arbitration::select_task(arb, config.strategy, config.epochs);
            EpochRow row;
            row.epoch = epoch;
            row.task = d.task;
            row.warmup = d.warmup;
            row.explored = d.explored;
            row.lp = d.lp;
            row.ec = d.ec;
            row.score = d.score;

            for (std::size_t s = 0; s < steps; ++s) {
                const env::Batch batch = caches[d.task].draw_minibatch();
                const mtl::TrainResult tr = learner.train(d.task, batch);
                row.train_mse += tr.mse / static_cast<double>(steps);
                row.train_mae += tr.mae / static_cast<double>(steps);
                row.energy += tr.energy;
            }
            arb.record(d.task, row.train_mae, row.energy);
            cumulative += row.energy;
            row.cumulative_energy = cumulative;

            row.eval_mae.resize(m);
            for (std::size_t i = 0; i < m; ++i) {
                const std::uint64_t v = learner.version(i);
                if (!eval_valid[i] || eval_version[i] != v) {
                    const env::Batch& eb = caches[i].eval_batch();
                    const auto pred = learner.predict(i, eb.states, eb.actions);
                    eval_cache[i] = mtl::batch_loss(pred.prediction, eb.effects).mae;
                    if (!std::isfinite(eval_cache[i])) {
                        throw NumericError("non-finite eval loss on task '" + log.task_names[i] + "'");
                    }
                    eval_version[i] = v;
                    eval_valid[i] = true;
                }
                row.eval_mae[i] = eval_cache[i];
            }
            row.wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            log.rows.push_back(std::move(row));
            if (hook) hook(log.rows.back());
        }
    } catch (const NumericError& e) {
        log.aborted = true;
        log.failure = e.what();
    }
    result.models = std::move(learner.models());
    return result;
}

std::vector<RunResult> run_seeds(const RunConfig& config, const std::vector<env::Dataset>& datasets) {
    config.validate();
    const std::size_t n = config.seeds.size();
    std::vector<RunResult> results(n);
    std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) results[i] = run(config, config.seeds[i], datasets);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    results[i] = run(config, config.seeds[i], datasets);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return results;
}

std::string config_id(const RunConfig& config) {
    return config_json(config, false).dump();
}

}  // namespace imtl::harness
