// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "imtl/arbitration.hpp"
#include "imtl/env/experience_cache.hpp"
#include "imtl/errors.hpp"
#include "imtl/harness/experiments.hpp"
#include "imtl/harness/metrics.hpp"
#include "imtl/harness/runner.hpp"
#include "imtl/mtl/model.hpp"
#include "imtl/nn/adamw.hpp"
#include "imtl/nn/attention.hpp"
#include "imtl/nn/gradcheck.hpp"

using namespace imtl;
using arbitration::StrategyKind;
using harness::Aggregate;
using harness::RunConfig;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double mean(const std::vector<double>& v) {
    return harness::stat_of(v).mean;
}

std::vector<mtl::TaskSpec> paper_tasks() {
    return {env::task_spec(env::TaskKind::Push), env::task_spec(env::TaskKind::Hit),
            env::task_spec(env::TaskKind::Stack)};
}

nn::Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    nn::Matrix m(r, c);
    for (auto& v : m.values()) v = rng.uniform(-1.0, 1.0);
    return m;
}

// ---- exact property suites -------------------------------------------------

Verdict gradient_oracle() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng init(seed, streams::kInit);
        auto model = mtl::MultiTaskModel::build(paper_tasks(), mtl::NetworkSpec::paper_default(mtl::Variant::MultiTask), init);
        Rng rng(seed, 0xACCE);
        const std::size_t engaged = seed % 3;
        const auto& spec = model.task(engaged);
        const auto x = random_matrix(8, spec.state_dim, rng);
        const auto a = random_matrix(8, spec.action_dim, rng);
        const auto e = random_matrix(8, spec.effect_dim, rng);
        mtl::ForwardTrace tr;
        const auto res = model.forward(engaged, x, a, tr);
        nn::Matrix g(e.rows(), e.cols());
        for (std::size_t i = 0; i < g.size(); ++i) {
            g.values()[i] = 2.0 * (res.prediction.values()[i] - e.values()[i]) / static_cast<double>(g.size());
        }
        model.zero_grad();
        model.backward(tr, g, mtl::FrozenSet::none());
        std::vector<double> analytic;
        std::vector<std::span<double>> spans;
        for (auto& p : model.parameters()) {
            analytic.insert(analytic.end(), p.grad.begin(), p.grad.end());
            spans.push_back(p.value);
        }
        auto loss = [&] { return mtl::batch_loss(model.forward(engaged, x, a).prediction, e).mse; };
        worst = std::max(worst, nn::max_relative_error(analytic, nn::finite_diff_grad(loss, spans, 1e-4)));
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 30.0, fmt("max rel err %.3g over 10 models, %.2f s", worst, secs)};
}

std::vector<double> brute_attention(const nn::AttentionBlock& b, const std::vector<double>& q, const nn::Matrix& k,
                                    const nn::Matrix& v) {
    const std::size_t d = b.model_dim, dk = b.key_dim, m = k.rows();
    std::vector<double> concat;
    for (std::size_t h = 0; h < b.heads; ++h) {
        std::vector<double> qh(dk, 0.0);
        for (std::size_t j = 0; j < dk; ++j)
            for (std::size_t i = 0; i < d; ++i) qh[j] += q[i] * b.w_query[h](i, j);
        std::vector<double> logits(m, 0.0);
        std::vector<std::vector<double>> vh(m, std::vector<double>(dk, 0.0));
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t j = 0; j < dk; ++j) {
                double kj = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    kj += k(r, i) * b.w_key[h](i, j);
                    vh[r][j] += v(r, i) * b.w_value[h](i, j);
                }
                logits[r] += qh[j] * kj;
            }
            logits[r] /= std::sqrt(static_cast<double>(dk));
        }
        double z = 0.0;
        for (double l : logits) z += std::exp(l);
        for (std::size_t j = 0; j < dk; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < m; ++r) s += std::exp(logits[r]) / z * vh[r][j];
            concat.push_back(s);
        }
    }
    std::vector<double> out(d, 0.0);
    for (std::size_t o = 0; o < d; ++o)
        for (std::size_t c = 0; c < concat.size(); ++c) out[o] += concat[c] * b.w_out(c, o);
    return out;
}

Verdict attention_oracle() {
    Rng rng(2, 0xA77);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t d = 1 + rng.index(4), heads = 1 + rng.index(2), dk = 1 + rng.index(4), m = 1 + rng.index(5);
        const auto blk = nn::AttentionBlock::uniform_init(d, heads, dk, rng);
        std::vector<double> q(d);
        for (auto& x : q) x = rng.uniform(-2.0, 2.0);
        const auto k = random_matrix(m, d, rng), v = random_matrix(m, d, rng);
        const auto got = nn::attention_forward(blk, q, k, v);
        const auto want = brute_attention(blk, q, k, v);
        for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, std::abs(got[j] - want[j]));
    }
    return {worst <= 1e-10, fmt("max abs diff %.3g over 100 cases", worst)};
}

Verdict optimizer_oracle() {
    nn::AdamW opt;
    std::vector<double> w1 = {1.0};
    nn::MomentSlot s1;
    opt.step(w1, std::vector<double>{1.0}, s1, "w");
    const double first_err = std::abs(w1[0] - 0.99989900);

    const std::size_t n = 5;
    Rng rng(3, 0x0B7);
    std::vector<double> w(n), ref(n), m(n, 0.0), v(n, 0.0), vmax(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) ref[i] = w[i] = rng.uniform(-1.0, 1.0);
    nn::MomentSlot slot;
    const double lr = 1e-4, b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 1e-2;
    double worst = 0.0;
    for (int t = 1; t <= 1000; ++t) {
        std::vector<double> g(n);
        for (auto& x : g) x = rng.uniform(-1.0, 1.0) * (t % 7 == 0 ? 10.0 : 1.0);
        opt.step(w, g, slot, "w");
        for (std::size_t i = 0; i < n; ++i) {
            ref[i] *= 1.0 - lr * wd;
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            vmax[i] = std::max(vmax[i], v[i]);
            const double mhat = m[i] / (1.0 - std::pow(b1, t));
            const double vhat = vmax[i] / (1.0 - std::pow(b2, t));
            ref[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            worst = std::max(worst, std::abs(w[i] - ref[i]));
        }
    }
    return {first_err <= 1e-9 && worst <= 1e-12,
            fmt("first step w=%.8f (err %.2g), 1000-step max diff %.3g", w1[0], first_err, worst)};
}

double normal_equations_slope(const std::vector<double>& y) {
    const double n = static_cast<double>(y.size());
    double st = 0, stt = 0, sy = 0, sty = 0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double x = static_cast<double>(t);
        st += x, stt += x * x, sy += y[t], sty += x * y[t];
    }
    return (n * sty - st * sy) / (n * stt - st * st);
}

Verdict lp_closed_form() {
    const bool exact = *arbitration::learning_progress(std::vector<double>{5, 4, 3, 2, 1}) == 1.0;
    Rng rng(4, 0x1B);
    bool nondecreasing_zero = true;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> y(2 + rng.index(9));
        for (auto& x : y) x = rng.uniform(0.0, 3.0);
        worst = std::max(worst, std::abs(*arbitration::slope(y) - normal_equations_slope(y)));
        std::sort(y.begin(), y.end());
        nondecreasing_zero &= *arbitration::learning_progress(y) == 0.0;
    }
    return {exact && nondecreasing_zero && worst <= 1e-12,
            fmt("LP(5..1)=1 %s, sorted windows give 0 %s, slope max diff %.3g", exact ? "yes" : "no",
                nondecreasing_zero ? "yes" : "no", worst)};
}

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}
std::size_t argmin(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

Verdict emlp_limits() {
    const double floor = 1e-6;
    Rng rng(5, 0xE3);
    int low_ok = 0, high_ok = 0, n = 0;
    while (n < 1000) {
        const std::size_t m = 3;
        std::vector<double> lp(m), ec(m);
        for (auto& x : lp) x = rng.uniform();
        for (auto& x : ec) x = rng.uniform(floor, 1.0);
        bool gaps = true;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) gaps &= std::abs(lp[i] - lp[j]) >= 0.05 && ec[i] != ec[j];
        if (!gaps) continue;
        ++n;
        low_ok += argmax(arbitration::emlp_scores(lp, ec, 1e-6, floor)) == argmin(ec);
        high_ok += argmax(arbitration::emlp_scores(lp, ec, 50.0, floor)) == argmax(lp);
    }
    const std::vector<double> wlp = {1, 0}, wec = {1, 1e-6};
    const bool worked = argmax(arbitration::emlp_scores(wlp, wec, 1.0)) == 1 &&
                        argmax(arbitration::emlp_scores(wlp, wec, 20.0)) == 0;
    return {low_ok == 1000 && high_ok == 1000 && worked,
            fmt("k=1e-6 argmin EC %d/1000, k=50 argmax LP %d/1000, worked example %s", low_ok, high_ok,
                worked ? "flips" : "does not flip")};
}

Verdict epsilon_frequency() {
    Rng rng(6, streams::kArbitration);
    const std::vector<double> s = {0.2, 0.9, 0.1};
    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += arbitration::epsilon_greedy(s, 0.1, rng) == 1;
    const double f = hits / 10000.0;
    return {f >= 0.88 && f <= 0.92, fmt("argmax frequency %.4f", f)};
}

Verdict schedule_exactness(const std::vector<env::Dataset>& data) {
    RunConfig c;
    c.strategy.kind = StrategyKind::Block;
    c.strategy.order = {0, 1, 2};
    c.epochs = 3000;
    const auto r = harness::run(c, 1, data);
    bool blocks = r.log.complete();
    for (std::size_t e = 0; blocks && e < 3000; ++e) blocks = r.log.rows[e].task == e / 1000;

    Rng init(7, streams::kInit);
    auto model = mtl::MultiTaskModel::build(paper_tasks(), mtl::NetworkSpec::paper_default(mtl::Variant::MultiTask), init);
    auto opt = mtl::make_optimizer_state(model, {});
    Rng rng(7, 0xF2);
    std::size_t violations = 0;
    for (int step = 0; step < 300; ++step) {
        const std::size_t engaged = rng.index(3);
        std::vector<std::vector<double>> before;
        for (auto& p : model.parameters()) before.emplace_back(p.value.begin(), p.value.end());
        const auto& spec = model.task(engaged);
        mtl::train_step(model, engaged, random_matrix(16, spec.state_dim, rng), random_matrix(16, spec.action_dim, rng),
                        random_matrix(16, spec.effect_dim, rng), opt);
        const auto params = model.parameters();
        for (std::size_t k = 0; k < params.size(); ++k) {
            const auto& mod = params[k].module;
            if (mod.shared() || mod.task == static_cast<int>(engaged)) continue;
            if (!std::equal(before[k].begin(), before[k].end(), params[k].value.begin())) ++violations;
        }
    }
    const auto counts = r.log.engagement_counts();
    return {blocks && violations == 0,
            fmt("blocks %zu/%zu/%zu contiguous %s, frozen-parameter violations %zu in 300 steps", counts[0],
                counts[1], counts[2], blocks ? "yes" : "no", violations)};
}

Verdict architecture_conformance() {
    using mtl::Variant;
    const auto tasks = paper_tasks();
    std::vector<std::string> mismatches;
    auto expect = [&](const std::string& what, const nn::DenseLayer& l, std::size_t in, std::size_t out) {
        if (l.in_dim() != in || l.out_dim() != out) {
            mismatches.push_back(fmt("%s %zu->%zu (want %zu->%zu)", what.c_str(), l.in_dim(), l.out_dim(), in, out));
        }
    };
    Rng rng(8, streams::kInit);
    auto multi = mtl::MultiTaskModel::build(tasks, mtl::NetworkSpec::paper_default(Variant::MultiTask), rng);
    expect("F1", multi.shared_encoder()[0], 6, 6);
    expect("F2", multi.shared_encoder()[1], 6, 4);
    if (multi.attention().model_dim != 3) mismatches.push_back("multi MHA dim");
    std::size_t trio = 0;
    for (std::size_t t = 0; t < 3; ++t) {
        const auto& tm = multi.task_modules(t);
        const auto& s = tasks[t];
        expect(s.name + " state", tm.state_projection, s.state_dim, 6);
        expect(s.name + " action", tm.action_projection, s.action_dim, 1);
        expect(s.name + " f1", tm.encoder.at(0), 4, 4);
        expect(s.name + " f2", tm.encoder.at(1), 4, 2);
        expect(s.name + " g1", tm.decoder.at(0), 4, 4);
        expect(s.name + " g2", tm.decoder.at(1), 4, 4);
        expect(s.name + " g3", tm.decoder.at(2), 4, 4);
        expect(s.name + " g4", tm.decoder.at(3), 4, s.effect_dim);

        Rng r2(8, streams::kInit);
        auto single = mtl::MultiTaskModel::build({s}, mtl::NetworkSpec::paper_default(Variant::SingleTask), r2);
        const auto& sm = single.task_modules(0);
        expect("single " + s.name + " state", sm.state_projection, s.state_dim, 4);
        expect("single " + s.name + " action", sm.action_projection, s.action_dim, 1);
        expect("single F1", single.shared_encoder()[0], 4, 4);
        expect("single F2", single.shared_encoder()[1], 4, 4);
        expect("single f1", sm.encoder.at(0), 4, 4);
        expect("single f2", sm.encoder.at(1), 4, 2);
        if (single.attention().model_dim != 2) mismatches.push_back("single MHA dim");
        expect("single g1", sm.decoder.at(0), 3, 4);
        expect("single g4", sm.decoder.at(3), 4, s.effect_dim);
        trio += single.parameter_count();
    }
    const std::size_t mt = multi.parameter_count();
    const double gap = std::abs(static_cast<double>(mt) - static_cast<double>(trio)) /
                       static_cast<double>(std::max(mt, trio));
    std::string tiers;
    bool tiers_ok = true;
    for (auto tier : {mtl::Tier::Low, mtl::Tier::Medium, mtl::Tier::High}) {
        const auto net = mtl::NetworkSpec::for_tier(tier, Variant::MultiTask, tasks);
        const double n = static_cast<double>(mtl::parameter_count(net, tasks));
        const double target = static_cast<double>(mtl::tier_target(tier));
        tiers_ok &= std::abs(n - target) / target <= 0.05;
        tiers += fmt(" %s=%.0f", mtl::to_string(tier).c_str(), n);
    }
    std::string detail = fmt("layer mismatches %zu; multi %zu vs single trio %zu params (gap %.2f%%, limit 1%%); tiers%s",
                             mismatches.size(), mt, trio, 100.0 * gap, tiers.c_str());
    for (const auto& m : mismatches) detail += "; " + m;
    return {mismatches.empty() && gap <= 0.01 && tiers_ok, detail};
}

// ---- directional reproductions ----------------------------------------------

struct Suite {
    std::vector<env::Dataset> data;
    RunConfig base;
    std::map<std::string, Aggregate> aggs;
    std::vector<harness::RunResult> lp_runs;
    double core_seconds = 0.0;  // wall time of the single-threaded LP/RAND/SINGLE runs
};

Aggregate run_aggregate(Suite& s, RunConfig c, std::vector<harness::RunResult>* keep = nullptr) {
    c.label = harness::default_label(c);
    auto results = harness::run_seeds(c, s.data);
    for (const auto& r : results) {
        if (r.log.aborted) throw NumericError(c.label + " seed " + std::to_string(r.log.seed) + ": " + r.log.failure);
    }
    auto agg = harness::aggregate(harness::logs_of(results), c.label);
    if (keep) *keep = std::move(results);
    return agg;
}

RunConfig with_strategy(RunConfig c, StrategyKind kind) {
    c.strategy.kind = kind;
    return c;
}

Verdict fig4_ordering(Suite& s) {
    RunConfig c = s.base;
    c.threads = 1;
    const auto t0 = Clock::now();
    s.aggs["lp"] = run_aggregate(s, with_strategy(c, StrategyKind::LP), &s.lp_runs);
    s.aggs["rand"] = run_aggregate(s, with_strategy(c, StrategyKind::Rand));
    s.aggs["single"] = run_aggregate(s, with_strategy(c, StrategyKind::Single));
    s.core_seconds = seconds_since(t0);
    const auto& lp = s.aggs["lp"].midpoint_overall;
    const auto& rnd = s.aggs["rand"].midpoint_overall;
    const auto& single = s.aggs["single"].midpoint_overall;
    int wins = 0;
    for (std::size_t i = 0; i < lp.size(); ++i) wins += lp[i] < single[i];
    const bool order = mean(lp) <= mean(rnd) && mean(rnd) <= mean(single);
    return {order && wins >= 8 && s.core_seconds < 900.0,
            fmt("midpoint MAE LP %.4f, RAND %.4f, SINGLE %.4f; LP beats SINGLE in %d/10 seeds; %.1f s on one core",
                mean(lp), mean(rnd), mean(single), wins, s.core_seconds)};
}

Verdict fig8b_energy(Suite& s) {
    std::vector<double> energy;
    std::string detail = "midpoint energy";
    for (double k : harness::kDefaultKs) {
        RunConfig c = with_strategy(s.base, StrategyKind::EMLP);
        c.strategy.k = k;
        const auto a = run_aggregate(s, c);
        energy.push_back(mean(a.midpoint_energy));
        detail += fmt(" k%.1f=%.0f", k, energy.back());
    }
    const double lp = mean(s.aggs["lp"].midpoint_energy);
    const double single = mean(s.aggs["single"].midpoint_energy);
    detail += fmt(" LP=%.0f SINGLE=%.0f", lp, single);
    bool nondecreasing = true;
    for (std::size_t i = 1; i < energy.size(); ++i) nondecreasing &= energy[i] >= energy[i - 1];
    const bool lp_max = lp >= *std::max_element(energy.begin(), energy.end()) && lp >= single;
    const bool single_ok = single <= 1.1 * energy.front();
    return {nondecreasing && lp_max && single_ok, detail};
}

Verdict fig6_blocked(Suite& s) {
    const double lp_final = mean(s.aggs["lp"].final_overall);
    const auto runs = harness::run_block_suite(s.base, s.data);
    bool all_ok = runs.size() == 6;
    std::string detail = fmt("LP final %.4f;", lp_final);
    for (const auto& r : runs) {
        const double fin = mean(r.aggregate.final_overall);
        std::size_t best = 0;
        for (const auto& d : r.forgetting) best = std::max(best, d.seeds_increased());
        const bool ok = lp_final <= fin && best >= 6;
        all_ok &= ok;
        detail += fmt(" %s final %.4f spike %zu/10%s;", r.aggregate.label.c_str(), fin, best, ok ? "" : " (x)");
    }
    return {all_ok, detail};
}

Verdict ablation_ordering(Suite& s) {
    std::map<harness::AblationMode, std::vector<double>> mid;
    mid[harness::AblationMode::Full] = s.aggs["lp"].midpoint_overall;
    for (auto mode : {harness::AblationMode::NoFlag, harness::AblationMode::NoAttention, harness::AblationMode::NoBoth}) {
        mid[mode] = run_aggregate(s, harness::apply_ablation(with_strategy(s.base, StrategyKind::LP), mode)).midpoint_overall;
    }
    const double full = mean(mid[harness::AblationMode::Full]);
    const double noflag = mean(mid[harness::AblationMode::NoFlag]);
    const double noattn = mean(mid[harness::AblationMode::NoAttention]);
    const double noboth = mean(mid[harness::AblationMode::NoBoth]);
    int best = 0;
    for (std::size_t i = 0; i < mid[harness::AblationMode::Full].size(); ++i) {
        const double f = mid[harness::AblationMode::Full][i];
        best += f < mid[harness::AblationMode::NoFlag][i] && f < mid[harness::AblationMode::NoAttention][i] &&
                f < mid[harness::AblationMode::NoBoth][i];
    }
    const bool order = full <= noflag && full <= noattn && noflag <= noboth && noattn <= noboth;
    return {order && best >= 7, fmt("midpoint MAE full %.4f, no-flag %.4f, no-attn %.4f, no-both %.4f; full strictly best in %d/10 seeds",
                                    full, noflag, noattn, noboth, best)};
}

Verdict transfer_sanity(Suite& s, const std::filesystem::path& out_dir) {
    std::vector<mtl::MultiTaskModel> models;
    for (const auto& r : s.lp_runs) models.push_back(r.models.front());
    const auto report = harness::run_transfer_analysis(models, s.base.tasks, s.data);
    const std::size_t m = s.base.tasks.size();
    bool noop_zero = true;
    std::size_t groups = 0;
    for (const auto& c : report.cells) {
        if (c.source == m) {
            ++groups;
            for (double v : c.per_seed) noop_zero &= v == 0.0;
        }
    }
    // Own row zeroed on the whole eval split of each task, averaged over the checkpoints.
    bool own_nonzero = true;
    double smallest = INFINITY;
    std::size_t constant_pairs = 0;
    for (std::size_t t = 0; t < m; ++t) {
        const auto& d = s.data[t];
        const std::size_t start = env::train_split_size(d.size());
        std::vector<std::size_t> rows(d.size() - start);
        std::iota(rows.begin(), rows.end(), start);
        const auto b = env::gather(d, rows);
        std::vector<double> delta;
        for (const auto& model : models) {
            const double full = mtl::batch_loss(model.forward(t, b.states, b.actions).prediction, b.effects).mae;
            const double abl =
                mtl::batch_loss(mtl::forward_transfer_ablated(model, t, t, b.states, b.actions).prediction, b.effects).mae;
            delta.push_back(abl - full);
            constant_pairs += abl == full;
        }
        const double mag = std::abs(mean(delta));
        smallest = std::min(smallest, mag);
        own_nonzero &= mag > 0.0;
    }
    const auto path = out_dir / "transfer_matrix.csv";
    harness::write_transfer_matrix_csv(report, path);
    const auto table = harness::read_csv(path);
    bool layout = table.header.size() == 1 + 2 * m * (m - 1) && table.rows.size() == 6 + 36;
    for (std::size_t t = 0; t < m; ++t)
        for (std::size_t src = 0; src < m; ++src)
            if (src != t) layout &= table.has_column(report.task_names[src] + "->" + report.task_names[t] + "_std");
    bool seeds_ok = true;
    for (const auto& c : report.cells) seeds_ok &= c.per_seed.size() == models.size();
    return {noop_zero && own_nonzero && layout && seeds_ok,
            fmt("no-op dL exactly 0 in %zu groups: %s; own row min |seed-mean dL| %.3g (%zu of %zu seed/task pairs unchanged); "
                "matrix %zu groups x %zu columns, %zu seeds per cell",
                groups, noop_zero ? "yes" : "no", smallest, constant_pairs, m * models.size(), table.rows.size(),
                table.header.size(), models.size())};
}

Verdict allocation_nonuniformity(Suite& s) {
    const double lp = harness::allocation_variance(s.aggs["lp"]);
    const double rnd = harness::allocation_variance(s.aggs["rand"]);
    return {lp >= 2.0 * rnd, fmt("count variance LP %.1f vs RAND %.1f (ratio %.2f)", lp, rnd, lp / rnd)};
}

}  // namespace

int main() {
    const auto out_dir = std::filesystem::current_path() / "acceptance_out";
    std::filesystem::create_directories(out_dir);

    Suite suite;
    suite.base.epochs = 1500;
    suite.data = harness::prepare_datasets(suite.base);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"gradient oracle", gradient_oracle},
        {"attention oracle", attention_oracle},
        {"optimizer oracle", optimizer_oracle},
        {"LP closed form", lp_closed_form},
        {"EMLP limits", emlp_limits},
        {"epsilon-greedy frequency", epsilon_frequency},
        {"schedule exactness", [&] { return schedule_exactness(suite.data); }},
        {"architecture conformance", architecture_conformance},
        {"interleaved vs single ordering", [&] { return fig4_ordering(suite); }},
        {"energy across k", [&] { return fig8b_energy(suite); }},
        {"interleaved vs blocked", [&] { return fig6_blocked(suite); }},
        {"ablation ordering", [&] { return ablation_ordering(suite); }},
        {"transfer report sanity", [&] { return transfer_sanity(suite, out_dir); }},
        {"allocation non-uniformity", [&] { return allocation_nonuniformity(suite); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        const auto t0 = Clock::now();
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("%s %2zu %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    v.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
