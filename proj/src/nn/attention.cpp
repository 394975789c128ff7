#include "imtl/nn/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "imtl/errors.hpp"

namespace imtl::nn {

AttentionBlock::AttentionBlock(std::size_t model_dim_, std::size_t heads_, std::size_t key_dim_)
    : model_dim(model_dim_), heads(heads_), key_dim(key_dim_) {
    if (model_dim == 0 || heads == 0 || key_dim == 0) {
        throw ConfigError("attention dims must be >= 1");
    }
    for (std::size_t h = 0; h < heads; ++h) {
        w_query.emplace_back(model_dim, key_dim);
        w_key.emplace_back(model_dim, key_dim);
        w_value.emplace_back(model_dim, key_dim);
        grad_query.emplace_back(model_dim, key_dim);
        grad_key.emplace_back(model_dim, key_dim);
        grad_value.emplace_back(model_dim, key_dim);
    }
    w_out = Matrix(heads * key_dim, model_dim);
    grad_out = Matrix(heads * key_dim, model_dim);
}

AttentionBlock AttentionBlock::uniform_init(std::size_t model_dim, std::size_t heads,
                                            std::size_t key_dim, Rng& rng) {
    AttentionBlock block(model_dim, heads, key_dim);
    const double in_bound = 1.0 / std::sqrt(static_cast<double>(model_dim));
    for (std::size_t h = 0; h < heads; ++h) {
        for (auto* m : {&block.w_query[h], &block.w_key[h], &block.w_value[h]}) {
            for (double& w : m->values()) w = rng.uniform(-in_bound, in_bound);
        }
    }
    const double out_bound = 1.0 / std::sqrt(static_cast<double>(heads * key_dim));
    for (double& w : block.w_out.values()) w = rng.uniform(-out_bound, out_bound);
    return block;
}

AttentionBlock AttentionBlock::identity(std::size_t model_dim) {
    AttentionBlock block(model_dim, 1, model_dim);
    for (std::size_t i = 0; i < model_dim; ++i) {
        block.w_query[0](i, i) = 1.0;
        block.w_key[0](i, i) = 1.0;
        block.w_value[0](i, i) = 1.0;
        block.w_out(i, i) = 1.0;
    }
    return block;
}

std::size_t AttentionBlock::parameter_count() const noexcept {
    return 3 * heads * model_dim * key_dim + w_out.size();
}

void AttentionBlock::zero_grad() {
    for (std::size_t h = 0; h < heads; ++h) {
        grad_query[h].fill(0.0);
        grad_key[h].fill(0.0);
        grad_value[h].fill(0.0);
    }
    grad_out.fill(0.0);
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.size());
    if (logits.empty()) return p;
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        p[j] = std::exp(logits[j] - mx);
        sum += p[j];
    }
    for (double& v : p) v /= sum;
    return p;
}

namespace {

// out (n x k) = in (n x d) * w (d x k)
Matrix project(const Matrix& in, const Matrix& w) {
    Matrix out(in.rows(), w.cols());
    for (std::size_t r = 0; r < in.rows(); ++r) {
        for (std::size_t i = 0; i < in.cols(); ++i) {
            const double x = in(r, i);
            if (x == 0.0) continue;
            const auto wr = w.row(i);
            auto o = out.row(r);
            for (std::size_t c = 0; c < w.cols(); ++c) o[c] += x * wr[c];
        }
    }
    return out;
}

}  // namespace

std::vector<double> attention_forward(const AttentionBlock& block, std::span<const double> query,
                                      const Matrix& keys, const Matrix& values,
                                      AttentionTrace* trace) {
    const std::size_t d = block.model_dim;
    const std::size_t dk = block.key_dim;
    if (query.size() != d || keys.cols() != d || values.cols() != d) {
        throw ConfigError("attention input width must equal model dim " + std::to_string(d));
    }
    if (keys.rows() != values.rows() || keys.rows() == 0) {
        throw ConfigError("attention keys/values row count mismatch");
    }
    const std::size_t m = keys.rows();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    const Matrix qmat = Matrix::row_vector(query);

    std::vector<double> concat(block.heads * dk, 0.0);
    if (trace) {
        trace->query.assign(query.begin(), query.end());
        trace->keys = keys;
        trace->values = values;
        trace->q.clear();
        trace->k.clear();
        trace->v.clear();
        trace->weights.clear();
    }
    for (std::size_t h = 0; h < block.heads; ++h) {
        Matrix qh = project(qmat, block.w_query[h]);
        Matrix kh = project(keys, block.w_key[h]);
        Matrix vh = project(values, block.w_value[h]);
        std::vector<double> logits(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < dk; ++c) acc += qh(0, c) * kh(j, c);
            logits[j] = acc * scale;
        }
        std::vector<double> p = softmax(logits);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t c = 0; c < dk; ++c) concat[h * dk + c] += p[j] * vh(j, c);
        }
        if (trace) {
            trace->q.emplace_back(qh.values().begin(), qh.values().end());
            trace->k.push_back(std::move(kh));
            trace->v.push_back(std::move(vh));
            trace->weights.push_back(std::move(p));
        }
    }
    std::vector<double> out(d, 0.0);
    for (std::size_t i = 0; i < concat.size(); ++i) {
        const auto wr = block.w_out.row(i);
        for (std::size_t c = 0; c < d; ++c) out[c] += concat[i] * wr[c];
    }
    if (trace) {
        trace->concat = concat;
        trace->output = out;
    }
    return out;
}

std::vector<double> attention_forward(const AttentionBlock& block, std::span<const double> query,
                                      const Matrix& keys, const Matrix& values, ForwardCache& cache,
                                      std::string layer_id, AttentionTrace* trace) {
    auto out = attention_forward(block, query, keys, values, trace);
    cache.append(std::move(layer_id), Matrix::row_vector(out));
    return out;
}

AttentionInputGrads attention_backward(AttentionBlock& block, const AttentionTrace& trace,
                                       std::span<const double> grad_output, bool accumulate) {
    const std::size_t d = block.model_dim;
    const std::size_t dk = block.key_dim;
    const std::size_t m = trace.keys.rows();
    if (grad_output.size() != d || trace.q.size() != block.heads) {
        throw InternalError("attention_backward: trace does not match block");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    AttentionInputGrads g{std::vector<double>(d, 0.0), Matrix(m, d), Matrix(m, d)};

    // out = concat * W_O
    std::vector<double> d_concat(block.heads * dk, 0.0);
    for (std::size_t i = 0; i < d_concat.size(); ++i) {
        const auto wr = block.w_out.row(i);
        double acc = 0.0;
        for (std::size_t c = 0; c < d; ++c) acc += grad_output[c] * wr[c];
        d_concat[i] = acc;
        if (accumulate) {
            auto gr = block.grad_out.row(i);
            for (std::size_t c = 0; c < d; ++c) gr[c] += trace.concat[i] * grad_output[c];
        }
    }

    for (std::size_t h = 0; h < block.heads; ++h) {
        const auto& p = trace.weights[h];
        const auto& qh = trace.q[h];
        const Matrix& kh = trace.k[h];
        const Matrix& vh = trace.v[h];
        const std::span<const double> d_head(d_concat.data() + h * dk, dk);

        // head = sum_j p_j v_j
        Matrix d_vh(m, dk);
        std::vector<double> d_p(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < dk; ++c) {
                d_vh(j, c) = p[j] * d_head[c];
                acc += d_head[c] * vh(j, c);
            }
            d_p[j] = acc;
        }
        // softmax jacobian
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += p[j] * d_p[j];
        std::vector<double> d_logit(m);
        for (std::size_t j = 0; j < m; ++j) d_logit[j] = p[j] * (d_p[j] - dot) * scale;

        std::vector<double> d_qh(dk, 0.0);
        Matrix d_kh(m, dk);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t c = 0; c < dk; ++c) {
                d_qh[c] += d_logit[j] * kh(j, c);
                d_kh(j, c) = d_logit[j] * qh[c];
            }
        }

        // projections: x_proj = x * W  =>  dW += x^T d, dx = d W^T
        for (std::size_t i = 0; i < d; ++i) {
            const auto wq = block.w_query[h].row(i);
            double acc = 0.0;
            for (std::size_t c = 0; c < dk; ++c) acc += d_qh[c] * wq[c];
            g.query[i] += acc;
            if (accumulate) {
                auto gq = block.grad_query[h].row(i);
                for (std::size_t c = 0; c < dk; ++c) gq[c] += trace.query[i] * d_qh[c];
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < d; ++i) {
                const auto wk = block.w_key[h].row(i);
                const auto wv = block.w_value[h].row(i);
                double acc_k = 0.0;
                double acc_v = 0.0;
                for (std::size_t c = 0; c < dk; ++c) {
                    acc_k += d_kh(j, c) * wk[c];
                    acc_v += d_vh(j, c) * wv[c];
                }
                g.keys(j, i) += acc_k;
                g.values(j, i) += acc_v;
                if (accumulate) {
                    auto gk = block.grad_key[h].row(i);
                    auto gv = block.grad_value[h].row(i);
                    const double xk = trace.keys(j, i);
                    const double xv = trace.values(j, i);
                    for (std::size_t c = 0; c < dk; ++c) {
                        gk[c] += xk * d_kh(j, c);
                        gv[c] += xv * d_vh(j, c);
                    }
                }
            }
        }
    }
    return g;
}

}  // namespace imtl::nn
