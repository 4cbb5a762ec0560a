// SPDX-License-Identifier: Apache-2.0
//
// Three-layer fully-connected classifier with leaky-rectifier activations,
// per-sample standardization of the hidden pre-activations, a softmax
// head and clamped cross-entropy loss. Training is plain SGD with a
// per-layer Frobenius clip on each weight update, single threaded and
// deterministic for a given seed.

#ifndef TWR_NN_HPP
#define TWR_NN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "twr/common.hpp"
#include "twr/matrix.hpp"
#include "twr/rng.hpp"

namespace twr {

inline constexpr std::size_t kNumClasses = 12;
inline constexpr std::size_t kHidden1 = 256;
inline constexpr std::size_t kHidden2 = 128;
inline constexpr double kLeakySlope = 0.1;
inline constexpr double kNormEpsilon = 1e-6;
inline constexpr double kLossFloor = 1e-7;
/// Bound of the clamped cross-entropy loss, -ln(kLossFloor).
inline const double kLossBound = -std::log(kLossFloor);
/// Lipschitz constant of softmax cross-entropy w.r.t. the logits.
inline const double kLossLipschitz = std::sqrt(2.0);

enum class FeatureNorm : int { none = 0, standardize = 1 };

struct MLPModel {
    RealMatrix w1, w2, w3;  // h1 x d_in, h2 x h1, classes x h2
    FeatureNorm feature_norm = FeatureNorm::standardize;

    std::size_t d_in() const { return w1.cols(); }
    std::size_t n_classes() const { return w3.rows(); }
};

/// Uniform +/- 1/sqrt(fan_in) scaled by 0.1, drawn in a fixed order.
inline MLPModel make_mlp(std::size_t d_in, std::size_t h1, std::size_t h2,
                         std::size_t n_classes, std::uint64_t seed,
                         FeatureNorm norm = FeatureNorm::standardize) {
    Rng rng(mix_seed(seed, 0x696e6974ULL));
    MLPModel m;
    m.feature_norm = norm;
    auto init = [&](std::size_t rows, std::size_t cols) {
        RealMatrix w(rows, cols);
        const double lim = 1.0 / std::sqrt(static_cast<double>(cols));
        for (auto& v : w.storage()) v = 0.1 * rng.uniform(-lim, lim);
        return w;
    };
    m.w1 = init(h1, d_in);
    m.w2 = init(h2, h1);
    m.w3 = init(n_classes, h2);
    return m;
}

/// Experiment-scale instantiation: 8192 (full maps) or 180 (corner cloud)
/// inputs, hidden widths 256/128 shared between the two variants.
inline MLPModel make_experiment_mlp(std::size_t d_in, std::uint64_t seed) {
    if (d_in != 8192 && d_in != 180)
        throw DataError("make_experiment_mlp: d_in must be 8192 or 180");
    return make_mlp(d_in, kHidden1, kHidden2, kNumClasses, seed);
}

namespace detail {

/// C (r x n) += A (r x k) * B (k x n), all row-major. k/j blocked with a
/// 4-row register kernel; accumulation is in ascending k order so the
/// result matches a naive triple loop bit for bit.
inline void gemm_nn(const double* __restrict A, const double* __restrict B,
                    double* __restrict C, std::size_t r, std::size_t k, std::size_t n) {
    constexpr std::size_t KB = 256, JB = 512, IB = 4;
    for (std::size_t k0 = 0; k0 < k; k0 += KB) {
        const std::size_t k1 = std::min(k0 + KB, k);
        for (std::size_t j0 = 0; j0 < n; j0 += JB) {
            const std::size_t j1 = std::min(j0 + JB, n);
            std::size_t i = 0;
            for (; i + IB <= r; i += IB) {
                const double* a0 = A + (i + 0) * k;
                const double* a1 = A + (i + 1) * k;
                const double* a2 = A + (i + 2) * k;
                const double* a3 = A + (i + 3) * k;
                double* c0 = C + (i + 0) * n;
                double* c1 = C + (i + 1) * n;
                double* c2 = C + (i + 2) * n;
                double* c3 = C + (i + 3) * n;
                for (std::size_t t = k0; t < k1; ++t) {
                    const double v0 = a0[t], v1 = a1[t], v2 = a2[t], v3 = a3[t];
                    const double* __restrict b = B + t * n;
                    for (std::size_t j = j0; j < j1; ++j) {
                        const double bj = b[j];
                        c0[j] += v0 * bj;
                        c1[j] += v1 * bj;
                        c2[j] += v2 * bj;
                        c3[j] += v3 * bj;
                    }
                }
            }
            for (; i < r; ++i) {
                const double* a = A + i * k;
                double* c = C + i * n;
                for (std::size_t t = k0; t < k1; ++t) {
                    const double av = a[t];
                    const double* b = B + t * n;
                    for (std::size_t j = j0; j < j1; ++j) c[j] += av * b[j];
                }
            }
        }
    }
}

/// C (r x n) += A (r x k) * B^T where B is n x k row-major (row dots).
inline void gemm_nt(const double* A, const double* B, double* C, std::size_t r,
                    std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < r; ++i) {
        const double* a = A + i * k;
        double* c = C + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* b = B + j * k;
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) acc += a[t] * b[t];
            c[j] += acc;
        }
    }
}

/// C (r x n) += A^T * B where A is k x r and B is k x n, both row-major.
inline void gemm_tn(const double* A, const double* B, double* C, std::size_t r,
                    std::size_t k, std::size_t n) {
    for (std::size_t t = 0; t < k; ++t) {
        const double* a = A + t * r;
        const double* b = B + t * n;
        for (std::size_t i = 0; i < r; ++i) {
            const double av = a[i];
            if (av == 0.0) continue;
            double* c = C + i * n;
            for (std::size_t j = 0; j < n; ++j) c[j] += av * b[j];
        }
    }
}

/// Per-column standardization: y = (z - mean) / sqrt(var + eps).
/// Stores 1/sigma per column for the backward pass.
inline void standardize_columns(RealMatrix& z, std::vector<double>& inv_sigma) {
    const std::size_t h = z.rows(), n = z.cols();
    inv_sigma.assign(n, 1.0);
    std::vector<double> mean(n, 0.0), var(n, 0.0);
    for (std::size_t i = 0; i < h; ++i) {
        const double* row = z.row(i);
        for (std::size_t j = 0; j < n; ++j) mean[j] += row[j];
    }
    for (std::size_t j = 0; j < n; ++j) mean[j] /= static_cast<double>(h);
    for (std::size_t i = 0; i < h; ++i) {
        const double* row = z.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double d = row[j] - mean[j];
            var[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        inv_sigma[j] = 1.0 / std::sqrt(var[j] / static_cast<double>(h) + kNormEpsilon);
    for (std::size_t i = 0; i < h; ++i) {
        double* row = z.row(i);
        for (std::size_t j = 0; j < n; ++j) row[j] = (row[j] - mean[j]) * inv_sigma[j];
    }
}

/// Gradient of the standardization, per column:
/// dz = inv_sigma * (g - mean(g) - y * mean(g .* y)).
inline void standardize_backward(RealMatrix& g, const RealMatrix& y,
                                 const std::vector<double>& inv_sigma) {
    const std::size_t h = g.rows(), n = g.cols();
    std::vector<double> gm(n, 0.0), gym(n, 0.0);
    for (std::size_t i = 0; i < h; ++i) {
        const double* grow = g.row(i);
        const double* yrow = y.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            gm[j] += grow[j];
            gym[j] += grow[j] * yrow[j];
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        gm[j] /= static_cast<double>(h);
        gym[j] /= static_cast<double>(h);
    }
    for (std::size_t i = 0; i < h; ++i) {
        double* grow = g.row(i);
        const double* yrow = y.row(i);
        for (std::size_t j = 0; j < n; ++j)
            grow[j] = inv_sigma[j] * (grow[j] - gm[j] - yrow[j] * gym[j]);
    }
}

inline void leaky_forward(RealMatrix& y) {
    for (auto& v : y.storage())
        if (v < 0.0) v *= kLeakySlope;
}

}  // namespace detail

/// Intermediate activations of one batch forward pass.
struct ForwardCache {
    RealMatrix y1, a1, y2, a2, probs;       // y = standardized pre-activation
    std::vector<double> inv_sigma1, inv_sigma2;
};

/// Batch forward pass. x is d_in x n (one column per sample); returns
/// class probabilities as classes x n.
inline RealMatrix forward_batch(const MLPModel& model, const RealMatrix& x,
                                ForwardCache* cache = nullptr) {
    const std::size_t n = x.cols();
    if (x.rows() != model.d_in()) throw DataError("forward: input dimension mismatch");
    for (double v : x.storage())
        if (!std::isfinite(v)) throw DataError("forward: non-finite input");

    RealMatrix y1(model.w1.rows(), n);
    detail::gemm_nn(model.w1.data(), x.data(), y1.data(), model.w1.rows(), model.w1.cols(), n);
    std::vector<double> inv_sigma1, inv_sigma2;
    if (model.feature_norm == FeatureNorm::standardize)
        detail::standardize_columns(y1, inv_sigma1);
    RealMatrix a1 = y1;
    detail::leaky_forward(a1);

    RealMatrix y2(model.w2.rows(), n);
    detail::gemm_nn(model.w2.data(), a1.data(), y2.data(), model.w2.rows(), model.w2.cols(), n);
    if (model.feature_norm == FeatureNorm::standardize)
        detail::standardize_columns(y2, inv_sigma2);
    RealMatrix a2 = y2;
    detail::leaky_forward(a2);

    RealMatrix z3(model.w3.rows(), n);
    detail::gemm_nn(model.w3.data(), a2.data(), z3.data(), model.w3.rows(), model.w3.cols(), n);

    // column-wise stable softmax
    const std::size_t c = z3.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double mx = z3(0, j);
        for (std::size_t i = 1; i < c; ++i) mx = std::max(mx, z3(i, j));
        double sum = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            const double e = std::exp(z3(i, j) - mx);
            z3(i, j) = e;
            sum += e;
        }
        for (std::size_t i = 0; i < c; ++i) z3(i, j) /= sum;
    }

    if (cache) {
        cache->y1 = std::move(y1);
        cache->a1 = std::move(a1);
        cache->y2 = std::move(y2);
        cache->a2 = std::move(a2);
        cache->probs = z3;
        cache->inv_sigma1 = std::move(inv_sigma1);
        cache->inv_sigma2 = std::move(inv_sigma2);
    }
    return z3;
}

/// Single-sample forward pass; probabilities sum to one.
inline std::vector<double> forward(const MLPModel& model, const std::vector<double>& x) {
    RealMatrix xm(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) xm(i, 0) = x[i];
    const RealMatrix p = forward_batch(model, xm);
    std::vector<double> out(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i) out[i] = p(i, 0);
    return out;
}

/// Clamped cross-entropy: -ln(max(p_label, 1e-7)), bounded by kLossBound.
inline double cross_entropy(const std::vector<double>& probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
        throw DataError("cross_entropy: label out of range");
    return -std::log(std::max(probs[static_cast<std::size_t>(label)], kLossFloor));
}

struct Gradients {
    RealMatrix g1, g2, g3;
};

/// Exact gradients of the mean batch loss with respect to each layer.
inline Gradients backward(const MLPModel& model, const RealMatrix& x,
                          const std::vector<int>& labels) {
    const std::size_t n = x.cols();
    if (n == 0) throw DataError("backward: empty batch");
    if (labels.size() != n) throw DataError("backward: label count mismatch");

    ForwardCache cache;
    forward_batch(model, x, &cache);
    const std::size_t c = model.n_classes();

    // d(mean loss)/d(logits) = (p - onehot)/n; clamped samples contribute zero
    RealMatrix dz3 = cache.probs;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t lbl = static_cast<std::size_t>(labels[j]);
        if (lbl >= c) throw DataError("backward: label out of range");
        if (cache.probs(lbl, j) <= kLossFloor) {
            for (std::size_t i = 0; i < c; ++i) dz3(i, j) = 0.0;
            continue;
        }
        dz3(lbl, j) -= 1.0;
        for (std::size_t i = 0; i < c; ++i) dz3(i, j) *= inv_n;
    }

    Gradients g;
    g.g3 = RealMatrix(c, model.w3.cols());
    detail::gemm_nt(dz3.data(), cache.a2.data(), g.g3.data(), c, n, model.w3.cols());

    RealMatrix da2(model.w2.rows(), n);
    detail::gemm_tn(model.w3.data(), dz3.data(), da2.data(), model.w2.rows(), c, n);
    for (std::size_t i = 0; i < da2.size(); ++i)
        if (cache.y2.storage()[i] < 0.0) da2.storage()[i] *= kLeakySlope;
    if (model.feature_norm == FeatureNorm::standardize)
        detail::standardize_backward(da2, cache.y2, cache.inv_sigma2);

    g.g2 = RealMatrix(model.w2.rows(), model.w2.cols());
    detail::gemm_nt(da2.data(), cache.a1.data(), g.g2.data(), model.w2.rows(), n, model.w2.cols());

    RealMatrix da1(model.w1.rows(), n);
    detail::gemm_tn(model.w2.data(), da2.data(), da1.data(), model.w1.rows(), model.w2.rows(), n);
    for (std::size_t i = 0; i < da1.size(); ++i)
        if (cache.y1.storage()[i] < 0.0) da1.storage()[i] *= kLeakySlope;
    if (model.feature_norm == FeatureNorm::standardize)
        detail::standardize_backward(da1, cache.y1, cache.inv_sigma1);

    // dW1 = da1 * x^T via the blocked kernel; transposing x first keeps
    // the wide d_in axis contiguous in the inner loop
    RealMatrix xt(n, model.w1.cols());
    for (std::size_t f = 0; f < model.w1.cols(); ++f)
        for (std::size_t j = 0; j < n; ++j) xt(j, f) = x(f, j);
    g.g1 = RealMatrix(model.w1.rows(), model.w1.cols());
    detail::gemm_nn(da1.data(), xt.data(), g.g1.data(), model.w1.rows(), n, model.w1.cols());
    return g;
}

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch = 32;
    double lr = 0.00147;
    std::size_t eval_every = 10;  // optimizer steps between evaluations
    double clip_fro = 1.0;        // per-layer Frobenius cap on each update
    std::uint64_t seed = 1;

    void validate() const {
        if (epochs == 0 || batch == 0 || eval_every == 0 || !(lr >= 0.0) ||
            !(clip_fro > 0.0))
            throw DataError("TrainConfig: all parameters must be positive");
    }
};

/// Apply -lr * grad per layer, rescaled so each update's Frobenius norm
/// never exceeds clip_fro; returns the applied per-layer norms.
inline std::array<double, 3> sgd_step(MLPModel& model, const Gradients& grads,
                                      const TrainConfig& cfg) {
    std::array<double, 3> norms{};
    const RealMatrix* gs[3] = {&grads.g1, &grads.g2, &grads.g3};
    RealMatrix* ws[3] = {&model.w1, &model.w2, &model.w3};
    for (int l = 0; l < 3; ++l) {
        if (gs[l]->rows() != ws[l]->rows() || gs[l]->cols() != ws[l]->cols())
            throw DataError("sgd_step: gradient shape mismatch");
        double sq = 0.0;
        for (double v : gs[l]->storage()) sq += (cfg.lr * v) * (cfg.lr * v);
        double nrm = std::sqrt(sq);
        double scale = -cfg.lr;
        if (nrm > cfg.clip_fro) scale *= cfg.clip_fro / nrm;
        double applied_sq = 0.0;
        for (std::size_t i = 0; i < ws[l]->size(); ++i) {
            const double delta = scale * gs[l]->storage()[i];
            ws[l]->storage()[i] += delta;
            applied_sq += delta * delta;
        }
        norms[l] = std::sqrt(applied_sq);
    }
    return norms;
}

/// One labelled split: features stored column-per-sample.
struct Split {
    RealMatrix x;             // d_in x n
    std::vector<int> labels;  // n, values 0..11
    double height = 0.0;      // m, tester height tag

    std::size_t n() const { return labels.size(); }
};

struct Dataset {
    Split train, val, test1, test2;
    std::size_t d_in = 0;
};

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

/// Accuracy (argmax, first index wins ties) and mean clamped
/// cross-entropy over a split.
inline EvalResult evaluate(const MLPModel& model, const Split& split) {
    if (split.n() == 0) throw DataError("evaluate: empty split");
    const RealMatrix p = forward_batch(model, split.x);
    EvalResult r;
    std::size_t correct = 0;
    double loss = 0.0;
    for (std::size_t j = 0; j < split.n(); ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < p.rows(); ++i)
            if (p(i, j) > p(best, j)) best = i;
        if (static_cast<int>(best) == split.labels[j]) ++correct;
        loss -= std::log(std::max(p(static_cast<std::size_t>(split.labels[j]), j), kLossFloor));
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(split.n());
    r.mean_loss = loss / static_cast<double>(split.n());
    return r;
}

struct TrainTrace {
    struct EvalPoint {
        std::size_t step;
        EvalResult train, val, test1, test2;
    };
    std::vector<EvalPoint> evals;
    std::vector<std::array<double, 3>> step_norms;  // per-step ||dW_i||_F
    std::size_t n_rounds = 0;
    std::size_t m_train = 0;
};

/// SGD training loop: fixed per-epoch shuffle, evaluation of all four
/// splits every eval_every steps (plus step 0 and the final step).
inline TrainTrace train(MLPModel& model, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.train.n() == 0 || data.val.n() == 0 || data.test1.n() == 0 ||
        data.test2.n() == 0)
        throw DataError("train: every split must be non-empty");
    if (data.train.x.rows() != model.d_in())
        throw DataError("train: dataset dimension does not match the model");

    TrainTrace trace;
    trace.m_train = data.train.n();
    const std::size_t batches_per_epoch = (data.train.n() + cfg.batch - 1) / cfg.batch;
    trace.n_rounds = cfg.epochs * batches_per_epoch;

    // all four splits concatenated into one eval matrix so each
    // checkpoint costs a single batched forward pass
    const Split* splits[4] = {&data.train, &data.val, &data.test1, &data.test2};
    std::size_t n_eval = 0;
    for (const Split* s : splits) n_eval += s->n();
    RealMatrix eval_x(model.d_in(), n_eval);
    std::vector<int> eval_labels(n_eval);
    std::array<std::size_t, 5> bounds{};
    {
        std::size_t col = 0;
        for (int s = 0; s < 4; ++s) {
            bounds[std::size_t(s)] = col;
            for (std::size_t i = 0; i < splits[s]->n(); ++i, ++col) {
                for (std::size_t f = 0; f < model.d_in(); ++f)
                    eval_x(f, col) = splits[s]->x(f, i);
                eval_labels[col] = splits[s]->labels[i];
            }
        }
        bounds[4] = col;
    }

    auto record = [&](std::size_t step) {
        const RealMatrix p = forward_batch(model, eval_x);
        TrainTrace::EvalPoint pt;
        pt.step = step;
        EvalResult* results[4] = {&pt.train, &pt.val, &pt.test1, &pt.test2};
        for (int s = 0; s < 4; ++s) {
            std::size_t correct = 0;
            double loss = 0.0;
            for (std::size_t j = bounds[std::size_t(s)]; j < bounds[std::size_t(s) + 1]; ++j) {
                std::size_t best = 0;
                for (std::size_t i = 1; i < p.rows(); ++i)
                    if (p(i, j) > p(best, j)) best = i;
                if (int(best) == eval_labels[j]) ++correct;
                loss -= std::log(
                    std::max(p(std::size_t(eval_labels[j]), j), kLossFloor));
            }
            const double n = double(bounds[std::size_t(s) + 1] - bounds[std::size_t(s)]);
            results[s]->accuracy = double(correct) / n;
            results[s]->mean_loss = loss / n;
        }
        trace.evals.push_back(pt);
    };
    record(0);

    Rng shuffle_rng(mix_seed(cfg.seed, 0x73687566ULL));
    std::vector<std::size_t> order(data.train.n());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const std::size_t d = model.d_in();
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            const std::size_t lo = b * cfg.batch;
            const std::size_t hi = std::min(lo + cfg.batch, data.train.n());
            const std::size_t bs = hi - lo;
            RealMatrix xb(d, bs);
            std::vector<int> yb(bs);
            for (std::size_t s = 0; s < bs; ++s) {
                const std::size_t src = order[lo + s];
                for (std::size_t f = 0; f < d; ++f) xb(f, s) = data.train.x(f, src);
                yb[s] = data.train.labels[src];
            }
            const Gradients g = backward(model, xb, yb);
            trace.step_norms.push_back(sgd_step(model, g, cfg));
            ++step;
            if (step % cfg.eval_every == 0) record(step);
        }
    }
    if (trace.evals.back().step != step) record(step);
    return trace;
}

// --- checkpoint format: magic "TWRMLP1\0", then per layer
// --- rows:u32-LE, cols:u32-LE, data f64-LE row-major

inline constexpr char kModelMagic[8] = {'T', 'W', 'R', 'M', 'L', 'P', '1', '\0'};

inline void save_model(const MLPModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_model: cannot open " + path);
    out.write(kModelMagic, 8);
    for (const RealMatrix* w : {&model.w1, &model.w2, &model.w3}) {
        const std::uint32_t r = static_cast<std::uint32_t>(w->rows());
        const std::uint32_t c = static_cast<std::uint32_t>(w->cols());
        out.write(reinterpret_cast<const char*>(&r), 4);
        out.write(reinterpret_cast<const char*>(&c), 4);
        out.write(reinterpret_cast<const char*>(w->data()),
                  static_cast<std::streamsize>(w->size() * sizeof(double)));
    }
    if (!out) throw DataError("save_model: write failed for " + path);
}

inline MLPModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_model: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kModelMagic, 8) != 0)
        throw DataError("load_model: bad magic in " + path);
    MLPModel m;
    for (RealMatrix* w : {&m.w1, &m.w2, &m.w3}) {
        std::uint32_t r = 0, c = 0;
        in.read(reinterpret_cast<char*>(&r), 4);
        in.read(reinterpret_cast<char*>(&c), 4);
        if (!in || r == 0 || c == 0) throw DataError("load_model: bad layer header");
        *w = RealMatrix(r, c);
        in.read(reinterpret_cast<char*>(w->data()),
                static_cast<std::streamsize>(w->size() * sizeof(double)));
        if (!in) throw DataError("load_model: truncated layer data");
        if (!all_finite(*w)) throw DataError("load_model: non-finite weights");
    }
    return m;
}

}  // namespace twr

#endif  // TWR_NN_HPP
