// SPDX-License-Identifier: Apache-2.0
//
// Generalization error bound evaluation. Collects the spectral and
// Frobenius quantities of a trained model, forms the width/conditioning
// amplifier Q = (2*(beta/alpha)*omega*kappa^2)^3 and evaluates
//
//   GEB = sqrt( (B^2 + 12*B*M*L'*sqrt(h) * (C^3*prod(lambda_i)
//         + sqrt(Q * (prod(1 + N/||W_i||_F^2) - 1)))) / (2*M*delta) )
//
// for the full-feature and the corner-reduced model, together with the
// two proof-side comparisons and the relaxed width comparison
// sqrt(omega_reduced^3) vs sqrt(omega^3) - 1. Inner terms switch to
// log-space arithmetic whenever Q overflows the linear range.

#ifndef TWR_BOUND_HPP
#define TWR_BOUND_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "twr/common.hpp"
#include "twr/matrix.hpp"
#include "twr/nn.hpp"

namespace twr {

/// Largest singular value by power iteration on W^T W (implicit),
/// deterministic all-ones start, 1e-10 relative-change stop.
inline double spectral_norm(const RealMatrix& w, std::size_t max_iter = 5000,
                            double tol = 1e-10) {
    if (w.empty()) throw DataError("spectral_norm: empty matrix");
    if (!all_finite(w)) throw DataError("spectral_norm: non-finite entries");
    const std::size_t r = w.rows(), c = w.cols();

    std::vector<double> v(c, 1.0 / std::sqrt(static_cast<double>(c)));
    std::vector<double> u(r, 0.0);
    double lambda = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < r; ++i) {
            const double* row = w.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < c; ++j) acc += row[j] * v[j];
            u[i] = acc;
        }
        double un = 0.0;
        for (double x : u) un += x * x;
        const double next = std::sqrt(un);
        if (next == 0.0) return 0.0;  // v in the null space of a rank-deficient W
        std::fill(v.begin(), v.end(), 0.0);
        for (std::size_t i = 0; i < r; ++i) {
            const double* row = w.row(i);
            const double ui = u[i];
            for (std::size_t j = 0; j < c; ++j) v[j] += row[j] * ui;
        }
        double vn = 0.0;
        for (double x : v) vn += x * x;
        vn = std::sqrt(vn);
        for (double& x : v) x /= vn;
        if (it > 0 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) return next;
        lambda = next;
    }
    throw NonConvergenceError("spectral_norm: power iteration did not converge", lambda);
}

namespace detail {

/// Cyclic Jacobi eigenvalues of a symmetric matrix, descending order.
inline std::vector<double> jacobi_eigenvalues(RealMatrix a, std::size_t max_sweeps = 60) {
    const std::size_t n = a.rows();
    const double fro = frobenius_norm(a);
    if (fro == 0.0) return std::vector<double>(n, 0.0);
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-14 * fro) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<double>());
    return eig;
}

/// Singular values (descending) via the Gram matrix on the smaller side.
inline std::vector<double> singular_values_gram(const RealMatrix& w) {
    const std::size_t r = w.rows(), c = w.cols();
    const std::size_t n = std::min(r, c);
    RealMatrix gram(n, n);
    if (r <= c) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i; j < r; ++j) {
                double acc = 0.0;
                const double* ri = w.row(i);
                const double* rj = w.row(j);
                for (std::size_t t = 0; t < c; ++t) acc += ri[t] * rj[t];
                gram(i, j) = gram(j, i) = acc;
            }
    } else {
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t j = i; j < c; ++j) {
                double acc = 0.0;
                for (std::size_t t = 0; t < r; ++t) acc += w(t, i) * w(t, j);
                gram(i, j) = gram(j, i) = acc;
            }
    }
    std::vector<double> eig = jacobi_eigenvalues(std::move(gram));
    for (double& e : eig) e = std::sqrt(std::max(e, 0.0));
    return eig;
}

}  // namespace detail

/// Condition number bound: sigma_max / sigma_min over the singular values
/// above 1e-12 * sigma_max (rectangular matrices keep min(rows, cols)
/// values).
inline double condition_bound(const RealMatrix& w) {
    if (w.empty()) throw DataError("condition_bound: empty matrix");
    if (!all_finite(w)) throw DataError("condition_bound: non-finite entries");
    const std::vector<double> sv = detail::singular_values_gram(w);
    const double smax = sv.front();
    if (smax == 0.0) throw NumericError("condition_bound: zero matrix");
    double smin = smax;
    for (double s : sv)
        if (s > 1e-12 * smax) smin = s;
    return smax / smin;
}

/// Every ingredient of the bound, extracted from a trained model plus
/// the loss and activation constants. omega follows the
/// max-over-all-layer-widths convention (input layer included);
/// omega_literal keeps the flattened input length, the pairing used by
/// the relaxed width comparison.
struct BoundParams {
    double B = 0.0;        // loss bound
    std::size_t M = 0;     // training set size
    double Lp = 0.0;       // loss Lipschitz constant L'
    double h = 12.0;       // number of activity labels
    double C = 1.0;        // activation Lipschitz constant
    double alpha = 0.1;    // lower activation Lipschitz bound
    double beta_act = 1.0; // upper activation Lipschitz bound
    double delta = 0.05;   // confidence level
    std::size_t N = 0;     // total training rounds
    std::array<double, 3> lambdas{};    // largest singular values
    double kappa = 1.0;                 // condition number bound (max over layers)
    std::array<double, 3> fro_norms{};  // ||W_i||_F
    double omega = 0.0;                 // max network width entering Q
    double omega_literal = 0.0;         // flattened input length (relaxed comparison)

    void validate() const {
        if (!(B > 0.0) || M == 0 || !(Lp >= 0.0) || !(h > 0.0) || !(C > 0.0) ||
            !(alpha > 0.0) || !(beta_act > 0.0) || !(omega > 0.0))
            throw NumericError("BoundParams: parameters must be strictly positive");
        if (!(delta > 0.0 && delta < 1.0))
            throw NumericError("BoundParams: delta must lie in (0,1)");
        if (!(kappa >= 1.0)) throw NumericError("BoundParams: kappa must be >= 1");
        for (int i = 0; i < 3; ++i) {
            if (!(lambdas[i] > 0.0) || !(fro_norms[i] > 0.0))
                throw NumericError("BoundParams: norms must be strictly positive");
            if (lambdas[i] > fro_norms[i] + 1e-9)
                throw NumericError("BoundParams: lambda_i exceeds ||W_i||_F");
        }
    }
};

struct QFactor {
    double value = 0.0;    // may overflow to inf; log form stays finite
    double log10_value = 0.0;
};

/// Q = (2 * (beta/alpha) * omega * kappa^2)^3, evaluated linearly when
/// representable and in log space otherwise.
inline QFactor q_factor(const BoundParams& p) {
    p.validate();
    const double base = 2.0 * (p.beta_act / p.alpha) * p.omega * p.kappa * p.kappa;
    const double log10_base = std::log10(2.0) + std::log10(p.beta_act / p.alpha) +
                              std::log10(p.omega) + 2.0 * std::log10(p.kappa);
    QFactor q;
    q.log10_value = 3.0 * log10_base;
    q.value = q.log10_value < 308.0 ? base * base * base
                                    : std::numeric_limits<double>::infinity();
    return q;
}

namespace detail {

struct GebInner {
    double c3_lambda = 0.0;   // C^3 * prod(lambda_i)
    double sqrt_term = 0.0;   // sqrt(Q * (prod(1 + N/||W_i||^2) - 1))
    double log_prod1p = 0.0;  // sum log1p(N/||W_i||^2)
};

inline GebInner geb_inner(const BoundParams& p) {
    GebInner g;
    g.c3_lambda = p.C * p.C * p.C * p.lambdas[0] * p.lambdas[1] * p.lambdas[2];
    if (p.N == 0) return g;  // the product term vanishes exactly
    double lp = 0.0;
    for (int i = 0; i < 3; ++i)
        lp += std::log1p(static_cast<double>(p.N) / (p.fro_norms[i] * p.fro_norms[i]));
    g.log_prod1p = lp;
    const QFactor q = q_factor(p);
    const double pm1 = lp < 700.0 ? std::expm1(lp) : std::numeric_limits<double>::infinity();
    if (std::isfinite(q.value) && std::isfinite(pm1) && std::isfinite(q.value * pm1)) {
        g.sqrt_term = std::sqrt(q.value * pm1);
    } else {
        const double log_pm1 = lp < 700.0 ? std::log(std::expm1(lp)) : lp;
        g.sqrt_term = std::exp(0.5 * (q.log10_value * std::log(10.0) + log_pm1));
    }
    return g;
}

}  // namespace detail

/// The generalization error bound for one trained model.
inline double geb(const BoundParams& p) {
    p.validate();
    const detail::GebInner inner = detail::geb_inner(p);
    const double m = static_cast<double>(p.M);
    double numerator = p.B * p.B;
    if (p.Lp != 0.0)
        numerator += 12.0 * p.B * m * p.Lp * std::sqrt(p.h) *
                     (inner.c3_lambda + inner.sqrt_term);
    return std::sqrt(numerator / (2.0 * m * p.delta));
}

/// Same evaluator applied to the reduced-model parameter set.
inline double geb_improved(const BoundParams& p_reduced) { return geb(p_reduced); }

/// Proof1, Proof2 and the relaxed width comparison, all six numbers plus
/// the boolean outcomes.
struct ProofComparison {
    double proof1_lhs = 0.0, proof1_rhs = 0.0;
    double proof2_lhs = 0.0, proof2_rhs = 0.0;
    double relax_lhs = 0.0, relax_rhs = 0.0;
    bool proof1_holds = false, proof2_holds = false, relax_holds = false;
};

inline ProofComparison proof_condition(const BoundParams& full, const BoundParams& reduced) {
    full.validate();
    reduced.validate();
    const detail::GebInner f = detail::geb_inner(full);
    const detail::GebInner r = detail::geb_inner(reduced);
    ProofComparison cmp;
    cmp.proof1_lhs = r.c3_lambda + r.sqrt_term;
    cmp.proof1_rhs = f.c3_lambda + f.sqrt_term;
    cmp.proof1_holds = cmp.proof1_lhs <= cmp.proof1_rhs;
    cmp.proof2_lhs = r.sqrt_term;
    cmp.proof2_rhs = f.sqrt_term - full.C * full.C * full.C;
    cmp.proof2_holds = cmp.proof2_lhs <= cmp.proof2_rhs;
    cmp.relax_lhs = std::sqrt(std::pow(reduced.omega_literal, 3.0));
    cmp.relax_rhs = std::sqrt(std::pow(full.omega_literal, 3.0)) - 1.0;
    cmp.relax_holds = cmp.relax_lhs < cmp.relax_rhs;
    return cmp;
}

/// End-of-training loss and accuracy gaps derived from a trace. The
/// headline value is the mean test loss (both heights) minus the train
/// loss; accuracy analogues mirror the percentage convention.
struct GapSummary {
    double loss_gap = 0.0;        // mean(test1, test2) loss - train loss
    double loss_gap_test1 = 0.0;
    double loss_gap_test2 = 0.0;
    double acc_gap_val_test1 = 0.0;  // val accuracy - test1 accuracy
    double acc_gap_val_test2 = 0.0;
    double final_train_loss = 0.0;
    double final_val_acc = 0.0;
    double final_test1_acc = 0.0;
    double final_test2_acc = 0.0;
};

inline GapSummary gap_summary(const TrainTrace& trace) {
    if (trace.evals.empty()) throw DataError("gap_summary: incomplete trace");
    const TrainTrace::EvalPoint& e = trace.evals.back();
    GapSummary g;
    g.loss_gap_test1 = e.test1.mean_loss - e.train.mean_loss;
    g.loss_gap_test2 = e.test2.mean_loss - e.train.mean_loss;
    g.loss_gap = 0.5 * (e.test1.mean_loss + e.test2.mean_loss) - e.train.mean_loss;
    g.acc_gap_val_test1 = e.val.accuracy - e.test1.accuracy;
    g.acc_gap_val_test2 = e.val.accuracy - e.test2.accuracy;
    g.final_train_loss = e.train.mean_loss;
    g.final_val_acc = e.val.accuracy;
    g.final_test1_acc = e.test1.accuracy;
    g.final_test2_acc = e.test2.accuracy;
    return g;
}

inline double empirical_gap(const TrainTrace& trace) { return gap_summary(trace).loss_gap; }

/// Assemble BoundParams from a trained model and its trace.
inline BoundParams extract_params(const MLPModel& model, const TrainTrace& trace,
                                  double delta) {
    BoundParams p;
    p.B = kLossBound;
    p.Lp = kLossLipschitz;
    p.h = static_cast<double>(model.n_classes());
    p.C = 1.0;
    p.alpha = kLeakySlope;
    p.beta_act = 1.0;
    p.delta = delta;
    p.M = trace.m_train;
    p.N = trace.n_rounds;
    const RealMatrix* ws[3] = {&model.w1, &model.w2, &model.w3};
    double kappa = 1.0;
    for (int i = 0; i < 3; ++i) {
        p.lambdas[i] = spectral_norm(*ws[i]);
        p.fro_norms[i] = frobenius_norm(*ws[i]);
        kappa = std::max(kappa, condition_bound(*ws[i]));
    }
    p.kappa = kappa;
    p.omega = static_cast<double>(std::max({model.d_in(), model.w1.rows(),
                                            model.w2.rows(), model.w3.rows()}));
    p.omega_literal = static_cast<double>(model.d_in());
    p.validate();
    return p;
}

/// Everything the experiment reports about one seeded run.
struct GebReport {
    std::uint64_t seed = 0;
    BoundParams full, reduced;
    QFactor q_full, q_reduced;
    double geb_full = 0.0;
    double geb_reduced = 0.0;
    double ratio = 0.0;  // geb_reduced / geb_full
    double term_c3_full = 0.0, term_sqrt_full = 0.0;
    double term_c3_reduced = 0.0, term_sqrt_reduced = 0.0;
    ProofComparison proof;
    GapSummary gap_full, gap_reduced;
    bool bound_holds_full = false;
    bool bound_holds_reduced = false;
};

inline GebReport make_geb_report(std::uint64_t seed, const BoundParams& full,
                                 const BoundParams& reduced, const GapSummary& gap_full,
                                 const GapSummary& gap_reduced) {
    GebReport r;
    r.seed = seed;
    r.full = full;
    r.reduced = reduced;
    r.q_full = q_factor(full);
    r.q_reduced = q_factor(reduced);
    r.geb_full = geb(full);
    r.geb_reduced = geb_improved(reduced);
    r.ratio = r.geb_reduced / r.geb_full;
    const detail::GebInner f = detail::geb_inner(full);
    const detail::GebInner d = detail::geb_inner(reduced);
    r.term_c3_full = f.c3_lambda;
    r.term_sqrt_full = f.sqrt_term;
    r.term_c3_reduced = d.c3_lambda;
    r.term_sqrt_reduced = d.sqrt_term;
    r.proof = proof_condition(full, reduced);
    r.gap_full = gap_full;
    r.gap_reduced = gap_reduced;
    r.bound_holds_full = gap_full.loss_gap <= r.geb_full;
    r.bound_holds_reduced = gap_reduced.loss_gap <= r.geb_reduced;
    return r;
}

}  // namespace twr

#endif  // TWR_BOUND_HPP
