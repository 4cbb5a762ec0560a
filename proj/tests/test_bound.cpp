// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>

#include <cmath>

#include "oracles.hpp"
#include "twr/bound.hpp"
#include "twr/rng.hpp"

using namespace twr;

namespace {

RealMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    RealMatrix m(r, c);
    for (auto& v : m.storage()) v = scale * rng.uniform(-1.0, 1.0);
    return m;
}

BoundParams sample_params(Rng& rng) {
    BoundParams p;
    p.B = rng.uniform(0.5, 20.0);
    p.M = 10 + std::size_t(rng.below(5000));
    p.Lp = rng.uniform(0.1, 3.0);
    p.h = double(1 + rng.below(20));
    p.C = rng.uniform(0.5, 2.0);
    p.alpha = rng.uniform(0.05, 0.5);
    p.beta_act = rng.uniform(0.5, 2.0);
    p.delta = rng.uniform(0.01, 0.5);
    p.N = std::size_t(rng.below(2000));
    p.kappa = rng.uniform(1.0, 50.0);
    p.omega = double(10 + rng.below(10000));
    p.omega_literal = p.omega;
    for (int i = 0; i < 3; ++i) {
        p.fro_norms[i] = rng.uniform(0.2, 30.0);
        p.lambdas[i] = p.fro_norms[i] * rng.uniform(0.1, 1.0);
    }
    return p;
}

MLPModel random_toy_model(std::uint64_t seed, FeatureNorm norm) {
    return make_mlp(12, 9, 7, 12, seed, norm);
}

}  // namespace

TEST_CASE("spectral norm closed forms and SVD oracle") {
    RealMatrix eye(3, 3);
    for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
    REQUIRE(spectral_norm(eye) == Approx(1.0).margin(1e-12));

    RealMatrix diag(2, 2);
    diag(0, 0) = 3.0;
    diag(1, 1) = 1.0;
    REQUIRE(spectral_norm(diag) == Approx(3.0).margin(1e-10));

    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t r = 2 + rng.below(63);
        const std::size_t c = 2 + rng.below(63);
        const RealMatrix m = random_matrix(r, c, rng);
        const double lam = spectral_norm(m);
        const double oracle = oracles::hestenes_svd(m).front();
        REQUIRE(lam == Approx(oracle).epsilon(1e-6));
        REQUIRE(lam <= frobenius_norm(m) + 1e-12);
    }
}

TEST_CASE("condition bound closed forms and SVD oracle") {
    RealMatrix eye(3, 3);
    for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
    REQUIRE(condition_bound(eye) == Approx(1.0).margin(1e-10));

    RealMatrix diag(2, 2);
    diag(0, 0) = 4.0;
    diag(1, 1) = 2.0;
    REQUIRE(condition_bound(diag) == Approx(2.0).margin(1e-10));

    REQUIRE_THROWS_AS(condition_bound(RealMatrix(3, 3, 0.0)), NumericError);

    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const RealMatrix m = random_matrix(20, 30, rng);
        const auto sv = oracles::hestenes_svd(m);
        double smin = sv.front();
        for (double s : sv)
            if (s > 1e-12 * sv.front()) smin = s;
        REQUIRE(condition_bound(m) == Approx(sv.front() / smin).epsilon(1e-6));
        REQUIRE(condition_bound(m) >= 1.0);
    }
}

TEST_CASE("q factor arithmetic") {
    BoundParams p;
    p.B = 1;
    p.M = 1;
    p.Lp = 1;
    p.h = 1;
    p.C = 1;
    p.alpha = 1;
    p.beta_act = 1;
    p.delta = 0.5;
    p.N = 0;
    p.lambdas = {1, 1, 1};
    p.fro_norms = {1, 1, 1};
    p.kappa = 1;
    p.omega = 1;
    p.omega_literal = 1;
    REQUIRE(q_factor(p).value == Approx(8.0).margin(1e-12));

    p.alpha = 0.1;
    p.omega = 180.0;
    REQUIRE(q_factor(p).value == Approx(4.6656e10).epsilon(1e-12));
    REQUIRE(q_factor(p).log10_value == Approx(std::log10(4.6656e10)).margin(1e-12));

    const double q1 = q_factor(p).value;
    p.kappa = 2.0;
    REQUIRE(q_factor(p).value == Approx(64.0 * q1).epsilon(1e-12));
}

TEST_CASE("geb closed-form collapses") {
    BoundParams p;
    p.B = 1;
    p.M = 100;
    p.Lp = 0;
    p.h = 12;
    p.C = 1;
    p.alpha = 0.1;
    p.beta_act = 1;
    p.delta = 0.1;
    p.N = 500;
    p.lambdas = {0.5, 0.5, 0.5};
    p.fro_norms = {1, 1, 1};
    p.kappa = 3;
    p.omega = 256;
    p.omega_literal = 256;
    REQUIRE(geb(p) == Approx(std::sqrt(1.0 / 20.0)).margin(1e-12));

    BoundParams q;
    q.B = 1;
    q.M = 1;
    q.Lp = 1;
    q.h = 1;
    q.C = 1;
    q.alpha = 1;
    q.beta_act = 1;
    q.delta = 0.5;
    q.N = 0;
    q.lambdas = {1, 1, 1};
    q.fro_norms = {1, 1, 1};
    q.kappa = 1;
    q.omega = 1;
    q.omega_literal = 1;
    REQUIRE(geb(q) == Approx(std::sqrt(13.0)).margin(1e-12));

    q.delta = 1.5;
    REQUIRE_THROWS_AS(geb(q), NumericError);
}

TEST_CASE("geb matches the quad-precision oracle on random draws") {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const BoundParams p = sample_params(rng);
        const double got = geb(p);
        const double want = oracles::geb_float128(p);
        REQUIRE(got == Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("geb and geb_improved share one evaluator") {
    Rng rng(56);
    for (int trial = 0; trial < 10; ++trial) {
        const BoundParams p = sample_params(rng);
        REQUIRE(geb(p) == geb_improved(p));
    }
}

TEST_CASE("shrinking only the width shrinks the improved bound") {
    Rng rng(63);
    for (int trial = 0; trial < 10; ++trial) {
        BoundParams p = sample_params(rng);
        if (p.N == 0) p.N = 25;
        p.omega = 8192.0;
        BoundParams reduced = p;
        reduced.omega = 180.0;
        REQUIRE(geb_improved(reduced) < geb(p));
    }
}

TEST_CASE("geb monotonicity properties") {
    Rng rng(57);
    for (int trial = 0; trial < 40; ++trial) {
        BoundParams p = sample_params(rng);
        if (p.N == 0) p.N = 10;
        const double base = geb(p);

        BoundParams more_data = p;
        more_data.M = p.M * 2;
        REQUIRE(geb(more_data) <= base);

        BoundParams looser_delta = p;
        looser_delta.delta = std::min(0.95, p.delta * 1.5);
        REQUIRE(geb(looser_delta) < base);

        BoundParams longer_training = p;
        longer_training.N = p.N + 100;
        REQUIRE(geb(longer_training) >= base);

        BoundParams bigger_lambda = p;  // grow lambda only, fro norms fixed
        for (int i = 0; i < 3; ++i)
            bigger_lambda.lambdas[i] =
                std::min(1.5 * bigger_lambda.lambdas[i], bigger_lambda.fro_norms[i]);
        REQUIRE(geb(bigger_lambda) >= base);

        BoundParams wider = p;
        wider.omega = p.omega * 4;
        REQUIRE(geb(wider) >= base);

        BoundParams worse_cond = p;
        worse_cond.kappa = p.kappa * 2;
        REQUIRE(geb(worse_cond) >= base);
    }

    // strict decrease in M and delta is resolvable when the width term
    // does not dwarf the B^2/(2 M delta) contribution
    for (int trial = 0; trial < 40; ++trial) {
        BoundParams p = sample_params(rng);
        p.N = 1 + rng.below(20);
        p.kappa = rng.uniform(1.0, 3.0);
        p.omega = double(10 + rng.below(100));
        for (auto& f : p.fro_norms) f = rng.uniform(5.0, 30.0);
        for (int i = 0; i < 3; ++i) p.lambdas[i] = p.fro_norms[i] * rng.uniform(0.1, 0.9);
        const double base = geb(p);

        BoundParams more_data = p;
        more_data.M = p.M * 2;
        REQUIRE(geb(more_data) < base);

        BoundParams looser_delta = p;
        looser_delta.delta = std::min(0.95, p.delta * 1.5);
        REQUIRE(geb(looser_delta) < base);
    }
}

TEST_CASE("proof condition numbers and direction") {
    Rng rng(59);
    BoundParams full = sample_params(rng);
    full.omega_literal = 8192.0;
    BoundParams reduced = full;
    reduced.omega_literal = 180.0;
    reduced.omega = std::min(full.omega, 256.0);

    const ProofComparison cmp = proof_condition(full, reduced);
    REQUIRE(cmp.relax_lhs == Approx(2414.9534).margin(1e-3));
    REQUIRE(cmp.relax_rhs == Approx(std::sqrt(std::pow(8192.0, 3.0)) - 1.0).epsilon(1e-12));
    REQUIRE(cmp.relax_holds);
    REQUIRE(cmp.relax_lhs / cmp.relax_rhs == Approx(3.26e-3).epsilon(0.01));

    SECTION("identical parameter sets satisfy proof1 non-strictly") {
        const ProofComparison same = proof_condition(full, full);
        REQUIRE(same.proof1_lhs == same.proof1_rhs);
        REQUIRE(same.proof1_holds);
    }

    SECTION("a dominating reduced model fails proof2") {
        BoundParams dominating = full;
        dominating.kappa = full.kappa * 4.0;
        dominating.omega = full.omega * 4.0;
        for (auto& l : dominating.lambdas) l *= 2.0;
        for (auto& f : dominating.fro_norms) f *= 2.0;
        if (dominating.N == 0) dominating.N = 10;
        BoundParams weak_full = full;
        if (weak_full.N == 0) weak_full.N = 10;
        const ProofComparison bad = proof_condition(weak_full, dominating);
        REQUIRE_FALSE(bad.proof2_holds);
    }
}

TEST_CASE("empirical gap bookkeeping") {
    TrainTrace trace;
    TrainTrace::EvalPoint e{};
    e.step = 100;
    e.train.mean_loss = 0.2;
    e.test1.mean_loss = 0.9;
    e.test2.mean_loss = 0.9;
    e.val.accuracy = 0.9;
    e.test1.accuracy = 0.84;
    e.test2.accuracy = 0.80;
    trace.evals.push_back(e);
    trace.n_rounds = 100;
    trace.m_train = 320;

    REQUIRE(empirical_gap(trace) == Approx(0.7).margin(1e-15));
    const GapSummary g = gap_summary(trace);
    REQUIRE(g.acc_gap_val_test1 == Approx(0.06).margin(1e-12));
    REQUIRE(g.acc_gap_val_test2 == Approx(0.10).margin(1e-12));

    TrainTrace::EvalPoint flat{};
    flat.train.mean_loss = 0.5;
    flat.test1.mean_loss = 0.5;
    flat.test2.mean_loss = 0.5;
    TrainTrace zero;
    zero.evals.push_back(flat);
    REQUIRE(empirical_gap(zero) == 0.0);

    REQUIRE_THROWS_AS(empirical_gap(TrainTrace{}), DataError);
}

TEST_CASE("parameter extraction from a trained model") {
    SECTION("identity weights give unit spectra") {
        MLPModel m;
        m.w1 = RealMatrix(8, 8);
        m.w2 = RealMatrix(8, 8);
        m.w3 = RealMatrix(8, 8);
        for (int i = 0; i < 8; ++i) {
            m.w1(i, i) = 1.0;
            m.w2(i, i) = 1.0;
            m.w3(i, i) = 1.0;
        }
        TrainTrace trace;
        trace.n_rounds = 40;
        trace.m_train = 96;
        const BoundParams p = extract_params(m, trace, 0.05);
        for (double l : p.lambdas) REQUIRE(l == Approx(1.0).margin(1e-9));
        REQUIRE(p.kappa == Approx(1.0).margin(1e-9));
        for (double f : p.fro_norms) REQUIRE(f == Approx(std::sqrt(8.0)).margin(1e-12));
        REQUIRE(p.N == 40);
        REQUIRE(p.M == 96);
        REQUIRE(p.omega == 8.0);
        REQUIRE(p.omega_literal == 8.0);
    }

    SECTION("lambda never exceeds the Frobenius norm") {
        Rng rng(60);
        for (int trial = 0; trial < 10; ++trial) {
            const MLPModel m = random_toy_model(100 + trial, FeatureNorm::standardize);
            TrainTrace trace;
            trace.n_rounds = 10;
            trace.m_train = 32;
            const BoundParams p = extract_params(m, trace, 0.05);
            for (int i = 0; i < 3; ++i) REQUIRE(p.lambdas[i] <= p.fro_norms[i] + 1e-9);
            REQUIRE(p.omega == 12.0);  // max(12, 9, 7, 12)
        }
    }
}

TEST_CASE("data sensitivity inequality holds without normalization") {
    Rng rng(61);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const MLPModel m = random_toy_model(200 + trial, FeatureNorm::none);
        const double lip = spectral_norm(m.w1) * spectral_norm(m.w2) * spectral_norm(m.w3);
        std::vector<double> x(12), dx(12);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        for (auto& v : dx) v = rng.uniform(-0.5, 0.5);
        std::vector<double> xp(12);
        for (int i = 0; i < 12; ++i) xp[std::size_t(i)] = x[std::size_t(i)] + dx[std::size_t(i)];
        const auto p0 = forward(m, x);
        const auto p1 = forward(m, xp);
        double lhs = 0.0, dxn = 0.0;
        for (int i = 0; i < 12; ++i) {
            lhs += (p1[std::size_t(i)] - p0[std::size_t(i)]) * (p1[std::size_t(i)] - p0[std::size_t(i)]);
            dxn += dx[std::size_t(i)] * dx[std::size_t(i)];
        }
        REQUIRE(std::sqrt(lhs) <= lip * std::sqrt(dxn) * (1.0 + 1e-6));
        ++checked;
    }
    REQUIRE(checked == 100);
}

TEST_CASE("weight sensitivity stays below the Q-factor bound") {
    Rng rng(62);
    for (int trial = 0; trial < 50; ++trial) {
        const MLPModel m = random_toy_model(300 + trial, FeatureNorm::none);
        MLPModel perturbed = m;
        double prod = 1.0;
        const RealMatrix* ws[3] = {&m.w1, &m.w2, &m.w3};
        RealMatrix* ps[3] = {&perturbed.w1, &perturbed.w2, &perturbed.w3};
        for (int l = 0; l < 3; ++l) {
            double dsq = 0.0;
            for (auto& v : ps[l]->storage()) {
                const double d = 0.01 * rng.uniform(-1.0, 1.0);
                v += d;
                dsq += d * d;
            }
            const double wsq = frobenius_norm(*ws[l]) * frobenius_norm(*ws[l]);
            prod *= 1.0 + dsq / wsq;
        }
        double kappa = 1.0;
        for (int l = 0; l < 3; ++l) kappa = std::max(kappa, condition_bound(*ws[l]));
        const double omega = 12.0;  // max width of the toy topology
        const double base = 2.0 * (1.0 / kLeakySlope) * omega * kappa * kappa;
        const double q = base * base * base;

        std::vector<double> x(12);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        const auto p0 = forward(m, x);
        const auto p1 = forward(perturbed, x);
        double lhs = 0.0, fnorm = 0.0;
        for (int i = 0; i < 12; ++i) {
            lhs += (p1[std::size_t(i)] - p0[std::size_t(i)]) * (p1[std::size_t(i)] - p0[std::size_t(i)]);
            fnorm += p0[std::size_t(i)] * p0[std::size_t(i)];
        }
        REQUIRE(lhs <= q * (prod - 1.0) * fnorm * (1.0 + 1e-6));
    }
}
