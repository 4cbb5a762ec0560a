// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "twr/emd.hpp"
#include "twr/rng.hpp"

using namespace twr;

namespace {

double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / double(v.size()));
}

}  // namespace

TEST_CASE("a strictly monotone ramp has no oscillatory mode") {
    std::vector<double> ramp(64);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.1 * double(i) - 2.0;
    const EMDResult r = sift_imfs(ramp);
    REQUIRE(r.imfs.empty());
    REQUIRE(r.residue == ramp);
}

TEST_CASE("IMFs plus residue reconstruct the input") {
    Rng rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> x(300);
        const double f1 = rng.uniform(1.0, 3.0), f2 = rng.uniform(8.0, 20.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = double(i) / double(x.size());
            x[i] = std::sin(2.0 * kPi * f1 * t) + 0.4 * std::sin(2.0 * kPi * f2 * t) +
                   0.1 * rng.normal();
        }
        const EMDResult r = sift_imfs(x);
        REQUIRE_FALSE(r.imfs.empty());
        std::vector<double> err(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            double sum = r.residue[i];
            for (const auto& imf : r.imfs) sum += imf[i];
            err[i] = sum - x[i];
        }
        REQUIRE(rms(err) <= 1e-6 * rms(x));
    }
}

TEST_CASE("the first IMF captures the fast tone") {
    const std::size_t n = 512;
    std::vector<double> x(n), fast(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) / double(n);  // one second span
        fast[i] = 0.2 * std::sin(2.0 * kPi * 50.0 * t);
        x[i] = std::sin(2.0 * kPi * 5.0 * t) + fast[i];
    }
    const EMDResult r = sift_imfs(x);
    REQUIRE(r.imfs.size() >= 2);
    // interior 80% of samples
    std::vector<double> a(r.imfs[0].begin() + n / 10, r.imfs[0].end() - n / 10);
    std::vector<double> b(fast.begin() + n / 10, fast.end() - n / 10);
    REQUIRE(oracles::pearson(a, b) >= 0.95);
}

TEST_CASE("short series are rejected") {
    REQUIRE_THROWS_AS(sift_imfs(std::vector<double>(7, 1.0)), DataError);
}

TEST_CASE("denoising degenerate maps") {
    SECTION("all-zero map stays zero") {
        const RealMatrix zero(4, 32);
        const RealMatrix out = emd_denoise(zero);
        REQUIRE(out == zero);
    }
    SECTION("monotone ramp rows pass through unchanged") {
        RealMatrix ramps(3, 40);
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t j = 0; j < 40; ++j)
                ramps(r, j) = double(j) * (0.5 + double(r));
        REQUIRE(emd_denoise(ramps) == ramps);
    }
    SECTION("narrow maps are rejected") {
        REQUIRE_THROWS_AS(emd_denoise(RealMatrix(2, 7)), DataError);
    }
}

TEST_CASE("dropping the first IMF removes noise from a chirp") {
    const std::size_t n = 512;
    double in_sq = 0.0, out_sq = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(100 + trial);
        std::vector<double> clean(n);
        RealMatrix noisy(1, n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = double(i) / double(n);
            clean[i] = std::sin(2.0 * kPi * (1.0 + 3.0 * t) * t);
            noisy(0, i) = clean[i] + 0.25 * rng.normal();
        }
        const RealMatrix den = emd_denoise(noisy);
        for (std::size_t i = 0; i < n; ++i) {
            in_sq += (noisy(0, i) - clean[i]) * (noisy(0, i) - clean[i]);
            out_sq += (den(0, i) - clean[i]) * (den(0, i) - clean[i]);
        }
    }
    REQUIRE(out_sq < in_sq);
}
