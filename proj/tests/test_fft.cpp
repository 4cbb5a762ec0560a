// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>

#include <complex>
#include <vector>

#include "oracles.hpp"
#include "twr/fft.hpp"
#include "twr/rng.hpp"

using Complex = std::complex<double>;

namespace {

std::vector<Complex> random_signal(std::size_t n, twr::Rng& rng) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    return x;
}

double rel_error(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("fft matches the direct DFT on power-of-two and odd sizes") {
    twr::Rng rng(11);
    for (std::size_t n : {4u, 8u, 12u, 37u, 100u, 128u}) {
        std::vector<Complex> x = random_signal(n, rng);
        const auto fast = twr::fft_copy(x, false);
        const auto slow = oracles::naive_dft(x, false);
        REQUIRE(rel_error(fast, slow) < 1e-9);
        const auto ifast = twr::fft_copy(x, true);
        const auto islow = oracles::naive_dft(x, true);
        REQUIRE(rel_error(ifast, islow) < 1e-9);
    }
}

TEST_CASE("fft round trip is exact to 1e-10") {
    twr::Rng rng(7);
    for (std::size_t n : {16u, 65u, 128u, 1024u}) {
        std::vector<Complex> x = random_signal(n, rng);
        auto y = twr::fft_copy(x, false);
        auto back = twr::fft_copy(y, true);
        REQUIRE(rel_error(back, x) < 1e-10);
    }
}

TEST_CASE("fftshift centres frequency zero") {
    std::vector<Complex> x = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    twr::fftshift(x);
    REQUIRE(x[2] == Complex(0, 0));
    REQUIRE(x[0] == Complex(2, 0));
}
