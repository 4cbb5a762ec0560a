// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "twr/radar_sim.hpp"
#include "twr/sigproc.hpp"

using namespace twr;
using Complex = std::complex<double>;

namespace {

const double kNoNoise = std::numeric_limits<double>::infinity();

FrequencyEcho echo_from_column(const std::vector<Complex>& col) {
    FrequencyEcho e;
    e.config.n_freq = col.size();
    e.data = ComplexMatrix(col.size(), 1);
    for (std::size_t m = 0; m < col.size(); ++m) e.data(m, 0) = col[m];
    return e;
}

}  // namespace

TEST_CASE("range profile is the inverse DFT per column") {
    const std::size_t n = 16;

    SECTION("all-ones column gives a delta at bin zero") {
        const auto prof = ifft_range_profile(echo_from_column(
            std::vector<Complex>(n, Complex(1.0, 0.0))));
        REQUIRE(std::abs(prof(0, 0) - Complex(1.0, 0.0)) < 1e-12);
        for (std::size_t i = 1; i < n; ++i) REQUIRE(std::abs(prof(i, 0)) < 1e-12);
    }

    SECTION("linear phase shifts the delta to bin k0") {
        const std::size_t k0 = 5;
        std::vector<Complex> col(n);
        for (std::size_t m = 0; m < n; ++m)
            col[m] = std::polar(1.0, -2.0 * kPi * double(m) * double(k0) / double(n));
        const auto prof = ifft_range_profile(echo_from_column(col));
        REQUIRE(std::abs(prof(k0, 0) - Complex(1.0, 0.0)) < 1e-12);
        for (std::size_t i = 0; i < n; ++i)
            if (i != k0) REQUIRE(std::abs(prof(i, 0)) < 1e-12);
    }

    SECTION("Parseval with the 1/N convention and invertibility") {
        Rng rng(3);
        std::vector<Complex> col(37);
        for (auto& v : col) v = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const auto prof = ifft_range_profile(echo_from_column(col));

        double e_time = 0.0, e_freq = 0.0;
        std::vector<Complex> back(col.size());
        for (std::size_t i = 0; i < col.size(); ++i) {
            e_time += std::norm(prof(i, 0));
            e_freq += std::norm(col[i]);
            back[i] = prof(i, 0);
        }
        REQUIRE(e_time == Approx(e_freq / double(col.size())).epsilon(1e-10));

        fft(back, false);  // forward DFT recovers the input
        double err = 0.0, den = 0.0;
        for (std::size_t i = 0; i < col.size(); ++i) {
            err += std::norm(back[i] - col[i]);
            den += std::norm(col[i]);
        }
        REQUIRE(std::sqrt(err / den) < 1e-10);
    }
}

TEST_CASE("demodulation recovers baseband") {
    const double fs = 1000.0, fc = 220.0, cutoff = 100.0;
    const std::size_t n = 2048;

    SECTION("tone at the carrier becomes a constant one") {
        std::vector<Complex> x(n);
        for (std::size_t i = 0; i < n; ++i)
            x[i] = std::polar(1.0, 2.0 * kPi * fc * double(i) / fs);
        const auto y = demodulate(x, fc, fs, cutoff);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(std::abs(y[i] - Complex(1.0, 0.0)) < 1e-3);
    }

    SECTION("tone at twice the cutoff is attenuated below -40 dB") {
        const double f_off = 2.0 * cutoff;
        // oracle: the designed FIR response at the offset frequency
        const auto taps = detail::lowpass_taps(cutoff, fs);
        Complex h(0.0, 0.0);
        for (std::size_t k = 0; k < taps.size(); ++k)
            h += taps[k] * std::polar(1.0, -2.0 * kPi * f_off * double(k) / fs);
        REQUIRE(std::abs(h) <= 0.01);

        std::vector<Complex> x(n);
        for (std::size_t i = 0; i < n; ++i)
            x[i] = std::polar(1.0, 2.0 * kPi * (fc + f_off) * double(i) / fs);
        const auto y = demodulate(x, fc, fs, cutoff);
        for (std::size_t i = n / 5; i < 4 * n / 5; ++i) REQUIRE(std::abs(y[i]) <= 0.01);
    }

    SECTION("zero in, zero out; bad cutoff rejected") {
        const auto y = demodulate(std::vector<Complex>(64, Complex(0, 0)), fc, fs, cutoff);
        for (const auto& v : y) REQUIRE(std::abs(v) == 0.0);
        REQUIRE_THROWS_AS(demodulate(y, fc, fs, 0.0), DataError);
        REQUIRE_THROWS_AS(demodulate(y, fc, fs, fs), DataError);
    }
}

TEST_CASE("RTM is the elementwise magnitude") {
    ComplexMatrix m(2, 2);
    m(0, 0) = Complex(3.0, 4.0);
    const auto rtm = build_rtm(m);
    REQUIRE(rtm.data(0, 0) == 5.0);
    REQUIRE(rtm.data(1, 1) == 0.0);
    REQUIRE_THROWS_AS(build_rtm(ComplexMatrix{}), DataError);
}

TEST_CASE("RTM argmax tracks a moving scatterer") {
    RadarConfig radar;
    radar.duration = 1.0;
    const std::size_t n = radar.n_slow();
    ScattererTrack t;
    t.positions = RealMatrix(1, n);
    t.amplitudes = {1.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double time = double(i) / radar.prf;
        t.positions(0, i) = 3.0 + 1.1 * time;
    }
    WallModel no_wall;
    no_wall.thickness = 0.0;
    const auto prof = ifft_range_profile(simulate_echo(t, radar, no_wall, kNoNoise, 0));
    const auto rtm = build_rtm(prof, radar.range_resolution(), radar.prf);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < rtm.data.rows(); ++r)
            if (rtm.data(r, c) > rtm.data(best, c)) best = r;
        const double expected = t.positions(0, c) / radar.range_resolution();
        REQUIRE(std::abs(double(best) - std::round(expected)) <= 1.0);
        const double frac = std::abs(expected - std::round(expected));
        if (frac < 0.45) REQUIRE(best == std::size_t(std::lround(expected)));
    }
}

TEST_CASE("DTM ridge lands at the analytic Doppler bin") {
    STFTConfig cfg;  // 128-window, hop 14, keep 64
    const double prf = 256.0;
    const std::size_t n = 1024;
    const long bin_offset = 16;  // bins above centre
    const double f0 = double(bin_offset) * prf / double(cfg.window_len);

    ComplexMatrix profiles(1, n);
    for (std::size_t i = 0; i < n; ++i)
        profiles(0, i) = std::polar(1.0, 2.0 * kPi * f0 * double(i) / prf);
    const auto dtm = build_dtm(profiles, cfg, prf);

    REQUIRE(dtm.data.rows() == 64);
    REQUIRE(dtm.data.cols() == cfg.n_frames(n));
    REQUIRE(dtm.data.cols() == 65);
    REQUIRE(dtm.doppler_res == Approx(2.0));

    const std::size_t expected_row = 32 + bin_offset;
    for (std::size_t f = 0; f < dtm.data.cols(); ++f) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < dtm.data.rows(); ++r)
            if (dtm.data(r, f) > dtm.data(best, f)) best = r;
        REQUIRE(best == expected_row);
    }

    // analytic windowed-DFT oracle for the first frame
    const auto w = hamming_window(cfg.window_len);
    for (std::size_t r = 0; r < dtm.data.rows(); ++r) {
        const long k = long(r) - 32;  // Doppler bin of this row
        Complex acc(0.0, 0.0);
        for (std::size_t i = 0; i < cfg.window_len; ++i) {
            const double ang = 2.0 * kPi * (f0 / prf - double(k) / double(cfg.window_len)) *
                               double(i);
            acc += w[i] * std::polar(1.0, ang);
        }
        REQUIRE(dtm.data(r, 0) == Approx(std::abs(acc)).margin(1e-10));
    }
}

TEST_CASE("DTM degenerate and symmetry cases") {
    STFTConfig cfg;
    const double prf = 256.0;

    SECTION("zero series gives a zero map") {
        ComplexMatrix profiles(2, 256);
        const auto dtm = build_dtm(profiles, cfg, prf);
        REQUIRE(matrix_max(dtm.data) == 0.0);
    }

    SECTION("a real sinusoid yields symmetric ridges") {
        const double f0 = 24.0;
        ComplexMatrix profiles(1, 1024);
        for (std::size_t i = 0; i < 1024; ++i)
            profiles(0, i) = Complex(std::cos(2.0 * kPi * f0 * double(i) / prf), 0.0);
        const auto dtm = build_dtm(profiles, cfg, prf);
        const long off = std::lround(f0 / dtm.doppler_res);
        for (std::size_t f = 0; f < dtm.data.cols(); ++f) {
            const double hi = dtm.data(std::size_t(32 + off), f);
            const double lo = dtm.data(std::size_t(32 - off), f);
            REQUIRE(hi == Approx(lo).epsilon(1e-9));
            REQUIRE(hi > 10.0 * dtm.data(0, f));
        }
    }

    SECTION("short signals are rejected") {
        REQUIRE_THROWS_AS(build_dtm(ComplexMatrix(1, 64), cfg, prf), DataError);
    }
}

TEST_CASE("DTM is invariant to a constant range shift") {
    RadarConfig radar;
    radar.duration = 1.0;
    const std::size_t n = radar.n_slow();
    WallModel no_wall;
    no_wall.thickness = 0.0;

    auto make_track = [&](double shift) {
        ScattererTrack t;
        t.positions = RealMatrix(2, n);
        t.amplitudes = {1.0, 0.5};
        for (std::size_t i = 0; i < n; ++i) {
            const double time = double(i) / radar.prf;
            t.positions(0, i) = 3.0 + 0.3 * std::sin(2.0 * kPi * 1.3 * time) + shift;
            t.positions(1, i) = 4.2 + 0.15 * std::sin(2.0 * kPi * 2.1 * time + 0.7) + shift;
        }
        return t;
    };

    STFTConfig cfg;
    const auto dtm_a = build_dtm(
        ifft_range_profile(simulate_echo(make_track(0.0), radar, no_wall, kNoNoise, 0)), cfg,
        radar.prf);
    const auto dtm_b = build_dtm(
        ifft_range_profile(simulate_echo(make_track(0.9), radar, no_wall, kNoNoise, 0)), cfg,
        radar.prf);
    double worst = 0.0;
    for (std::size_t i = 0; i < dtm_a.data.size(); ++i)
        worst = std::max(worst, std::abs(dtm_a.data.storage()[i] - dtm_b.data.storage()[i]));
    REQUIRE(worst <= 1e-6 * matrix_max(dtm_a.data));
}

TEST_CASE("carrier round trip recovers the baseband echo") {
    RadarConfig radar;
    radar.n_freq = 8;
    radar.duration = 0.5;
    const std::size_t n = radar.n_slow();

    ScattererTrack t;
    t.positions = RealMatrix(1, n);
    t.amplitudes = {1.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double time = double(i) / radar.prf;
        t.positions(0, i) = 3.0 + 0.1 * std::sin(2.0 * kPi * 0.5 * time);
    }
    WallModel wall;

    RadarConfig carrier = radar;
    carrier.carrier_sim = true;
    const auto base = simulate_echo(t, radar, wall, kNoNoise, 0);
    const auto modulated = simulate_echo(t, carrier, wall, kNoNoise, 0);
    const auto recovered = recover_baseband(modulated);
    REQUIRE_FALSE(recovered.config.carrier_sim);

    double worst = 0.0;
    for (std::size_t m = 0; m < radar.n_freq; ++m)
        for (std::size_t i = n / 8; i < 7 * n / 8; ++i)
            worst = std::max(worst, std::abs(recovered.data(m, i) - base.data(m, i)) /
                                        std::abs(base.data(m, i)));
    REQUIRE(worst < 1e-2);

    // identity when the carrier flag is off
    const auto same = recover_baseband(base);
    REQUIRE(same.data == base.data);
}
