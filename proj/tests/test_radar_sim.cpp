// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "twr/radar_sim.hpp"
#include "twr/sigproc.hpp"

using namespace twr;

namespace {

const double kNoNoise = std::numeric_limits<double>::infinity();

RadarConfig default_radar() { return RadarConfig{}; }

WallModel no_wall() {
    WallModel w;
    w.thickness = 0.0;
    return w;
}

ScattererTrack static_scatterer(double range, const RadarConfig& radar) {
    ScattererTrack t;
    t.positions = RealMatrix(1, radar.n_slow(), range);
    t.amplitudes = {1.0};
    return t;
}

double limb_excursion(const ScattererTrack& t, std::size_t limb) {
    double mx = 0.0;
    for (std::size_t i = 0; i < t.n_slow(); ++i)
        mx = std::max(mx, std::abs(t.positions(limb, i) - t.positions(0, i)));
    return mx;
}

std::size_t column_argmax(const ComplexMatrix& m, std::size_t col) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < m.rows(); ++i)
        if (std::abs(m(i, col)) > std::abs(m(best, col))) best = i;
    return best;
}

}  // namespace

TEST_CASE("empty scene has zero amplitudes and zero echo energy before noise") {
    const RadarConfig radar = default_radar();
    const ScattererTrack t = synth_trajectory(ActivityKind::empty, 1.8, radar, 0);
    for (double a : t.amplitudes) REQUIRE(a == 0.0);
    const FrequencyEcho echo = simulate_echo(t, radar, no_wall(), kNoNoise, 0);
    double energy = 0.0;
    for (const auto& v : echo.data.storage()) energy += std::norm(v);
    REQUIRE(energy == 0.0);
}

TEST_CASE("trajectories are deterministic in the seed") {
    const RadarConfig radar = default_radar();
    const auto a = synth_trajectory(ActivityKind::walking, 1.8, radar, 7);
    const auto b = synth_trajectory(ActivityKind::walking, 1.8, radar, 7);
    REQUIRE(a.positions == b.positions);
    const auto c = synth_trajectory(ActivityKind::walking, 1.8, radar, 8);
    REQUIRE_FALSE(a.positions == c.positions);
}

TEST_CASE("limb oscillation amplitude scales exactly with height") {
    const RadarConfig radar = default_radar();
    const auto tall = synth_trajectory(ActivityKind::walking, 1.8, radar, 42);
    const auto mid = synth_trajectory(ActivityKind::walking, 1.6, radar, 42);
    for (std::size_t limb = 2; limb < 6; ++limb) {
        const double ratio = limb_excursion(mid, limb) / limb_excursion(tall, limb);
        REQUIRE(ratio == Approx(1.6 / 1.8).epsilon(0).margin(1e-9));
    }
}

TEST_CASE("walking limb excursion is strictly increasing in height") {
    const RadarConfig radar = default_radar();
    double prev = 0.0;
    for (double h : {1.5, 1.6, 1.7, 1.8, 1.9}) {
        const auto t = synth_trajectory(ActivityKind::walking, h, radar, 3);
        const double exc = limb_excursion(t, 4);
        REQUIRE(exc > prev);
        prev = exc;
    }
}

TEST_CASE("trajectory preconditions are enforced") {
    const RadarConfig radar = default_radar();
    REQUIRE_THROWS_AS(synth_trajectory(ActivityKind::walking, 1.2, radar, 0), DataError);
    REQUIRE_THROWS_AS(activity_from_code(12), DataError);
    REQUIRE_THROWS_AS(activity_from_code(-1), DataError);
    REQUIRE(activity_from_code(11) == ActivityKind::walking_to_falling);
}

TEST_CASE("every activity keeps scatterers beyond the wall") {
    const RadarConfig radar = default_radar();
    for (int code = 0; code < kNumActivities; ++code)
        for (double h : {1.4, 1.8, 2.0}) {
            const auto t = synth_trajectory(activity_from_code(code), h, radar, 19);
            REQUIRE(matrix_min(t.positions) > 0.12);
            REQUIRE(all_finite(t.positions));
        }
}

TEST_CASE("wall transmission closed forms") {
    WallModel w;
    w.thickness = 0.0;
    REQUIRE(wall_transmission(1e9, w) == std::complex<double>(1.0, 0.0));

    WallModel air;
    air.thickness = 0.2;
    air.rel_permittivity = 1.0;
    air.loss_factor = 5.0;
    const auto t = wall_transmission(1e9, air);
    REQUIRE(std::abs(t) == Approx(std::exp(-5.0 * 0.2)).epsilon(1e-12));
    REQUIRE(std::arg(t) == Approx(0.0).margin(1e-12));

    WallModel def;  // 12 cm, eps_r = 6
    const long double exact = 0.12L * (sqrtl(6.0L) - 1.0L);
    REQUIRE(def.extra_path() == Approx(static_cast<double>(exact)).epsilon(1e-12));
    REQUIRE(def.extra_path() == Approx(0.17394).margin(5e-6));
    REQUIRE(std::abs(wall_transmission(2.5e9, def)) <= 1.0);
}

TEST_CASE("static scatterer peaks at the analytic range bin") {
    const RadarConfig radar = default_radar();  // B = 2 GHz, 128 bins
    const ScattererTrack t = static_scatterer(3.0, radar);
    const FrequencyEcho echo = simulate_echo(t, radar, no_wall(), kNoNoise, 0);
    const ComplexMatrix profiles = ifft_range_profile(echo);

    const std::size_t expected =
        static_cast<std::size_t>(std::lround(3.0 / radar.range_resolution()));
    REQUIRE(expected == 40);
    REQUIRE(column_argmax(profiles, 0) == expected);

    // analytic oracle: direct inverse DFT of the geometric series
    std::vector<std::complex<double>> col(radar.n_freq);
    for (std::size_t m = 0; m < radar.n_freq; ++m)
        col[m] = std::polar(1.0, -4.0 * kPi * radar.freq_at(m) * 3.0 / kSpeedOfLight);
    const auto profile = oracles::naive_dft(col, true);
    std::size_t oracle_best = 0;
    for (std::size_t i = 1; i < profile.size(); ++i)
        if (std::abs(profile[i]) > std::abs(profile[oracle_best])) oracle_best = i;
    REQUIRE(oracle_best == expected);
}

TEST_CASE("wall shows up as a constant apparent range shift") {
    const RadarConfig radar = default_radar();
    const ScattererTrack t = static_scatterer(3.0, radar);
    const WallModel wall;  // 12 cm, eps_r 6
    const FrequencyEcho free = simulate_echo(t, radar, no_wall(), kNoNoise, 0);
    const FrequencyEcho through = simulate_echo(t, radar, wall, kNoNoise, 0);
    const auto p_free = ifft_range_profile(free);
    const auto p_through = ifft_range_profile(through);
    const long shift = static_cast<long>(column_argmax(p_through, 0)) -
                       static_cast<long>(column_argmax(p_free, 0));
    const long expected = std::lround(wall.extra_path() / radar.range_resolution());
    REQUIRE(shift == expected);
}

TEST_CASE("echo generation is linear in the scatterer set") {
    RadarConfig radar = default_radar();
    radar.n_freq = 32;
    radar.duration = 0.5;
    const std::size_t n = radar.n_slow();

    ScattererTrack a, b, both;
    a.positions = RealMatrix(2, n);
    b.positions = RealMatrix(2, n);
    both.positions = RealMatrix(4, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / radar.prf;
        a.positions(0, i) = 3.0 + 0.2 * std::sin(2.0 * kPi * 1.0 * t);
        a.positions(1, i) = 4.1;
        b.positions(0, i) = 2.5 + 0.1 * std::cos(2.0 * kPi * 2.0 * t);
        b.positions(1, i) = 5.0 - 0.05 * t;
        both.positions(0, i) = a.positions(0, i);
        both.positions(1, i) = a.positions(1, i);
        both.positions(2, i) = b.positions(0, i);
        both.positions(3, i) = b.positions(1, i);
    }
    a.amplitudes = {1.0, 0.4};
    b.amplitudes = {0.25, 0.7};
    both.amplitudes = {1.0, 0.4, 0.25, 0.7};

    const WallModel wall;
    const auto ea = simulate_echo(a, radar, wall, kNoNoise, 0);
    const auto eb = simulate_echo(b, radar, wall, kNoNoise, 0);
    const auto eboth = simulate_echo(both, radar, wall, kNoNoise, 0);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < eboth.data.size(); ++i) {
        const auto sum = ea.data.storage()[i] + eb.data.storage()[i];
        num += std::norm(eboth.data.storage()[i] - sum);
        den += std::norm(sum);
    }
    REQUIRE(std::sqrt(num / den) < 1e-10);
}

TEST_CASE("echoes are bit-identical for identical seeds") {
    RadarConfig radar = default_radar();
    radar.n_freq = 16;
    radar.duration = 0.5;
    const auto track = synth_trajectory(ActivityKind::punching, 1.8, radar, 5);
    const auto e1 = simulate_echo(track, radar, WallModel{}, 20.0, 99);
    const auto e2 = simulate_echo(track, radar, WallModel{}, 20.0, 99);
    REQUIRE(e1.data == e2.data);
    const auto e3 = simulate_echo(track, radar, WallModel{}, 20.0, 100);
    REQUIRE_FALSE(e1.data == e3.data);
}

TEST_CASE("dimension mismatch is rejected") {
    const RadarConfig radar = default_radar();
    ScattererTrack t;
    t.positions = RealMatrix(1, 10, 3.0);
    t.amplitudes = {1.0};
    REQUIRE_THROWS_AS(simulate_echo(t, radar, WallModel{}, 20.0, 0), DataError);
}

TEST_CASE("empty scene with noise uses the absolute floor") {
    RadarConfig radar = default_radar();
    radar.n_freq = 8;
    radar.duration = 0.25;
    const auto track = synth_trajectory(ActivityKind::empty, 1.8, radar, 1);
    const auto echo = simulate_echo(track, radar, WallModel{}, 20.0, 17, 0.05);
    double p = 0.0;
    for (const auto& v : echo.data.storage()) p += std::norm(v);
    p /= static_cast<double>(echo.data.size());
    REQUIRE(p == Approx(0.05 * 0.05).epsilon(0.5));  // sigma^2 within sampling noise
}
