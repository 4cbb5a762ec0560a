// SPDX-License-Identifier: Apache-2.0
//
// Synthetic through-the-wall UWB echo generation. Twelve activity classes
// are produced from hand-designed kinematic templates (six point
// scatterers per body: torso, head, two arms, two legs) moved radially in
// front of the radar, behind a first-order dielectric wall slab
// (attenuation plus delay, no internal multiples). The stepped-frequency
// echo is assembled per scatterer and per slow-time frame.

#ifndef TWR_RADAR_SIM_HPP
#define TWR_RADAR_SIM_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "twr/common.hpp"
#include "twr/matrix.hpp"
#include "twr/rng.hpp"

namespace twr {

struct RadarConfig {
    double f_min = 0.5e9;      // Hz
    double f_max = 2.5e9;      // Hz
    std::size_t n_freq = 128;  // stepped-frequency points
    double prf = 256.0;        // slow-time sampling rate, Hz
    double duration = 4.0;     // s
    bool carrier_sim = false;  // emit slow-time IF carrier for the demodulation path

    double bandwidth() const { return f_max - f_min; }
    double freq_step() const { return bandwidth() / static_cast<double>(n_freq); }
    double freq_at(std::size_t m) const { return f_min + freq_step() * static_cast<double>(m); }
    double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth()); }
    std::size_t n_slow() const {
        return static_cast<std::size_t>(std::llround(prf * duration));
    }

    void validate() const {
        if (!(f_min > 0.0) || !(f_max > f_min))
            throw DataError("RadarConfig: need f_max > f_min > 0");
        if (n_freq < 2) throw DataError("RadarConfig: n_freq must be >= 2");
        const double frames = prf * duration;
        if (std::abs(frames - std::round(frames)) > 1e-9 || frames < 64.0)
            throw DataError("RadarConfig: prf*duration must be an integer >= 64");
    }
};

struct WallModel {
    double thickness = 0.12;        // m
    double rel_permittivity = 6.0;  // dimensionless
    double loss_factor = 5.0;       // nepers/m

    void validate() const {
        if (thickness < 0.0) throw DataError("WallModel: thickness must be >= 0");
        if (rel_permittivity < 1.0) throw DataError("WallModel: rel_permittivity must be >= 1");
    }

    /// Extra one-way path length introduced by the slab.
    double extra_path() const { return thickness * (std::sqrt(rel_permittivity) - 1.0); }
};

/// The twelve activity labels, codes fixed 0..11 in listed order.
enum class ActivityKind : int {
    empty = 0,
    punching = 1,
    kicking = 2,
    grabbing = 3,
    sitting_down = 4,
    standing_up = 5,
    rotating = 6,
    walking = 7,
    sitting_to_walking = 8,
    walking_to_sitting = 9,
    falling_to_walking = 10,
    walking_to_falling = 11,
};

inline constexpr int kNumActivities = 12;

inline ActivityKind activity_from_code(int code) {
    if (code < 0 || code >= kNumActivities)
        throw DataError("activity_from_code: code out of range 0..11");
    return static_cast<ActivityKind>(code);
}

inline const char* activity_name(ActivityKind a) {
    static const char* names[kNumActivities] = {
        "Empty",          "Punching",          "Kicking",
        "Grabbing",       "SittingDown",       "StandingUp",
        "Rotating",       "Walking",           "SittingToWalking",
        "WalkingToSitting", "FallingToWalking", "WalkingToFalling",
    };
    return names[static_cast<int>(a)];
}

/// Radial trajectories of the body scatterers over slow time.
struct ScattererTrack {
    RealMatrix positions;            // n_scatterers x n_slow, radial range in m
    std::vector<double> amplitudes;  // per-scatterer reflectivity
    double height_scale = 1.8;       // m, tester height

    std::size_t n_scatterers() const { return positions.rows(); }
    std::size_t n_slow() const { return positions.cols(); }
};

/// Raw simulated stepped-frequency echo, frequency x slow time.
struct FrequencyEcho {
    ComplexMatrix data;  // n_freq x n_slow
    RadarConfig config;
};

namespace detail {

// one scatterer's radial motion relative to the torso: constant offset +
// sum of windowed sinusoid / smoothstep terms, all in reference-height units
struct TemplateDraws {
    double standoff;      // absolute standoff in m, jittered
    double speed_jitter;  // multiplies translation speed
    double amp_jitter;    // multiplies every limb amplitude
    double freq_jitter;   // multiplies every oscillation frequency
    double direction;     // +1 receding / -1 approaching for walks
    double asym;          // left/right limb asymmetry
    double t_shift;       // schedule shift for transition classes, s
    std::array<double, 6> phase;  // per-scatterer oscillation phase
    std::array<double, 4> limb_amp;  // per-limb amplitude factors
};

inline TemplateDraws draw_template_jitter(Rng& rng) {
    // draw order is fixed and independent of activity and height so the
    // same seed yields the same jitter set for every height
    TemplateDraws d{};
    d.standoff = 4.0 + rng.uniform(-0.15, 0.15);
    d.speed_jitter = rng.uniform(0.95, 1.05);
    d.amp_jitter = rng.uniform(0.95, 1.05);
    d.freq_jitter = rng.uniform(0.95, 1.05);
    d.direction = rng.uniform() < 0.5 ? -1.0 : 1.0;
    d.asym = rng.uniform(0.95, 1.05);
    d.t_shift = rng.uniform(-0.25, 0.25);
    for (auto& p : d.phase) p = rng.uniform(0.0, 2.0 * kPi);
    for (auto& a : d.limb_amp) a = rng.uniform(0.93, 1.07);
    return d;
}

inline double gauss_window(double t, double center, double width) {
    const double u = (t - center) / width;
    return std::exp(-u * u);
}

}  // namespace detail

/// Deterministic kinematic template for one activity sample.
///
/// Limb offsets and all motion amplitudes scale linearly with
/// height_scale; oscillation frequencies depend only on the seed, so two
/// tracks that differ only in height have limb excursions in exactly the
/// height ratio.
inline ScattererTrack synth_trajectory(ActivityKind activity, double height_scale,
                                       const RadarConfig& radar, std::uint64_t seed) {
    radar.validate();
    if (height_scale < 1.4 || height_scale > 2.0)
        throw DataError("synth_trajectory: height_scale outside [1.4, 2.0]");
    (void)activity_from_code(static_cast<int>(activity));  // range check

    const std::size_t n = radar.n_slow();
    const double dt = 1.0 / radar.prf;
    const double hs = height_scale / 1.8;  // scale relative to the 1.8 m reference body

    Rng rng(mix_seed(seed, 0x7261646172ULL));
    const detail::TemplateDraws d = detail::draw_template_jitter(rng);

    ScattererTrack track;
    track.height_scale = height_scale;
    track.positions = RealMatrix(6, n);
    track.amplitudes = {1.0, 0.4, 0.25, 0.25, 0.25, 0.25};  // torso, head, limbs

    if (activity == ActivityKind::empty) {
        for (double& a : track.amplitudes) a = 0.0;
        for (std::size_t k = 0; k < 6; ++k)
            for (std::size_t i = 0; i < n; ++i) track.positions(k, i) = d.standoff;
        return track;
    }

    // fixed radial body geometry at reference height, metres
    static constexpr std::array<double, 6> kOffsets = {0.0, 0.03, 0.06, -0.06, 0.10, -0.10};

    const double fj = d.freq_jitter;
    const double aj = d.amp_jitter;
    const double dur = radar.duration;

    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        double torso = 0.0;                 // torso displacement, reference-height units
        std::array<double, 6> limb{};       // per-scatterer motion about the torso

        auto gait = [&](double leg_amp, double arm_amp, double f_gait, double ramp) {
            limb[2] += ramp * arm_amp * aj * std::sin(2.0 * kPi * f_gait * t + d.phase[2]);
            limb[3] += ramp * arm_amp * aj * std::sin(2.0 * kPi * f_gait * t + d.phase[2] + kPi);
            limb[4] += ramp * leg_amp * aj * std::sin(2.0 * kPi * f_gait * t + d.phase[4]);
            limb[5] += ramp * leg_amp * aj * std::sin(2.0 * kPi * f_gait * t + d.phase[4] + kPi);
        };
        auto sway = [&](double amp, double f) {
            for (int k = 2; k < 6; ++k)
                limb[k] += amp * std::sin(2.0 * kPi * f * t + d.phase[k]);
        };

        switch (activity) {
            case ActivityKind::punching: {
                // amplitude ladder with kicking/rotating: shared waveform
                // and frequency, the motion extent is the discriminator
                const double f_p = 1.8 * fj;
                torso = 0.01 * std::sin(2.0 * kPi * 0.5 * fj * t + d.phase[0]);
                limb[2] = 0.32 * aj * d.limb_amp[0] * std::sin(2.0 * kPi * f_p * t + d.phase[2]);
                limb[3] = 0.32 * aj * d.limb_amp[1] * std::sin(2.0 * kPi * f_p * t + d.phase[2] + kPi);
                limb[4] = 0.02 * std::sin(2.0 * kPi * 0.5 * fj * t + d.phase[4]);
                limb[5] = 0.02 * std::sin(2.0 * kPi * 0.5 * fj * t + d.phase[5]);
                break;
            }
            case ActivityKind::kicking: {
                const double f_k = 1.8 * fj;
                torso = 0.015 * std::sin(2.0 * kPi * 0.4 * fj * t + d.phase[0]);
                limb[4] = 0.40 * aj * d.limb_amp[2] * std::sin(2.0 * kPi * f_k * t + d.phase[4]);
                limb[5] = 0.40 * aj * d.limb_amp[3] * std::sin(2.0 * kPi * f_k * t + d.phase[4] + kPi);
                limb[2] = 0.05 * std::sin(2.0 * kPi * f_k * t + d.phase[2]);
                limb[3] = 0.05 * std::sin(2.0 * kPi * f_k * t + d.phase[2] + kPi);
                break;
            }
            case ActivityKind::grabbing: {
                const double ts = t - d.t_shift;
                const double reach = smoothstep(ts, 0.8, 1.6) - smoothstep(ts, 2.2, 3.0);
                limb[2] = -0.45 * aj * reach;  // arm extends toward the radar
                sway(0.02, 0.4 * fj);
                break;
            }
            case ActivityKind::sitting_down: {
                const double ts = t - d.t_shift;
                torso = 0.22 * smoothstep(ts, 1.2, 2.4);
                limb[4] = 0.12 * aj * detail::gauss_window(ts, 1.8, 0.4) *
                          std::sin(2.0 * kPi * 1.5 * fj * t + d.phase[4]);
                limb[5] = 0.12 * aj * detail::gauss_window(ts, 1.8, 0.4) *
                          std::sin(2.0 * kPi * 1.5 * fj * t + d.phase[5]);
                limb[2] = 0.05 * std::sin(2.0 * kPi * 0.6 * fj * t + d.phase[2]);
                limb[3] = 0.05 * std::sin(2.0 * kPi * 0.6 * fj * t + d.phase[3]);
                break;
            }
            case ActivityKind::standing_up: {
                const double ts = t - d.t_shift;
                torso = 0.22 * (1.0 - smoothstep(ts, 1.2, 2.4));
                limb[4] = 0.12 * aj * detail::gauss_window(ts, 1.8, 0.4) *
                          std::sin(2.0 * kPi * 1.5 * fj * t + d.phase[4]);
                limb[5] = 0.12 * aj * detail::gauss_window(ts, 1.8, 0.4) *
                          std::sin(2.0 * kPi * 1.5 * fj * t + d.phase[5]);
                limb[2] = 0.05 * std::sin(2.0 * kPi * 0.6 * fj * t + d.phase[2]);
                limb[3] = 0.05 * std::sin(2.0 * kPi * 0.6 * fj * t + d.phase[3]);
                break;
            }
            case ActivityKind::rotating: {
                const double f_r = 1.8 * fj;
                torso = 0.02 * std::sin(2.0 * kPi * 0.5 * fj * t + d.phase[0]);
                limb[2] = 0.25 * aj * d.limb_amp[0] * std::sin(2.0 * kPi * f_r * t + d.phase[2]);
                limb[3] = 0.25 * aj * d.limb_amp[1] * std::sin(2.0 * kPi * f_r * t + d.phase[2] + kPi);
                limb[4] = 0.02 * std::sin(2.0 * kPi * 0.5 * fj * t + d.phase[4]);
                limb[5] = 0.02 * std::sin(2.0 * kPi * 0.5 * fj * t + d.phase[5]);
                break;
            }
            case ActivityKind::walking: {
                const double v = 0.55 * d.speed_jitter;
                torso = d.direction * v * (t - 0.5 * dur);
                gait(0.30, 0.18, 1.8 * fj, 1.0);
                break;
            }
            case ActivityKind::sitting_to_walking: {
                const double ts = t - d.t_shift;
                const double rise = 1.0 - smoothstep(ts, 0.3, 1.3);
                const double go = smoothstep(ts, 1.6, 2.4);
                const double v = 0.55 * d.speed_jitter;
                torso = 0.22 * rise + d.direction * v * (ts - 2.0) * go;
                limb[4] += 0.10 * aj * detail::gauss_window(ts, 0.8, 0.3) *
                           std::sin(2.0 * kPi * 1.5 * fj * t + d.phase[4]);
                limb[5] += 0.10 * aj * detail::gauss_window(ts, 0.8, 0.3) *
                           std::sin(2.0 * kPi * 1.5 * fj * t + d.phase[5]);
                gait(0.30, 0.18, 1.8 * fj, go);
                break;
            }
            case ActivityKind::walking_to_sitting: {
                const double ts = t - d.t_shift;
                const double stop = 1.0 - smoothstep(ts, 1.6, 2.4);
                const double v = 0.55 * d.speed_jitter;
                torso = d.direction * v * (ts - 2.0) * stop + 0.22 * smoothstep(ts, 2.6, 3.6);
                gait(0.30, 0.18, 1.8 * fj, stop);
                limb[4] += 0.10 * aj * detail::gauss_window(ts, 3.1, 0.4) *
                           std::sin(2.0 * kPi * 1.5 * fj * t + d.phase[4]);
                limb[5] += 0.10 * aj * detail::gauss_window(ts, 3.1, 0.4) *
                           std::sin(2.0 * kPi * 1.5 * fj * t + d.phase[5]);
                break;
            }
            case ActivityKind::falling_to_walking: {
                const double ts = t - d.t_shift;
                const double v = 0.50 * d.speed_jitter;
                torso = -0.40 * aj * smoothstep(ts, 0.4, 0.75)     // fast drop
                        + 0.40 * aj * smoothstep(ts, 1.2, 2.0)     // recover
                        + d.direction * v * (ts - 2.6) * smoothstep(ts, 2.2, 3.0);
                const double flail = detail::gauss_window(ts, 0.6, 0.25);
                for (int k = 2; k < 6; ++k)
                    limb[k] += 0.25 * aj * flail * std::sin(2.0 * kPi * 3.0 * fj * t + d.phase[k]);
                gait(0.30, 0.18, 1.8 * fj, smoothstep(ts, 2.2, 3.0));
                break;
            }
            case ActivityKind::walking_to_falling: {
                const double ts = t - d.t_shift;
                const double stop = 1.0 - smoothstep(ts, 2.4, 2.8);
                const double v = 0.50 * d.speed_jitter;
                torso = d.direction * v * (ts - 1.4) * stop - 0.40 * aj * smoothstep(ts, 3.0, 3.35);
                const double flail = detail::gauss_window(ts, 3.15, 0.2);
                for (int k = 2; k < 6; ++k)
                    limb[k] += 0.25 * aj * flail * std::sin(2.0 * kPi * 3.0 * fj * t + d.phase[k]);
                gait(0.30, 0.18, 1.8 * fj, stop);
                break;
            }
            case ActivityKind::empty:
                break;  // handled above
        }

        const double r_torso = d.standoff + hs * torso;
        track.positions(0, i) = r_torso;
        for (std::size_t k = 1; k < 6; ++k)
            track.positions(k, i) = r_torso + hs * (kOffsets[k] + limb[k]);
    }
    return track;
}

/// Complex transmission coefficient of the wall slab at frequency f (one way).
inline std::complex<double> wall_transmission(double f, const WallModel& wall) {
    wall.validate();
    if (!(f > 0.0)) throw DataError("wall_transmission: f must be > 0");
    const double att = std::exp(-wall.loss_factor * wall.thickness);
    const double phase = -2.0 * kPi * f * wall.extra_path() / kSpeedOfLight;
    return std::polar(att, phase);
}

/// Stepped-frequency echo of a scatterer track behind the wall.
///
/// data[m][n] = sum_k A_k * T(f_m)^2 * exp(-j*4*pi*f_m*R_k(n)/c) plus
/// complex AWGN at snr_db relative to the mean signal power. A
/// non-finite snr_db disables noise. Scenes with zero signal power (the
/// Empty class) fall back to an absolute per-component noise floor.
inline FrequencyEcho simulate_echo(const ScattererTrack& track, const RadarConfig& radar,
                                   const WallModel& wall, double snr_db, std::uint64_t seed,
                                   double noise_floor = 0.05) {
    radar.validate();
    wall.validate();
    const std::size_t n_slow = radar.n_slow();
    const std::size_t n_freq = radar.n_freq;
    if (track.n_slow() != n_slow)
        throw DataError("simulate_echo: track frames do not match radar slow-time frames");
    if (track.amplitudes.size() != track.n_scatterers())
        throw DataError("simulate_echo: amplitude count does not match scatterer count");

    FrequencyEcho echo;
    echo.config = radar;
    echo.data = ComplexMatrix(n_freq, n_slow);

    const double df = radar.freq_step();
    for (std::size_t k = 0; k < track.n_scatterers(); ++k) {
        const double amp = track.amplitudes[k];
        if (amp == 0.0) continue;
        for (std::size_t n = 0; n < n_slow; ++n) {
            const double r = track.positions(k, n);
            // geometric phase recurrence over the frequency steps
            std::complex<double> cur = std::polar(amp, -4.0 * kPi * radar.f_min * r / kSpeedOfLight);
            const std::complex<double> rot = std::polar(1.0, -4.0 * kPi * df * r / kSpeedOfLight);
            for (std::size_t m = 0; m < n_freq; ++m) {
                echo.data(m, n) += cur;
                cur *= rot;
            }
        }
    }

    // two-way wall transmission, constant per frequency row
    for (std::size_t m = 0; m < n_freq; ++m) {
        const std::complex<double> t = wall_transmission(radar.freq_at(m), wall);
        const std::complex<double> t2 = t * t;
        for (std::size_t n = 0; n < n_slow; ++n) echo.data(m, n) *= t2;
    }

    if (std::isfinite(snr_db)) {
        double p_sig = 0.0;
        for (const auto& v : echo.data.storage()) p_sig += std::norm(v);
        p_sig /= static_cast<double>(echo.data.size());
        const double sigma = p_sig > 0.0
                                 ? std::sqrt(p_sig * std::pow(10.0, -snr_db / 10.0))
                                 : noise_floor;
        const double s = sigma / std::sqrt(2.0);
        Rng rng(mix_seed(seed, 0x6e6f697365ULL));
        for (auto& v : echo.data.storage())
            v += std::complex<double>(s * rng.normal(), s * rng.normal());
    }

    if (radar.carrier_sim) {
        // slow-time IF carrier at prf/4; recover_baseband() undoes this
        for (std::size_t n = 0; n < n_slow; ++n) {
            const std::complex<double> c = std::polar(1.0, 0.5 * kPi * static_cast<double>(n));
            for (std::size_t m = 0; m < n_freq; ++m) echo.data(m, n) *= c;
        }
    }
    return echo;
}

}  // namespace twr

#endif  // TWR_RADAR_SIM_HPP
