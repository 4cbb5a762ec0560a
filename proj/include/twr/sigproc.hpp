// SPDX-License-Identifier: Apache-2.0
//
// Signal processing stage: frequency-domain echoes to range-time and
// Doppler-time maps. The complex range profiles feed the Doppler path so
// phase survives; the RTM itself stores magnitudes for imaging.

#ifndef TWR_SIGPROC_HPP
#define TWR_SIGPROC_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "twr/common.hpp"
#include "twr/fft.hpp"
#include "twr/matrix.hpp"
#include "twr/radar_sim.hpp"

namespace twr {

struct RangeTimeMap {
    RealMatrix data;        // n_range x n_slow magnitude
    double range_res = 0;   // m per bin
    double prf = 0;         // Hz
};

struct DopplerTimeMap {
    RealMatrix data;         // n_doppler x n_frames magnitude
    double doppler_res = 0;  // Hz per bin
    std::size_t hop = 0;     // samples between frames
};

struct STFTConfig {
    std::size_t window_len = 128;    // Hamming window length, samples
    std::size_t hop = 14;            // samples
    std::size_t n_doppler_keep = 64; // central bins kept, zero Doppler centred

    void validate() const {
        if (hop == 0 || hop > window_len)
            throw DataError("STFTConfig: need 0 < hop <= window_len");
        if (n_doppler_keep == 0 || n_doppler_keep > window_len)
            throw DataError("STFTConfig: n_doppler_keep must be in 1..window_len");
    }

    std::size_t n_frames(std::size_t n_slow) const {
        return (n_slow - window_len) / hop + 1;
    }
};

inline std::vector<double> hamming_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                      static_cast<double>(n - 1));
    return w;
}

/// Column-wise inverse DFT over the frequency axis; output keeps the
/// n_freq x n_slow layout with rows now indexing range bins.
inline ComplexMatrix ifft_range_profile(const FrequencyEcho& echo) {
    const std::size_t n_freq = echo.data.rows();
    const std::size_t n_slow = echo.data.cols();
    if (echo.data.empty()) throw DataError("ifft_range_profile: empty echo");
    ComplexMatrix out(n_freq, n_slow);
    std::vector<std::complex<double>> col(n_freq);
    for (std::size_t n = 0; n < n_slow; ++n) {
        for (std::size_t m = 0; m < n_freq; ++m) col[m] = echo.data(m, n);
        fft(col, true);
        for (std::size_t m = 0; m < n_freq; ++m) out(m, n) = col[m];
    }
    return out;
}

namespace detail {

/// 129-tap windowed-sinc low pass with unit DC gain.
inline std::vector<double> lowpass_taps(double cutoff, double fs) {
    constexpr std::size_t kTaps = 129;
    const std::size_t mid = kTaps / 2;
    const double fc = cutoff / fs;
    std::vector<double> h(kTaps);
    const std::vector<double> w = hamming_window(kTaps);
    double sum = 0.0;
    for (std::size_t i = 0; i < kTaps; ++i) {
        const double x = static_cast<double>(i) - static_cast<double>(mid);
        const double sinc = x == 0.0 ? 2.0 * fc
                                     : std::sin(2.0 * kPi * fc * x) / (kPi * x);
        h[i] = sinc * w[i];
        sum += h[i];
    }
    for (auto& v : h) v /= sum;
    return h;
}

}  // namespace detail

/// Mix down by fc, low-pass filter, compensate the FIR group delay.
/// Length is preserved by replicating edge samples during convolution.
inline std::vector<std::complex<double>> demodulate(
    const std::vector<std::complex<double>>& signal, double fc, double fs, double cutoff) {
    if (!(cutoff > 0.0) || !(cutoff < fs / 2.0))
        throw DataError("demodulate: cutoff must satisfy 0 < cutoff < fs/2");
    const std::size_t n = signal.size();
    if (n == 0) return {};
    const std::vector<double> h = detail::lowpass_taps(cutoff, fs);
    const std::size_t half = h.size() / 2;  // 64

    std::vector<std::complex<double>> mixed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ang = -2.0 * kPi * fc * static_cast<double>(i) / fs;
        mixed[i] = signal[i] * std::polar(1.0, ang);
    }

    // edge-replicated padding by one group delay on each side
    std::vector<std::complex<double>> padded(n + 2 * half);
    for (std::size_t i = 0; i < half; ++i) padded[i] = mixed.front();
    for (std::size_t i = 0; i < n; ++i) padded[half + i] = mixed[i];
    for (std::size_t i = 0; i < half; ++i) padded[half + n + i] = mixed.back();

    std::vector<std::complex<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> acc(0.0, 0.0);
        // y[i] = sum_k h[k] * padded[i + 2*half - k]; delay already compensated
        for (std::size_t k = 0; k < h.size(); ++k) acc += h[k] * padded[i + 2 * half - k];
        out[i] = acc;
    }
    return out;
}

/// Undo the slow-time IF carrier via row-wise mixing and low-pass
/// filtering. Identity when the echo was produced at baseband.
inline FrequencyEcho recover_baseband(const FrequencyEcho& echo) {
    if (!echo.config.carrier_sim) return echo;
    FrequencyEcho out;
    out.config = echo.config;
    out.config.carrier_sim = false;
    out.data = ComplexMatrix(echo.data.rows(), echo.data.cols());
    const double prf = echo.config.prf;
    std::vector<std::complex<double>> row(echo.data.cols());
    for (std::size_t m = 0; m < echo.data.rows(); ++m) {
        for (std::size_t n = 0; n < row.size(); ++n) row[n] = echo.data(m, n);
        const auto base = demodulate(row, prf / 4.0, prf, 0.1875 * prf);
        for (std::size_t n = 0; n < row.size(); ++n) out.data(m, n) = base[n];
    }
    return out;
}

/// Magnitude of the complex range profiles.
inline RangeTimeMap build_rtm(const ComplexMatrix& profiles, double range_res = 0.0,
                              double prf = 0.0) {
    if (profiles.empty()) throw DataError("build_rtm: empty profile matrix");
    RangeTimeMap rtm;
    rtm.range_res = range_res;
    rtm.prf = prf;
    rtm.data = RealMatrix(profiles.rows(), profiles.cols());
    for (std::size_t i = 0; i < profiles.rows(); ++i)
        for (std::size_t j = 0; j < profiles.cols(); ++j)
            rtm.data(i, j) = std::abs(profiles(i, j));
    return rtm;
}

/// Sum the complex profiles along the range axis and run a Hamming STFT;
/// the Doppler axis is shifted so zero Doppler is centred and only the
/// central n_doppler_keep bins are kept.
inline DopplerTimeMap build_dtm(const ComplexMatrix& profiles, const STFTConfig& cfg,
                                double prf) {
    cfg.validate();
    if (profiles.empty()) throw DataError("build_dtm: empty profile matrix");
    const std::size_t n_slow = profiles.cols();
    if (n_slow < cfg.window_len)
        throw DataError("build_dtm: signal shorter than STFT window");

    std::vector<std::complex<double>> series(n_slow, {0.0, 0.0});
    for (std::size_t r = 0; r < profiles.rows(); ++r)
        for (std::size_t n = 0; n < n_slow; ++n) series[n] += profiles(r, n);

    const std::vector<double> w = hamming_window(cfg.window_len);
    const std::size_t frames = cfg.n_frames(n_slow);
    const std::size_t keep = cfg.n_doppler_keep;
    const std::size_t lo = cfg.window_len / 2 - keep / 2;

    DopplerTimeMap dtm;
    dtm.doppler_res = prf / static_cast<double>(cfg.window_len);
    dtm.hop = cfg.hop;
    dtm.data = RealMatrix(keep, frames);

    std::vector<std::complex<double>> frame(cfg.window_len);
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t start = f * cfg.hop;
        for (std::size_t i = 0; i < cfg.window_len; ++i)
            frame[i] = series[start + i] * w[i];
        fft(frame, false);
        fftshift(frame);
        for (std::size_t i = 0; i < keep; ++i) dtm.data(i, f) = std::abs(frame[lo + i]);
    }
    return dtm;
}

}  // namespace twr

#endif  // TWR_SIGPROC_HPP
