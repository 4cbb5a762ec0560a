// SPDX-License-Identifier: Apache-2.0
//
// Radix-agnostic DFT: iterative radix-2 for power-of-two lengths and
// Bluestein's chirp-z algorithm for everything else, so the frequency
// grid size is not restricted. Forward transform is unscaled, inverse
// carries the 1/N factor.

#ifndef TWR_FFT_HPP
#define TWR_FFT_HPP

#include <complex>
#include <vector>

#include "twr/common.hpp"

namespace twr {

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    // bit reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline void fft_bluestein(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;
    // chirp exp(+/- j*pi*k^2/n); k^2 taken mod 2n to avoid precision loss
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = static_cast<std::size_t>(
            (static_cast<unsigned long long>(k) * k) % (2ULL * n));
        const double ang = kPi * static_cast<double>(k2) / static_cast<double>(n) *
                           (inverse ? 1.0 : -1.0);
        chirp[k] = std::complex<double>(std::cos(ang), std::sin(ang));
    }
    std::vector<std::complex<double>> x(m), y(m);
    for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
    y[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);
    fft_pow2(x, false);
    fft_pow2(y, false);
    for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
    fft_pow2(x, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * scale * chirp[k];
}

}  // namespace detail

/// In-place DFT. inverse=true applies conjugate kernel and 1/N scaling.
inline void fft(std::vector<std::complex<double>>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    if (detail::is_pow2(n)) {
        detail::fft_pow2(a, inverse);
    } else {
        detail::fft_bluestein(a, inverse);
    }
    if (inverse) {
        const double s = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= s;
    }
}

inline std::vector<std::complex<double>> fft_copy(std::vector<std::complex<double>> a,
                                                  bool inverse = false) {
    fft(a, inverse);
    return a;
}

/// Swap halves so that frequency zero lands at index n/2.
inline void fftshift(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    std::vector<std::complex<double>> out(n);
    const std::size_t h = n / 2;
    for (std::size_t i = 0; i < n; ++i) out[i] = a[(i + h) % n];
    a.swap(out);
}

}  // namespace twr

#endif  // TWR_FFT_HPP
