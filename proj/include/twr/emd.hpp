// SPDX-License-Identifier: Apache-2.0
//
// Empirical mode decomposition by envelope sifting. Envelopes are natural
// cubic splines through the local extrema with mirrored boundary knots;
// the sift stop rule is the normalized squared change between successive
// sift iterates. Dropping the first IMF(s) of each row is the denoising
// step used on the radar maps.

#ifndef TWR_EMD_HPP
#define TWR_EMD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "twr/common.hpp"
#include "twr/matrix.hpp"

namespace twr {

struct EMDConfig {
    std::size_t max_imfs = 8;
    std::size_t max_sift = 10;
    double sift_sd_stop = 0.3;
    std::size_t drop_imfs = 1;

    void validate() const {
        if (max_imfs < 1) throw DataError("EMDConfig: max_imfs must be >= 1");
        if (!(sift_sd_stop > 0.0 && sift_sd_stop < 1.0))
            throw DataError("EMDConfig: sift_sd_stop must be in (0,1)");
    }
};

struct EMDResult {
    std::vector<std::vector<double>> imfs;
    std::vector<double> residue;
};

namespace detail {

struct Extrema {
    std::vector<std::size_t> maxima;
    std::vector<std::size_t> minima;
    std::size_t count() const { return maxima.size() + minima.size(); }
};

inline Extrema find_extrema(const std::vector<double>& x) {
    Extrema e;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (x[i] > x[i - 1] && x[i] > x[i + 1]) e.maxima.push_back(i);
        else if (x[i] < x[i - 1] && x[i] < x[i + 1]) e.minima.push_back(i);
    }
    return e;
}

/// Natural cubic spline through (t, y) knots, t strictly increasing.
class CubicSpline {
public:
    CubicSpline(std::vector<double> t, std::vector<double> y)
        : t_(std::move(t)), y_(std::move(y)) {
        const std::size_t n = t_.size();
        m_.assign(n, 0.0);
        if (n < 3) return;  // n==2 degenerates to linear (second derivs zero)
        // Thomas algorithm for the natural spline tridiagonal system
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = t_[i] - t_[i - 1];
            const double h1 = t_[i + 1] - t_[i];
            a[i] = h0;
            b[i] = 2.0 * (h0 + h1);
            c[i] = h1;
            d[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = (d[i] - c[i] * (i + 2 < n ? m_[i + 1] : 0.0)) / b[i];
            if (i == 1) break;
        }
    }

    double eval(double x) const {
        const std::size_t n = t_.size();
        if (n == 1) return y_[0];
        std::size_t k = upper_segment(x);
        const double h = t_[k + 1] - t_[k];
        const double u = (x - t_[k]) / h;
        const double v = 1.0 - u;
        return v * y_[k] + u * y_[k + 1] +
               h * h / 6.0 * ((v * v * v - v) * m_[k] + (u * u * u - u) * m_[k + 1]);
    }

private:
    std::size_t upper_segment(double x) const {
        const std::size_t n = t_.size();
        if (x <= t_[1]) return 0;
        if (x >= t_[n - 2]) return n - 2;
        const auto it = std::upper_bound(t_.begin(), t_.end(), x);
        return static_cast<std::size_t>(it - t_.begin()) - 1;
    }
    std::vector<double> t_, y_, m_;
};

/// Spline envelope through extrema with two knots mirrored at each end.
inline std::vector<double> envelope(const std::vector<double>& x,
                                    const std::vector<std::size_t>& ext) {
    const std::size_t n = x.size();
    const double last = static_cast<double>(n - 1);
    std::vector<std::pair<double, double>> knots;
    const std::size_t m = ext.size();
    for (std::size_t j = std::min<std::size_t>(2, m); j-- > 0;) {
        const double t = -static_cast<double>(ext[j]);
        if (t < 0.0) knots.emplace_back(t, x[ext[j]]);
    }
    for (std::size_t j = 0; j < m; ++j)
        knots.emplace_back(static_cast<double>(ext[j]), x[ext[j]]);
    for (std::size_t j = (m >= 2 ? m - 2 : 0); j < m; ++j) {
        const double t = 2.0 * last - static_cast<double>(ext[j]);
        if (t > last) knots.emplace_back(t, x[ext[j]]);
    }
    std::sort(knots.begin(), knots.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [](const auto& a, const auto& b) { return a.first == b.first; }),
                knots.end());

    std::vector<double> env(n);
    if (knots.size() < 2) {
        std::fill(env.begin(), env.end(), knots.empty() ? 0.0 : knots[0].second);
        return env;
    }
    std::vector<double> t(knots.size()), y(knots.size());
    for (std::size_t j = 0; j < knots.size(); ++j) {
        t[j] = knots[j].first;
        y[j] = knots[j].second;
    }
    const CubicSpline sp(std::move(t), std::move(y));
    for (std::size_t i = 0; i < n; ++i) env[i] = sp.eval(static_cast<double>(i));
    return env;
}

}  // namespace detail

/// Sift intrinsic mode functions out of a series. The sum of the returned
/// IMFs plus the residue reconstructs the input exactly up to rounding.
inline EMDResult sift_imfs(const std::vector<double>& signal, const EMDConfig& cfg = {}) {
    cfg.validate();
    if (signal.size() < 8) throw DataError("sift_imfs: series shorter than 8 samples");

    EMDResult result;
    result.residue = signal;

    while (result.imfs.size() < cfg.max_imfs) {
        const detail::Extrema rex = detail::find_extrema(result.residue);
        if (rex.count() < 3) break;

        std::vector<double> h = result.residue;
        for (std::size_t s = 0; s < cfg.max_sift; ++s) {
            const detail::Extrema ex = detail::find_extrema(h);
            if (ex.maxima.empty() || ex.minima.empty()) break;
            const std::vector<double> up = detail::envelope(h, ex.maxima);
            const std::vector<double> lo = detail::envelope(h, ex.minima);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < h.size(); ++i) {
                const double mean = 0.5 * (up[i] + lo[i]);
                num += mean * mean;
                den += h[i] * h[i];
                h[i] -= mean;
            }
            if (num / (den + 1e-300) < cfg.sift_sd_stop) break;
        }
        for (std::size_t i = 0; i < h.size(); ++i) result.residue[i] -= h[i];
        result.imfs.push_back(std::move(h));
    }
    return result;
}

/// Row-wise EMD denoising: each row loses its first drop_imfs IMFs.
/// Rows that yield no IMFs pass through unchanged. Sifting stops after
/// the dropped IMFs; the later modes would be subtracted and added back.
inline RealMatrix emd_denoise(const RealMatrix& map, const EMDConfig& cfg = {}) {
    cfg.validate();
    if (map.cols() < 8) throw DataError("emd_denoise: map width must be >= 8");
    if (cfg.drop_imfs == 0) return map;
    EMDConfig truncated = cfg;
    truncated.max_imfs = std::min(cfg.max_imfs, cfg.drop_imfs);
    RealMatrix out = map;
    std::vector<double> row(map.cols());
    for (std::size_t r = 0; r < map.rows(); ++r) {
        for (std::size_t j = 0; j < map.cols(); ++j) row[j] = map(r, j);
        const EMDResult emd = sift_imfs(row, truncated);
        if (emd.imfs.empty()) continue;
        const std::size_t drop = std::min(cfg.drop_imfs, emd.imfs.size());
        for (std::size_t j = 0; j < map.cols(); ++j) {
            double v = row[j];
            for (std::size_t k = 0; k < drop; ++k) v -= emd.imfs[k][j];
            out(r, j) = v;
        }
    }
    return out;
}

}  // namespace twr

#endif  // TWR_EMD_HPP
