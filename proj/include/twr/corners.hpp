// SPDX-License-Identifier: Apache-2.0
//
// Micro-Doppler corner extraction: difference-of-Gaussians response,
// top-30 strict local maxima with greedy non-maximum suppression, and
// third-coordinate completion from the complementary map. The result is
// the fixed 60x3 point cloud (time, range, Doppler) that flattens to the
// 180-dim reduced feature.

#ifndef TWR_CORNERS_HPP
#define TWR_CORNERS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "twr/common.hpp"
#include "twr/dataproc.hpp"
#include "twr/matrix.hpp"

namespace twr {

struct DoGConfig {
    double sigma1 = 1.0;       // narrow Gaussian sigma, px
    double k = 1.6;            // wide/narrow sigma ratio
    std::size_t nms_radius = 5;  // Chebyshev suppression radius, px
    std::size_t count = 30;    // corners kept per map (fixed)

    void validate() const {
        if (!(sigma1 > 0.0)) throw DataError("DoGConfig: sigma1 must be > 0");
        if (!(k > 1.0)) throw DataError("DoGConfig: k must be > 1");
        if (count != 30) throw DataError("DoGConfig: corner count is fixed at 30");
    }
};

struct CornerPoint {
    double t = 0.0;         // normalized time in [0,1]
    double v = 0.0;         // normalized range or Doppler in [0,1]
    double response = 0.0;  // |DoG| magnitude; 0 marks a padded point
};

struct PointCloudRD {
    RealMatrix points;  // 60x3: (t, range, doppler)
};

inline constexpr std::size_t kPointCloudRows = 60;
inline constexpr std::size_t kFlatFeatureLen = 180;

namespace detail {

/// Truncated normalized 1-D Gaussian, radius ceil(3*sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    const std::size_t radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double x = static_cast<double>(i) - static_cast<double>(radius);
        k[i] = std::exp(-0.5 * x * x / (sigma * sigma));
        sum += k[i];
    }
    for (auto& v : k) v /= sum;
    return k;
}

inline std::size_t reflect_index(long i, long n) {
    // symmetric reflection: -1 -> 0, n -> n-1
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return static_cast<std::size_t>(i);
}

inline RealMatrix blur_separable(const RealMatrix& m, const std::vector<double>& kernel) {
    const long rows = static_cast<long>(m.rows());
    const long cols = static_cast<long>(m.cols());
    const long radius = static_cast<long>(kernel.size() / 2);
    RealMatrix tmp(m.rows(), m.cols()), out(m.rows(), m.cols());
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (long d = -radius; d <= radius; ++d)
                acc += kernel[d + radius] * m(i, reflect_index(j + d, cols));
            tmp(i, j) = acc;
        }
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (long d = -radius; d <= radius; ++d)
                acc += kernel[d + radius] * tmp(reflect_index(i + d, rows), j);
            out(i, j) = acc;
        }
    return out;
}

}  // namespace detail

/// Difference-of-Gaussians band-pass response: G(k*sigma1) - G(sigma1).
inline RealMatrix dog_response(const EnhancedMap& map, const DoGConfig& cfg = {}) {
    cfg.validate();
    const RealMatrix wide = detail::blur_separable(map.data, detail::gaussian_kernel(cfg.k * cfg.sigma1));
    const RealMatrix narrow = detail::blur_separable(map.data, detail::gaussian_kernel(cfg.sigma1));
    RealMatrix out(map.data.rows(), map.data.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.storage()[i] = wide.storage()[i] - narrow.storage()[i];
    return out;
}

/// Exactly 30 corners per map: strict 3x3 local maxima of |response|,
/// greedy selection by descending magnitude with Chebyshev-radius
/// suppression, ties broken by (row, col); short lists pad with (0,0,0).
inline std::vector<CornerPoint> detect_corners(const RealMatrix& response,
                                               const DoGConfig& cfg = {}) {
    cfg.validate();
    const long rows = static_cast<long>(response.rows());
    const long cols = static_cast<long>(response.cols());
    struct Candidate {
        double mag;
        long i, j;
    };
    std::vector<Candidate> cands;
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) {
            const double mag = std::abs(response(i, j));
            bool is_max = mag > 0.0;
            for (long di = -1; di <= 1 && is_max; ++di)
                for (long dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const long ni = i + di, nj = j + dj;
                    if (ni < 0 || ni >= rows || nj < 0 || nj >= cols) continue;
                    if (std::abs(response(ni, nj)) >= mag) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) cands.push_back({mag, i, j});
        }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.mag != b.mag) return a.mag > b.mag;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    const long r = static_cast<long>(cfg.nms_radius);
    std::vector<Candidate> accepted;
    for (const auto& c : cands) {
        if (accepted.size() >= cfg.count) break;
        bool suppressed = false;
        for (const auto& a : accepted) {
            if (std::max(std::labs(c.i - a.i), std::labs(c.j - a.j)) <= r) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) accepted.push_back(c);
    }

    const double norm_i = static_cast<double>(rows - 1);
    const double norm_j = static_cast<double>(cols - 1);
    std::vector<CornerPoint> out(cfg.count);
    for (std::size_t n = 0; n < accepted.size(); ++n) {
        out[n].t = static_cast<double>(accepted[n].j) / norm_j;
        out[n].v = static_cast<double>(accepted[n].i) / norm_i;
        out[n].response = accepted[n].mag;
    }
    return out;  // remaining entries stay (0,0,0)
}

/// Complete the missing coordinate from the other map's column at the
/// same normalized time: strongest strict 1-D local maximum within the
/// NMS radius, 0 when the column is flat.
inline double complete_third_dim(const CornerPoint& corner, const EnhancedMap& other_map,
                                 const DoGConfig& cfg = {}) {
    cfg.validate();
    const long rows = static_cast<long>(other_map.data.rows());
    const long cols = static_cast<long>(other_map.data.cols());
    const long col = std::lround(corner.t * static_cast<double>(cols - 1));

    double best_val = 0.0;
    long best_idx = -1;
    const long r = static_cast<long>(cfg.nms_radius);
    for (long i = 0; i < rows; ++i) {
        const double v = other_map.data(i, col);
        bool is_peak = false;
        for (long d = -r; d <= r; ++d) {
            if (d == 0) continue;
            const long ni = i + d;
            if (ni < 0 || ni >= rows) continue;
            const double nv = other_map.data(ni, col);
            if (nv >= v) {
                is_peak = false;
                break;
            }
            is_peak = true;
        }
        if (is_peak && (best_idx < 0 || v > best_val)) {
            best_val = v;
            best_idx = i;
        }
    }
    if (best_idx < 0) return 0.0;
    return static_cast<double>(best_idx) / static_cast<double>(rows - 1);
}

/// Assemble the 60x3 point cloud: rows 0..29 from the R2TM corners with
/// Doppler completed from the D2TM, rows 30..59 from the D2TM corners
/// with range completed from the R2TM. Padded corners stay (0,0,0).
inline PointCloudRD build_pcrd(const EnhancedMap& r2tm, const EnhancedMap& d2tm,
                               const DoGConfig& cfg = {}) {
    cfg.validate();
    const auto rc = detect_corners(dog_response(r2tm, cfg), cfg);
    const auto dc = detect_corners(dog_response(d2tm, cfg), cfg);

    PointCloudRD pc;
    pc.points = RealMatrix(kPointCloudRows, 3);
    for (std::size_t n = 0; n < cfg.count; ++n) {
        const CornerPoint& c = rc[n];
        if (c.response > 0.0) {
            pc.points(n, 0) = c.t;
            pc.points(n, 1) = c.v;
            pc.points(n, 2) = complete_third_dim(c, d2tm, cfg);
        }
    }
    for (std::size_t n = 0; n < cfg.count; ++n) {
        const CornerPoint& c = dc[n];
        const std::size_t row = cfg.count + n;
        if (c.response > 0.0) {
            pc.points(row, 0) = c.t;
            pc.points(row, 1) = complete_third_dim(c, r2tm, cfg);
            pc.points(row, 2) = c.v;
        }
    }
    return pc;
}

/// Row-major flatten to the 180-dim feature vector.
inline std::vector<double> flatten_pcrd(const PointCloudRD& pc) {
    if (pc.points.rows() != kPointCloudRows || pc.points.cols() != 3)
        throw DataError("flatten_pcrd: point cloud must be 60x3");
    return pc.points.storage();
}

inline PointCloudRD reshape_pcrd(const std::vector<double>& flat) {
    if (flat.size() != kFlatFeatureLen)
        throw DataError("reshape_pcrd: expected a 180-dim vector");
    PointCloudRD pc;
    pc.points = RealMatrix(kPointCloudRows, 3);
    pc.points.storage() = flat;
    return pc;
}

}  // namespace twr

#endif  // TWR_CORNERS_HPP
