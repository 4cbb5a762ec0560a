// SPDX-License-Identifier: Apache-2.0
//
// Data processing stage: normalization, row-wise EMD denoising, contrast
// limited adaptive histogram equalization and the linear-to-square axis
// stretch. Every map leaves this stage as a 64x64 image in [0,1], so the
// two flattened maps concatenate to an 8192-dim feature.

#ifndef TWR_DATAPROC_HPP
#define TWR_DATAPROC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "twr/common.hpp"
#include "twr/emd.hpp"
#include "twr/matrix.hpp"

namespace twr {

inline constexpr std::size_t kMapSize = 64;

enum class MapKind : int { r2tm = 0, d2tm = 1 };
enum class MapAxis : int { range = 0, doppler = 1 };

struct CLAHEConfig {
    std::size_t tiles = 8;    // tiles x tiles grid
    double clip_limit = 2.0;  // relative to the uniform histogram level
    std::size_t bins = 256;

    void validate() const {
        if (tiles == 0 || kMapSize % tiles != 0)
            throw DataError("CLAHEConfig: tiles must divide 64 evenly");
        if (clip_limit < 1.0) throw DataError("CLAHEConfig: clip_limit must be >= 1");
        if (bins < 2) throw DataError("CLAHEConfig: bins must be >= 2");
    }
};

/// Record of the resampling applied by the square-axis stretch.
struct AxisMapping {
    MapAxis axis = MapAxis::range;
    std::vector<double> row_positions;  // source row index per output row
    std::vector<double> col_positions;  // source column index per output column
};

struct EnhancedMap {
    RealMatrix data;  // 64x64 in [0,1]
    MapKind kind = MapKind::r2tm;
    AxisMapping axis_mapping;
};

/// Min-max normalization onto [0,1]; constant input maps to all zeros.
inline RealMatrix minmax_norm(const RealMatrix& map) {
    if (map.empty()) throw DataError("minmax_norm: empty matrix");
    if (!all_finite(map)) throw DataError("minmax_norm: non-finite entries");
    const double lo = matrix_min(map), hi = matrix_max(map);
    RealMatrix out(map.rows(), map.cols());
    if (hi > lo) {
        const double s = 1.0 / (hi - lo);
        for (std::size_t i = 0; i < map.size(); ++i)
            out.storage()[i] = (map.storage()[i] - lo) * s;
    }
    return out;
}

namespace detail {

struct TileMapping {
    bool identity = false;        // single occupied bin: pass values through
    std::vector<double> lut;      // bin -> equalized value in (0,1]
};

inline TileMapping build_tile_mapping(const RealMatrix& map, std::size_t r0, std::size_t c0,
                                      std::size_t th, std::size_t tw, const CLAHEConfig& cfg) {
    const std::size_t npix = th * tw;
    std::vector<double> hist(cfg.bins, 0.0);
    std::size_t occupied = 0;
    for (std::size_t i = 0; i < th; ++i)
        for (std::size_t j = 0; j < tw; ++j) {
            const double v = clamp01(map(r0 + i, c0 + j));
            const std::size_t b = std::min(cfg.bins - 1,
                                           static_cast<std::size_t>(v * cfg.bins));
            if (hist[b] == 0.0) ++occupied;
            hist[b] += 1.0;
        }

    TileMapping tm;
    if (occupied <= 1) {
        tm.identity = true;
        return tm;
    }
    const double clip = std::max(1.0, cfg.clip_limit * static_cast<double>(npix) /
                                          static_cast<double>(cfg.bins));
    double excess = 0.0;
    for (auto& h : hist) {
        if (h > clip) {
            excess += h - clip;
            h = clip;
        }
    }
    const double share = excess / static_cast<double>(cfg.bins);
    double cum = 0.0;
    tm.lut.resize(cfg.bins);
    for (std::size_t b = 0; b < cfg.bins; ++b) {
        cum += hist[b] + share;
        tm.lut[b] = cum / static_cast<double>(npix);
    }
    return tm;
}

inline double apply_tile(const TileMapping& tm, double v, std::size_t bins) {
    if (tm.identity) return v;
    const std::size_t b = std::min(bins - 1, static_cast<std::size_t>(clamp01(v) * bins));
    return tm.lut[b];
}

}  // namespace detail

/// Contrast limited adaptive histogram equalization with per-tile clipped
/// histograms and bilinear blending of the tile mappings. A tile whose
/// pixels occupy a single histogram bin keeps its values unchanged, so a
/// constant image equals its input.
inline RealMatrix clahe(const RealMatrix& map, const CLAHEConfig& cfg = {}) {
    cfg.validate();
    if (map.rows() != kMapSize || map.cols() != kMapSize)
        throw DataError("clahe: expected a 64x64 map");
    const std::size_t t = cfg.tiles;
    const std::size_t th = kMapSize / t, tw = kMapSize / t;

    std::vector<detail::TileMapping> tiles(t * t);
    for (std::size_t ty = 0; ty < t; ++ty)
        for (std::size_t tx = 0; tx < t; ++tx)
            tiles[ty * t + tx] = detail::build_tile_mapping(map, ty * th, tx * tw, th, tw, cfg);

    RealMatrix out(kMapSize, kMapSize);
    for (std::size_t i = 0; i < kMapSize; ++i) {
        double fy = (static_cast<double>(i) + 0.5) / static_cast<double>(th) - 0.5;
        fy = std::min(std::max(fy, 0.0), static_cast<double>(t - 1));
        const std::size_t ty0 = static_cast<std::size_t>(fy);
        const std::size_t ty1 = std::min(ty0 + 1, t - 1);
        const double wy = fy - static_cast<double>(ty0);
        for (std::size_t j = 0; j < kMapSize; ++j) {
            double fx = (static_cast<double>(j) + 0.5) / static_cast<double>(tw) - 0.5;
            fx = std::min(std::max(fx, 0.0), static_cast<double>(t - 1));
            const std::size_t tx0 = static_cast<std::size_t>(fx);
            const std::size_t tx1 = std::min(tx0 + 1, t - 1);
            const double wx = fx - static_cast<double>(tx0);
            const double v = map(i, j);
            const double m00 = detail::apply_tile(tiles[ty0 * t + tx0], v, cfg.bins);
            const double m01 = detail::apply_tile(tiles[ty0 * t + tx1], v, cfg.bins);
            const double m10 = detail::apply_tile(tiles[ty1 * t + tx0], v, cfg.bins);
            const double m11 = detail::apply_tile(tiles[ty1 * t + tx1], v, cfg.bins);
            const double top = m00 * (1.0 - wx) + m01 * wx;
            const double bot = m10 * (1.0 - wx) + m11 * wx;
            out(i, j) = clamp01(top * (1.0 - wy) + bot * wy);
        }
    }
    return out;
}

/// Resample the chosen axis on a quadratic index law toward low values
/// (range) or symmetrically toward zero Doppler (doppler); the other axis
/// is resampled linearly. Output is the fixed 64x64 enhanced map.
inline EnhancedMap square_axis_interp(const RealMatrix& map, MapAxis axis) {
    if (map.empty()) throw DataError("square_axis_interp: empty map");
    const std::size_t rows_in = map.rows(), cols_in = map.cols();
    const double last_out = static_cast<double>(kMapSize - 1);

    EnhancedMap em;
    em.kind = axis == MapAxis::range ? MapKind::r2tm : MapKind::d2tm;
    em.axis_mapping.axis = axis;
    em.axis_mapping.row_positions.resize(kMapSize);
    em.axis_mapping.col_positions.resize(kMapSize);

    for (std::size_t i = 0; i < kMapSize; ++i) {
        const double u = static_cast<double>(i);
        double p = 0.0;
        if (axis == MapAxis::range) {
            const double f = u / last_out;
            p = f * f * static_cast<double>(rows_in - 1);
        } else {
            const double z_in = static_cast<double>(rows_in / 2);
            const double z_out = static_cast<double>(kMapSize / 2);
            const double d = u - z_out;
            if (d >= 0.0) {
                const double span_out = last_out - z_out;
                const double span_in = static_cast<double>(rows_in - 1) - z_in;
                const double f = span_out > 0.0 ? d / span_out : 0.0;
                p = z_in + f * f * span_in;
            } else {
                const double f = -d / z_out;
                p = z_in - f * f * z_in;
            }
        }
        em.axis_mapping.row_positions[i] = p;
    }
    for (std::size_t j = 0; j < kMapSize; ++j)
        em.axis_mapping.col_positions[j] =
            static_cast<double>(j) * static_cast<double>(cols_in - 1) / last_out;

    em.data = RealMatrix(kMapSize, kMapSize);
    for (std::size_t i = 0; i < kMapSize; ++i)
        for (std::size_t j = 0; j < kMapSize; ++j)
            em.data(i, j) = clamp01(bilinear_at(map, em.axis_mapping.row_positions[i],
                                                em.axis_mapping.col_positions[j]));
    return em;
}

/// Full enhancement chain: norm, EMD denoise, norm, anti-aliased resize
/// to 64x64, CLAHE, square-axis stretch.
inline EnhancedMap enhance_map(const RealMatrix& raw, MapKind kind,
                               const EMDConfig& emd_cfg = {},
                               const CLAHEConfig& clahe_cfg = {}) {
    const RealMatrix normed = minmax_norm(raw);
    const RealMatrix denoised = emd_denoise(normed, emd_cfg);
    const RealMatrix renormed = minmax_norm(denoised);
    const RealMatrix resized = resize_area(renormed, kMapSize, kMapSize);
    const RealMatrix equalized = clahe(resized, clahe_cfg);
    return square_axis_interp(equalized,
                              kind == MapKind::r2tm ? MapAxis::range : MapAxis::doppler);
}

}  // namespace twr

#endif  // TWR_DATAPROC_HPP
