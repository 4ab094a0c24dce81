#include "waterline/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "waterline/errors.hpp"

namespace waterline {

namespace {

void require_same_grid(const Raster& a, const Raster& b, const char* stage) {
    if (a.width != b.width || a.height != b.height || !(a.transform == b.transform) ||
        a.crs != b.crs)
        throw Error(stage, "input grids do not match");
}

}  // namespace

Raster combine_bands(const Raster& vv, const Raster& vh) {
    require_same_grid(vv, vh, "combine");

    Raster out(vv.width, vv.height, 0.0f, vv.transform, vv.crs);
    out.nodata = vv.nodata ? vv.nodata : vh.nodata;

#pragma omp parallel for schedule(static)
    for (int r = 0; r < vv.height; ++r) {
        for (int c = 0; c < vv.width; ++c) {
            const size_t i = vv.index(r, c);
            const float a = vv.values[i];
            const float b = vh.values[i];
            if (vv.is_nodata(a) || vh.is_nodata(b))
                out.values[i] = *out.nodata;
            else
                out.values[i] = a * b;
        }
    }
    return out;
}

Raster speckle_filter(const Raster& input, int radius) {
    if (radius < 0) throw Error("speckle", "kernel radius must be non-negative");

    // Circular kernel: offsets whose center distance is within `radius`.
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) offsets.emplace_back(dy, dx);

    Raster out = input;

#pragma omp parallel for schedule(static)
    for (int r = 0; r < input.height; ++r) {
        std::vector<float> window;
        window.reserve(offsets.size());
        for (int c = 0; c < input.width; ++c) {
            window.clear();
            for (const auto& [dy, dx] : offsets) {
                const int rr = r + dy, cc = c + dx;
                if (!input.in_bounds(rr, cc)) continue;
                const float v = input.at(rr, cc);
                if (input.is_nodata(v)) continue;
                window.push_back(v);
            }
            if (window.empty()) {
                out.at(r, c) = *input.nodata;  // only reachable when input has nodata
                continue;
            }
            const size_t n = window.size();
            auto mid = window.begin() + n / 2;
            std::nth_element(window.begin(), mid, window.end());
            if (n % 2 == 1) {
                out.at(r, c) = *mid;
            } else {
                const float hi = *mid;
                const float lo = *std::max_element(window.begin(), mid);
                out.at(r, c) = static_cast<float>((static_cast<double>(lo) + hi) / 2.0);
            }
        }
    }
    return out;
}

Raster gaussian_smooth(const Raster& input, double sigma) {
    if (sigma <= 0.0) throw Error("smooth", "sigma must be positive");

    const int hw = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> w(hw + 1);
    for (int k = 0; k <= hw; ++k) w[k] = std::exp(-(k * k) / (2.0 * sigma * sigma));

    // Two separable passes; each renormalizes its weights over the valid
    // samples so borders shrink instead of padding.
    auto pass = [&](const Raster& src, bool horizontal) {
        Raster dst = src;
#pragma omp parallel for schedule(static)
        for (int r = 0; r < src.height; ++r) {
            for (int c = 0; c < src.width; ++c) {
                double num = 0.0, den = 0.0;
                for (int k = -hw; k <= hw; ++k) {
                    const int rr = horizontal ? r : r + k;
                    const int cc = horizontal ? c + k : c;
                    if (!src.in_bounds(rr, cc)) continue;
                    const float v = src.at(rr, cc);
                    if (src.is_nodata(v)) continue;
                    num += w[std::abs(k)] * v;
                    den += w[std::abs(k)];
                }
                if (den == 0.0)
                    dst.at(r, c) = *src.nodata;
                else
                    dst.at(r, c) = static_cast<float>(num / den);
            }
        }
        return dst;
    };

    return pass(pass(input, true), false);
}

Gradients image_gradients(const Raster& smoothed) {
    Gradients g;
    g.width = smoothed.width;
    g.height = smoothed.height;
    g.gx.assign(smoothed.size(), 0.0f);
    g.gy.assign(smoothed.size(), 0.0f);
    g.magnitude.assign(smoothed.size(), 0.0f);

#pragma omp parallel for schedule(static)
    for (int r = 0; r < smoothed.height; ++r) {
        for (int c = 0; c < smoothed.width; ++c) {
            const size_t i = smoothed.index(r, c);
            if (!smoothed.valid_at(r, c)) continue;

            const int cl = std::max(c - 1, 0);
            const int cr = std::min(c + 1, smoothed.width - 1);
            const int ru = std::max(r - 1, 0);
            const int rd = std::min(r + 1, smoothed.height - 1);
            if (!smoothed.valid_at(r, cl) || !smoothed.valid_at(r, cr) ||
                !smoothed.valid_at(ru, c) || !smoothed.valid_at(rd, c))
                continue;

            const double dx = (smoothed.at(r, cr) - smoothed.at(r, cl)) / (cr - cl);
            const double dy = (smoothed.at(rd, c) - smoothed.at(ru, c)) / (rd - ru);
            g.gx[i] = static_cast<float>(dx);
            g.gy[i] = static_cast<float>(dy);
            g.magnitude[i] = static_cast<float>(std::sqrt(dx * dx + dy * dy));
        }
    }
    return g;
}

EdgeRaster canny_edges(const Raster& input, const RegionMask& region, double sigma) {
    if (region.width != input.width || region.height != input.height)
        throw Error("canny", "region mask does not match the raster grid");
    if (region.empty()) throw Error("canny", "empty region (threshold undefined)");

    // Threshold comes from the pre-smoothing input restricted to the region.
    const RegionStats stats = clip_stats(input, region);
    const double threshold = 0.5 * stats.stddev;

    const Raster smoothed = gaussian_smooth(input, sigma);
    const Gradients g = image_gradients(smoothed);

    EdgeRaster edges;
    edges.threshold = threshold;
    edges.magnitudes = Raster(input.width, input.height, 0.0f, input.transform, input.crs);

    const int w = input.width;
    const int h = input.height;
    auto mag_at = [&](int r, int c) -> float {
        if (r < 0 || r >= h || c < 0 || c >= w) return 0.0f;
        return g.magnitude[static_cast<size_t>(r) * w + c];
    };

    // tan(67.5 deg): separates the axis-aligned sectors from the diagonals.
    constexpr double kDiagonalSlope = 2.414213562373095;

#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const size_t i = static_cast<size_t>(r) * w + c;
            const float m = g.magnitude[i];
            if (m < threshold || !region.bits[i]) continue;

            const double ax = std::abs(static_cast<double>(g.gx[i]));
            const double ay = std::abs(static_cast<double>(g.gy[i]));
            int dr, dc;
            if (ax > ay * kDiagonalSlope) {
                dr = 0;
                dc = 1;
            } else if (ay > ax * kDiagonalSlope) {
                dr = 1;
                dc = 0;
            } else if (static_cast<double>(g.gx[i]) * g.gy[i] >= 0.0) {
                dr = 1;
                dc = 1;
            } else {
                dr = 1;
                dc = -1;
            }
            // Keep local maxima along the gradient direction; plateaus break
            // toward the back neighbor so a two-pixel ridge keeps one pixel.
            if (m >= mag_at(r + dr, c + dc) && m > mag_at(r - dr, c - dc))
                edges.magnitudes.values[i] = m;
        }
    }
    return edges;
}

double otsu_threshold(const Raster& input, const RegionMask& region, int bins) {
    if (region.width != input.width || region.height != input.height)
        throw Error("otsu", "region mask does not match the raster grid");
    if (bins < 2) throw Error("otsu", "need at least 2 bins");

    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    long total = 0;
    for (int r = 0; r < input.height; ++r) {
        for (int c = 0; c < input.width; ++c) {
            if (!region.at(r, c)) continue;
            const float v = input.at(r, c);
            if (input.is_nodata(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            ++total;
        }
    }
    if (total == 0) throw Error("otsu", "empty region");
    if (lo == hi) throw Error("otsu", "constant region (no split exists)");

    std::vector<long> hist(bins, 0);
    const double width = (static_cast<double>(hi) - lo) / bins;
    for (int r = 0; r < input.height; ++r) {
        for (int c = 0; c < input.width; ++c) {
            if (!region.at(r, c)) continue;
            const float v = input.at(r, c);
            if (input.is_nodata(v)) continue;
            int b = static_cast<int>((v - lo) / width);
            hist[std::clamp(b, 0, bins - 1)]++;
        }
    }

    // Single pass over splits with cumulative moments; bin indices stand in
    // for values (between-class variance is affine-invariant). All quantities
    // are integers, so the argmax comparison is exact: sigma_b^2(k) is
    // proportional to (m0*W - w0*M)^2 / (w0*w1), compared cross-multiplied.
    // 128-bit products stay exact up to ~4e5 samples at 256 bins.
    long total_moment = 0;
    for (int b = 0; b < bins; ++b) total_moment += hist[b] * b;

    using int128 = __int128;
    int best_split = -1;
    int128 best_num = 0;
    long best_den = 1;
    long w0 = 0, m0 = 0;
    for (int k = 0; k + 1 < bins; ++k) {
        w0 += hist[k];
        m0 += hist[k] * k;
        const long w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        const long d = m0 * total - w0 * total_moment;
        const int128 num = int128(d) * d;
        const long den = w0 * w1;
        if (best_split < 0 || num * best_den > best_num * den) {
            best_split = k;
            best_num = num;
            best_den = den;
        }
    }
    if (best_split < 0) throw Error("otsu", "constant region (no split exists)");
    return lo + (best_split + 1) * width;
}

}  // namespace waterline
