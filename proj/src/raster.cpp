#include "waterline/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "waterline/errors.hpp"

namespace waterline {

long RegionMask::count() const {
    long n = 0;
    for (uint8_t b : bits) n += b != 0;
    return n;
}

void validate_polygon(const Polygon& poly) {
    if (poly.rings.empty()) throw Error("rasterize", "polygon has no rings");
    for (const auto& ring : poly.rings) {
        if (ring.size() < 4) throw Error("rasterize", "ring has fewer than 3 distinct vertices");
        if (!(ring.front() == ring.back()))
            throw Error("rasterize", "ring is not closed (first vertex must equal last)");
        double twice_area = 0.0;
        for (size_t i = 0; i + 1 < ring.size(); ++i)
            twice_area += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
        if (twice_area == 0.0) throw Error("rasterize", "degenerate ring (zero area)");
    }
}

RegionMask rasterize_polygon(const Polygon& poly, const GeoTransform& transform,
                             int width, int height) {
    validate_polygon(poly);
    if (width <= 0 || height <= 0) throw Error("rasterize", "empty target grid");

    RegionMask mask(width, height, transform);

    // Scanline even-odd fill: collect the x-crossings of each ring edge with
    // the row of pixel centers, then a center is inside iff an odd number of
    // crossings lie strictly to its right.
#pragma omp parallel for schedule(static)
    for (int row = 0; row < height; ++row) {
        const double yc = transform.center_y(row);
        std::vector<double> crossings;
        for (const auto& ring : poly.rings) {
            for (size_t i = 0; i + 1 < ring.size(); ++i) {
                const Point2& a = ring[i];
                const Point2& b = ring[i + 1];
                if ((a.y > yc) != (b.y > yc))
                    crossings.push_back((b.x - a.x) * (yc - a.y) / (b.y - a.y) + a.x);
            }
        }
        if (crossings.empty()) continue;
        std::sort(crossings.begin(), crossings.end());
        size_t next = 0;  // first crossing not yet passed
        for (int col = 0; col < width; ++col) {
            const double xc = transform.center_x(col);
            while (next < crossings.size() && !(xc < crossings[next])) ++next;
            if ((crossings.size() - next) % 2 == 1) mask.set(row, col, true);
        }
    }
    return mask;
}

namespace {

// 1-D lower envelope of parabolas (x - x_q)^2 + f(q) sampled at x_i = i * h.
// Classic two-scan distance transform building block; inputs must be finite.
void edt_1d(const std::vector<double>& f, double h, std::vector<double>& out,
            std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    v.assign(n, 0);
    z.assign(n + 1, 0.0);
    int k = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        const double xq = q * h;
        double s;
        for (;;) {
            const double xp = v[k] * h;
            s = ((f[q] + xq * xq) - (f[v[k]] + xp * xp)) / (2 * xq - 2 * xp);
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        const double xq = q * h;
        while (z[k + 1] < xq) ++k;
        const double d = xq - v[k] * h;
        out[q] = d * d + f[v[k]];
    }
}

}  // namespace

RegionMask dilate_mask(const RegionMask& mask, double distance) {
    if (distance < 0.0) throw Error("dilate", "negative distance");
    if (distance == 0.0) return mask;

    const int w = mask.width;
    const int h = mask.height;
    RegionMask out(w, h, mask.transform);
    if (w == 0 || h == 0) return out;

    const double hx = std::abs(mask.transform.pixel_width);
    const double hy = std::abs(mask.transform.pixel_height);

    // Columns whose nearest true pixel exceeds the grid diagonal never matter
    // once a true pixel exists anywhere, so a large finite stand-in for
    // "no true pixel in this column" is safe.
    const double big = (static_cast<double>(w) * hx) * (static_cast<double>(w) * hx) +
                       (static_cast<double>(h) * hy) * (static_cast<double>(h) * hy) + 1.0;

    bool any = false;
    for (uint8_t b : mask.bits)
        if (b) { any = true; break; }
    if (!any) return out;

    // Pass 1: squared distance to the nearest true pixel within each column.
    std::vector<double> colsq(static_cast<size_t>(w) * h, big);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < w; ++c) {
        double run = big;
        for (int r = 0; r < h; ++r) {
            if (mask.at(r, c)) run = 0.0;
            else if (run < big) run += hy;  // distance in map units
            colsq[mask.index(r, c)] = run < big ? run * run : big;
        }
        run = big;
        for (int r = h - 1; r >= 0; --r) {
            if (mask.at(r, c)) run = 0.0;
            else if (run < big) run += hy;
            const size_t i = mask.index(r, c);
            if (run < big) colsq[i] = std::min(colsq[i], run * run);
        }
    }

    // Pass 2: parabola envelope along rows combines the column distances into
    // full 2-D squared Euclidean distances.
    const double limit = distance * distance;
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        std::vector<double> f(w), d(w), z;
        std::vector<int> v;
        for (int c = 0; c < w; ++c) f[c] = colsq[mask.index(r, c)];
        edt_1d(f, hx, d, v, z);
        for (int c = 0; c < w; ++c)
            if (d[c] <= limit) out.set(r, c, true);
    }
    return out;
}

RegionStats clip_stats(const Raster& raster, const RegionMask& mask) {
    if (mask.width != raster.width || mask.height != raster.height ||
        !(mask.transform == raster.transform))
        throw Error("stats", "mask grid does not match raster");

    const int h = raster.height;
    struct RowPartial {
        double min = std::numeric_limits<double>::infinity();
        double max = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        long count = 0;
    };
    std::vector<RowPartial> parts(h);

    // Per-row partials combined serially keep the result independent of the
    // thread count.
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        RowPartial p;
        for (int c = 0; c < raster.width; ++c) {
            if (!mask.at(r, c)) continue;
            const float v = raster.at(r, c);
            if (raster.is_nodata(v)) continue;
            p.min = std::min(p.min, static_cast<double>(v));
            p.max = std::max(p.max, static_cast<double>(v));
            p.sum += v;
            ++p.count;
        }
        parts[r] = p;
    }

    RegionStats stats;
    stats.min = std::numeric_limits<double>::infinity();
    stats.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& p : parts) {
        stats.min = std::min(stats.min, p.min);
        stats.max = std::max(stats.max, p.max);
        sum += p.sum;
        stats.count += p.count;
    }
    if (stats.count == 0) throw Error("stats", "empty region (no valid samples under mask)");
    stats.mean = sum / stats.count;

    std::vector<double> sq(h, 0.0);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        double s = 0.0;
        for (int c = 0; c < raster.width; ++c) {
            if (!mask.at(r, c)) continue;
            const float v = raster.at(r, c);
            if (raster.is_nodata(v)) continue;
            const double d = v - stats.mean;
            s += d * d;
        }
        sq[r] = s;
    }
    double ss = 0.0;
    for (double s : sq) ss += s;
    stats.stddev = std::sqrt(ss / stats.count);
    return stats;
}

Raster align_to(const Raster& source, const GridSpec& target, Resampling method) {
    if (source.crs != target.crs)
        throw Error("align", "CRS mismatch ('" + source.crs + "' vs '" + target.crs +
                                 "'); reprojection is out of scope");
    if (target.width <= 0 || target.height <= 0) throw Error("align", "empty target grid");

    if (target.transform == source.transform && target.width == source.width &&
        target.height == source.height)
        return source;

    Raster out(target.width, target.height, 0.0f, target.transform, target.crs);
    out.nodata = source.nodata;

    const GeoTransform& st = source.transform;
    // Map-extent bounds of the source; centers outside become nodata,
    // centers inside but beyond the outermost sample centers clamp to the
    // half-pixel fringe.
    const double x0 = st.origin_x;
    const double x1 = st.origin_x + source.width * st.pixel_width;
    const double ya = st.origin_y;
    const double yb = st.origin_y + source.height * st.pixel_height;
    const double ymin = std::min(ya, yb);
    const double ymax = std::max(ya, yb);

    std::vector<uint8_t> miss(out.size(), 0);

#pragma omp parallel for schedule(static)
    for (int r = 0; r < target.height; ++r) {
        for (int c = 0; c < target.width; ++c) {
            const size_t i = out.index(r, c);
            const double mx = target.transform.center_x(c);
            const double my = target.transform.center_y(r);
            if (mx < x0 || mx > x1 || my < ymin || my > ymax) {
                miss[i] = 1;
                continue;
            }
            const double fc = st.col_at(mx);
            const double fr = st.row_at(my);
            if (method == Resampling::nearest) {
                const int sc = std::clamp(static_cast<int>(std::lround(fc)), 0, source.width - 1);
                const int sr = std::clamp(static_cast<int>(std::lround(fr)), 0, source.height - 1);
                out.values[i] = source.at(sr, sc);
            } else {
                const double cc = std::clamp(fc, 0.0, source.width - 1.0);
                const double rr = std::clamp(fr, 0.0, source.height - 1.0);
                const int c0 = std::clamp(static_cast<int>(std::floor(cc)), 0,
                                          std::max(source.width - 2, 0));
                const int r0 = std::clamp(static_cast<int>(std::floor(rr)), 0,
                                          std::max(source.height - 2, 0));
                const int c1 = std::min(c0 + 1, source.width - 1);
                const int r1 = std::min(r0 + 1, source.height - 1);
                const double tx = cc - c0;
                const double ty = rr - r0;
                const float s00 = source.at(r0, c0), s01 = source.at(r0, c1);
                const float s10 = source.at(r1, c0), s11 = source.at(r1, c1);
                if (source.is_nodata(s00) || source.is_nodata(s01) || source.is_nodata(s10) ||
                    source.is_nodata(s11)) {
                    miss[i] = 1;
                    continue;
                }
                const double top = s00 + (s01 - s00) * tx;
                const double bot = s10 + (s11 - s10) * tx;
                out.values[i] = static_cast<float>(top + (bot - top) * ty);
            }
        }
    }

    if (std::any_of(miss.begin(), miss.end(), [](uint8_t m) { return m != 0; })) {
        if (!out.nodata) out.nodata = -9999.0f;
        const float nd = *out.nodata;
        for (size_t i = 0; i < miss.size(); ++i)
            if (miss[i]) out.values[i] = nd;
    }
    return out;
}

}  // namespace waterline
