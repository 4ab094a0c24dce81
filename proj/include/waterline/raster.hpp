#ifndef WATERLINE_RASTER_HPP
#define WATERLINE_RASTER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace waterline {

/// Affine georeferencing for an axis-aligned grid. `origin_x/origin_y` is the
/// map position of the top-left corner of pixel (0,0). `pixel_width` is
/// strictly positive; `pixel_height` is nonzero and conventionally negative
/// for north-up rasters.
struct GeoTransform {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixel_width = 1.0;
    double pixel_height = -1.0;

    double center_x(int col) const { return origin_x + (col + 0.5) * pixel_width; }
    double center_y(int row) const { return origin_y + (row + 0.5) * pixel_height; }

    // Fractional pixel-center coordinates of a map position (inverse of the
    // center_x/center_y mapping).
    double col_at(double map_x) const { return (map_x - origin_x) / pixel_width - 0.5; }
    double row_at(double map_y) const { return (map_y - origin_y) / pixel_height - 0.5; }

    bool operator==(const GeoTransform&) const = default;
};

/// Single-band grid of scalar samples with georeferencing. Samples are
/// row-major; every sample is either finite or equal to the nodata sentinel.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<float> values;
    std::optional<float> nodata;
    GeoTransform transform;
    std::string crs;

    Raster() = default;
    Raster(int w, int h, float fill, GeoTransform t = {}, std::string crs_id = {})
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill),
          transform(t), crs(std::move(crs_id)) {}

    size_t index(int row, int col) const { return static_cast<size_t>(row) * width + col; }
    float at(int row, int col) const { return values[index(row, col)]; }
    float& at(int row, int col) { return values[index(row, col)]; }
    bool in_bounds(int row, int col) const {
        return row >= 0 && row < height && col >= 0 && col < width;
    }
    bool is_nodata(float v) const { return nodata && *nodata == v; }
    bool valid_at(int row, int col) const { return !is_nodata(at(row, col)); }
    size_t size() const { return values.size(); }

    bool operator==(const Raster&) const = default;
};

/// Boolean grid aligned to a raster. Byte-backed so rows can be written
/// concurrently.
struct RegionMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;
    GeoTransform transform;

    RegionMask() = default;
    RegionMask(int w, int h, GeoTransform t = {})
        : width(w), height(h), bits(static_cast<size_t>(w) * h, 0), transform(t) {}

    size_t index(int row, int col) const { return static_cast<size_t>(row) * width + col; }
    bool at(int row, int col) const { return bits[index(row, col)] != 0; }
    void set(int row, int col, bool v) { bits[index(row, col)] = v ? 1 : 0; }
    bool in_bounds(int row, int col) const {
        return row >= 0 && row < height && col >= 0 && col < width;
    }
    long count() const;
    bool empty() const { return count() == 0; }

    bool operator==(const RegionMask&) const = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

/// Polygon in map coordinates: first ring is the outer boundary, remaining
/// rings are holes. Rings are closed (first vertex repeated at the end).
struct Polygon {
    std::vector<std::vector<Point2>> rings;
};

/// Throws if a ring is open, too short, or has zero area (collinear).
void validate_polygon(const Polygon& poly);

struct RegionStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;  // population
    long count = 0;
};

/// Grid a raster lives on; carries the CRS so resampling can refuse to mix
/// coordinate systems.
struct GridSpec {
    GeoTransform transform;
    int width = 0;
    int height = 0;
    std::string crs;

    bool operator==(const GridSpec&) const = default;
};

inline GridSpec grid_of(const Raster& r) { return {r.transform, r.width, r.height, r.crs}; }

enum class Resampling { nearest, bilinear };

/// Mask of pixels whose center lies inside the polygon (even-odd rule).
/// Centers exactly on an edge resolve by the strict upward-crossing test.
RegionMask rasterize_polygon(const Polygon& poly, const GeoTransform& transform,
                             int width, int height);

/// Morphological dilation by a Euclidean distance in map units: output bit is
/// true iff some originally-true pixel center lies within `distance` of the
/// pixel center. distance 0 is the identity.
RegionMask dilate_mask(const RegionMask& mask, double distance);

/// Statistics over masked, non-nodata samples. Errors on an empty region.
RegionStats clip_stats(const Raster& raster, const RegionMask& mask);

/// Resample `source` onto `target`. CRS must match; out-of-extent targets
/// become nodata. Nearest is the default for DEM-to-SAR alignment.
Raster align_to(const Raster& source, const GridSpec& target, Resampling method);

}  // namespace waterline

#endif
