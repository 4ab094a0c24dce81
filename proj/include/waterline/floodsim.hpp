#ifndef WATERLINE_FLOODSIM_HPP
#define WATERLINE_FLOODSIM_HPP

#include <cstdint>
#include <vector>

#include "waterline/raster.hpp"

namespace waterline {

enum class Connectivity : int { four = 4, eight = 8 };

/// Component labeling of a mask: 0 = background, 1..count = components,
/// numbered in row-major first-encounter order.
struct LabelGrid {
    int width = 0;
    int height = 0;
    std::vector<int32_t> labels;
    int count = 0;
    GeoTransform transform;

    int32_t at(int row, int col) const {
        return labels[static_cast<size_t>(row) * width + col];
    }
};

struct Pixel {
    int row = 0;
    int col = 0;
    bool operator==(const Pixel&) const = default;
};

/// Row-major sorted list of pixel indices.
using PixelSet = std::vector<Pixel>;

/// Pixels submerged at `level`: region bit set, DEM sample valid and <= level.
/// Nodata DEM cells count as land.
RegionMask water_mask(const Raster& dem, double level, const RegionMask& region);

/// Deterministic connected-component labeling under 4- or 8-connectivity.
LabelGrid connected_components(const RegionMask& mask, Connectivity connectivity);

/// Mask of the component with the most pixels; ties go to the smallest label
/// (earliest row-major discovery). Empty input yields an empty mask.
RegionMask largest_component(const LabelGrid& labels);

/// Component pixels with at least one 4-neighbor outside the component;
/// off-raster neighbors count as outside.
PixelSet shoreline(const RegionMask& component);

}  // namespace waterline

#endif
