#pragma once

#include <optional>
#include <string>

#include "waterline/raster.hpp"

namespace waterline {

// One dated observation: dual-pol SAR backscatter, terrain, and the reservoir
// outline it should be evaluated against.
struct Scene {
    std::string id;  // ISO date, doubles as the scene identifier
    Raster vv;
    Raster vh;
    Raster dem;
    Polygon aoi;
    std::optional<double> reference_level;  // gauge truth, when known
};

}  // namespace waterline
