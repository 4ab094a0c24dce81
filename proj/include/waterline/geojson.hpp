#ifndef WATERLINE_GEOJSON_HPP
#define WATERLINE_GEOJSON_HPP

#include <string>

#include "waterline/raster.hpp"

namespace waterline {

/// Reads the AOI polygon from a GeoJSON file. Accepts a bare Polygon
/// geometry, a Feature wrapping one, or a FeatureCollection (first Polygon
/// feature wins). Coordinates must already be in the rasters' projected CRS.
Polygon load_polygon(const std::string& path);

/// Writes a bare Polygon geometry.
void write_polygon(const Polygon& poly, const std::string& path);

}  // namespace waterline

#endif
