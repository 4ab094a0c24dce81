#ifndef WATERLINE_GEOTIFF_HPP
#define WATERLINE_GEOTIFF_HPP

#include <string>

#include "waterline/raster.hpp"

namespace waterline {

/// Reads a single-band GeoTIFF. Integer and floating sample formats are
/// accepted and converted to float32. Requires geotransform tags
/// (ModelPixelScale + ModelTiepoint); honors the GDAL nodata tag and reads
/// the CRS from the GeoTIFF key directory.
Raster load_raster(const std::string& path);

/// Writes an uncompressed float32 single-band GeoTIFF that load_raster
/// inverts exactly (grid values, transform, nodata, CRS).
void write_raster(const Raster& raster, const std::string& path);

}  // namespace waterline

#endif
