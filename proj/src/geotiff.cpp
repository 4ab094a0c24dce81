#include "waterline/geotiff.hpp"

#include <tiffio.h>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <memory>
#include <mutex>
#include <vector>

#include "waterline/errors.hpp"

namespace waterline {

namespace {

constexpr ttag_t kTagModelPixelScale = 33550;
constexpr ttag_t kTagModelTiepoint = 33922;
constexpr ttag_t kTagGeoKeyDirectory = 34735;
constexpr ttag_t kTagGeoAsciiParams = 34737;
constexpr ttag_t kTagGdalNodata = 42113;

// GeoTIFF keys used for the CRS.
constexpr uint16_t kKeyModelType = 1024;
constexpr uint16_t kKeyRasterType = 1025;
constexpr uint16_t kKeyCitation = 1026;
constexpr uint16_t kKeyProjectedCSType = 3072;

const TIFFFieldInfo kGeoFieldInfo[] = {
    {kTagModelPixelScale, TIFF_VARIABLE, TIFF_VARIABLE, TIFF_DOUBLE, FIELD_CUSTOM, 1, 1,
     const_cast<char*>("ModelPixelScaleTag")},
    {kTagModelTiepoint, TIFF_VARIABLE, TIFF_VARIABLE, TIFF_DOUBLE, FIELD_CUSTOM, 1, 1,
     const_cast<char*>("ModelTiepointTag")},
    {kTagGeoKeyDirectory, TIFF_VARIABLE, TIFF_VARIABLE, TIFF_SHORT, FIELD_CUSTOM, 1, 1,
     const_cast<char*>("GeoKeyDirectoryTag")},
    {kTagGeoAsciiParams, TIFF_VARIABLE, TIFF_VARIABLE, TIFF_ASCII, FIELD_CUSTOM, 1, 0,
     const_cast<char*>("GeoASCIIParamsTag")},
    {kTagGdalNodata, TIFF_VARIABLE, TIFF_VARIABLE, TIFF_ASCII, FIELD_CUSTOM, 1, 0,
     const_cast<char*>("GDALNoDataValue")},
};

TIFFExtendProc g_parent_extender = nullptr;

void extend_tags(TIFF* tif) {
    TIFFMergeFieldInfo(tif, kGeoFieldInfo, sizeof(kGeoFieldInfo) / sizeof(kGeoFieldInfo[0]));
    if (g_parent_extender) g_parent_extender(tif);
}

void install_tag_extender() {
    static std::once_flag once;
    std::call_once(once, [] {
        g_parent_extender = TIFFSetTagExtender(extend_tags);
        // libtiff prints warnings about unknown tags to stderr by default;
        // unknown-tag noise is expected when probing third-party files.
        TIFFSetWarningHandler(nullptr);
    });
}

struct TiffCloser {
    void operator()(TIFF* t) const {
        if (t) TIFFClose(t);
    }
};
using TiffPtr = std::unique_ptr<TIFF, TiffCloser>;

float convert_sample(const uint8_t* p, uint16_t format, uint16_t bits) {
    switch (format) {
        case SAMPLEFORMAT_IEEEFP:
            if (bits == 32) {
                float f;
                std::memcpy(&f, p, 4);
                return f;
            }
            if (bits == 64) {
                double d;
                std::memcpy(&d, p, 8);
                return static_cast<float>(d);
            }
            break;
        case SAMPLEFORMAT_INT:
            if (bits == 8) return static_cast<float>(*reinterpret_cast<const int8_t*>(p));
            if (bits == 16) {
                int16_t v;
                std::memcpy(&v, p, 2);
                return static_cast<float>(v);
            }
            if (bits == 32) {
                int32_t v;
                std::memcpy(&v, p, 4);
                return static_cast<float>(v);
            }
            break;
        case SAMPLEFORMAT_UINT:
            if (bits == 8) return static_cast<float>(*p);
            if (bits == 16) {
                uint16_t v;
                std::memcpy(&v, p, 2);
                return static_cast<float>(v);
            }
            if (bits == 32) {
                uint32_t v;
                std::memcpy(&v, p, 4);
                return static_cast<float>(v);
            }
            break;
        default:
            break;
    }
    throw Error("load", "unsupported sample type (format " + std::to_string(format) + ", " +
                            std::to_string(bits) + " bits)");
}

std::string read_crs(TIFF* tif) {
    uint16_t key_count = 0;
    uint16_t* keys = nullptr;
    if (!TIFFGetField(tif, kTagGeoKeyDirectory, &key_count, &keys) || key_count < 4) return {};

    char* ascii = nullptr;
    std::string params;
    if (TIFFGetField(tif, kTagGeoAsciiParams, &ascii) && ascii) params = ascii;

    const uint16_t num_keys = keys[3];
    std::string citation;
    uint16_t epsg = 0;
    for (uint16_t k = 0; k < num_keys; ++k) {
        const uint16_t* entry = keys + 4 * (k + 1);
        if (4 * (k + 2) > key_count) break;
        const uint16_t id = entry[0], loc = entry[1], count = entry[2], value = entry[3];
        if (id == kKeyCitation && loc == kTagGeoAsciiParams) {
            if (value < params.size()) {
                citation = params.substr(value, std::min<size_t>(count, params.size() - value));
                while (!citation.empty() && (citation.back() == '|' || citation.back() == '\0'))
                    citation.pop_back();
            }
        } else if (id == kKeyProjectedCSType && loc == 0) {
            epsg = value;
        }
    }
    if (!citation.empty()) return citation;
    if (epsg != 0) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "EPSG:%u", epsg);
        return buf;
    }
    return {};
}

void write_crs(TIFF* tif, const std::string& crs) {
    if (crs.empty()) return;

    uint16_t epsg = 0;
    if (crs.size() > 5 && (crs.rfind("EPSG:", 0) == 0 || crs.rfind("epsg:", 0) == 0)) {
        unsigned long code = std::strtoul(crs.c_str() + 5, nullptr, 10);
        if (code > 0 && code < 65535) epsg = static_cast<uint16_t>(code);
    }

    std::string ascii = crs + "|";
    std::vector<uint16_t> dir = {1, 1, 0, 0};
    auto add_key = [&dir](uint16_t id, uint16_t loc, uint16_t count, uint16_t value) {
        dir.push_back(id);
        dir.push_back(loc);
        dir.push_back(count);
        dir.push_back(value);
        dir[3] += 1;
    };
    add_key(kKeyModelType, 0, 1, 1);   // projected
    add_key(kKeyRasterType, 0, 1, 1);  // pixel-is-area
    add_key(kKeyCitation, static_cast<uint16_t>(kTagGeoAsciiParams),
            static_cast<uint16_t>(ascii.size()), 0);
    if (epsg != 0) add_key(kKeyProjectedCSType, 0, 1, epsg);

    TIFFSetField(tif, kTagGeoKeyDirectory, static_cast<uint16_t>(dir.size()), dir.data());
    TIFFSetField(tif, kTagGeoAsciiParams, ascii.c_str());
}

}  // namespace

Raster load_raster(const std::string& path) {
    install_tag_extender();

    TiffPtr tif(TIFFOpen(path.c_str(), "r"));
    if (!tif) throw Error("load", "cannot open '" + path + "'");

    uint32_t width = 0, height = 0;
    TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &width);
    TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &height);
    if (width == 0 || height == 0) throw Error("load", "empty image: " + path);

    uint16_t samples_per_pixel = 1;
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &samples_per_pixel);
    if (samples_per_pixel != 1)
        throw Error("load", "multi-band TIFF (" + std::to_string(samples_per_pixel) +
                                " samples/pixel): " + path);

    uint16_t bits = 0, format = SAMPLEFORMAT_UINT;
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bits);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &format);

    uint16_t scale_count = 0, tie_count = 0;
    double* scale = nullptr;
    double* tiepoints = nullptr;
    if (!TIFFGetField(tif.get(), kTagModelPixelScale, &scale_count, &scale) || scale_count < 2)
        throw Error("load", "missing geotransform (no ModelPixelScale tag): " + path);
    if (!TIFFGetField(tif.get(), kTagModelTiepoint, &tie_count, &tiepoints) || tie_count < 6)
        throw Error("load", "missing geotransform (no ModelTiepoint tag): " + path);

    Raster raster;
    raster.width = static_cast<int>(width);
    raster.height = static_cast<int>(height);
    raster.transform.pixel_width = scale[0];
    raster.transform.pixel_height = -scale[1];
    // Tiepoint maps raster position (i, j) to map position (x, y).
    raster.transform.origin_x = tiepoints[3] - tiepoints[0] * raster.transform.pixel_width;
    raster.transform.origin_y = tiepoints[4] - tiepoints[1] * raster.transform.pixel_height;
    if (raster.transform.pixel_width <= 0.0 || raster.transform.pixel_height == 0.0)
        throw Error("load", "invalid pixel scale in geotransform: " + path);

    char* nodata_text = nullptr;
    if (TIFFGetField(tif.get(), kTagGdalNodata, &nodata_text) && nodata_text)
        raster.nodata = std::strtof(nodata_text, nullptr);

    raster.crs = read_crs(tif.get());

    raster.values.resize(static_cast<size_t>(width) * height);
    const size_t bytes_per_sample = bits / 8;
    if (TIFFIsTiled(tif.get())) {
        uint32_t tile_w = 0, tile_h = 0;
        TIFFGetField(tif.get(), TIFFTAG_TILEWIDTH, &tile_w);
        TIFFGetField(tif.get(), TIFFTAG_TILELENGTH, &tile_h);
        if (tile_w == 0 || tile_h == 0) throw Error("load", "invalid tile layout: " + path);
        std::vector<uint8_t> tile(TIFFTileSize(tif.get()));
        for (uint32_t ty = 0; ty < height; ty += tile_h)
            for (uint32_t tx = 0; tx < width; tx += tile_w) {
                if (TIFFReadTile(tif.get(), tile.data(), tx, ty, 0, 0) < 0)
                    throw Error("load", "read failure at tile (" + std::to_string(tx) + ", " +
                                            std::to_string(ty) + "): " + path);
                const uint32_t rows = std::min(tile_h, height - ty);
                const uint32_t cols = std::min(tile_w, width - tx);
                for (uint32_t r = 0; r < rows; ++r)
                    for (uint32_t c = 0; c < cols; ++c)
                        raster.values[static_cast<size_t>(ty + r) * width + tx + c] =
                            convert_sample(tile.data() + (static_cast<size_t>(r) * tile_w + c) *
                                                             bytes_per_sample,
                                           format, bits);
            }
        return raster;
    }
    std::vector<uint8_t> scanline(TIFFScanlineSize(tif.get()));
    for (uint32_t row = 0; row < height; ++row) {
        if (TIFFReadScanline(tif.get(), scanline.data(), row) < 0)
            throw Error("load", "read failure at row " + std::to_string(row) + ": " + path);
        for (uint32_t col = 0; col < width; ++col)
            raster.values[static_cast<size_t>(row) * width + col] =
                convert_sample(scanline.data() + col * bytes_per_sample, format, bits);
    }
    return raster;
}

void write_raster(const Raster& raster, const std::string& path) {
    install_tag_extender();

    if (raster.width <= 0 || raster.height <= 0)
        throw Error("write", "refusing to write an empty raster");
    if (raster.values.size() != static_cast<size_t>(raster.width) * raster.height)
        throw Error("write", "raster value count does not match its dimensions");
    if (raster.transform.pixel_width <= 0.0 || raster.transform.pixel_height == 0.0)
        throw Error("write", "invalid geotransform");

    TiffPtr tif(TIFFOpen(path.c_str(), "w"));
    if (!tif) throw Error("write", "cannot create '" + path + "'");

    TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<uint32_t>(raster.width));
    TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<uint32_t>(raster.height));
    TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, static_cast<uint16_t>(1));
    TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, static_cast<uint16_t>(32));
    TIFFSetField(tif.get(), TIFFTAG_SAMPLEFORMAT, SAMPLEFORMAT_IEEEFP);
    TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_NONE);
    TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
    TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(tif.get(), 0));

    const double scale[3] = {raster.transform.pixel_width, -raster.transform.pixel_height, 0.0};
    const double tiepoint[6] = {0.0, 0.0, 0.0, raster.transform.origin_x,
                                raster.transform.origin_y, 0.0};
    TIFFSetField(tif.get(), kTagModelPixelScale, static_cast<uint16_t>(3), scale);
    TIFFSetField(tif.get(), kTagModelTiepoint, static_cast<uint16_t>(6), tiepoint);

    if (raster.nodata) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(*raster.nodata));
        TIFFSetField(tif.get(), kTagGdalNodata, buf);
    }
    write_crs(tif.get(), raster.crs);

    for (int row = 0; row < raster.height; ++row) {
        const float* line = raster.values.data() + static_cast<size_t>(row) * raster.width;
        if (TIFFWriteScanline(tif.get(), const_cast<float*>(line), row) < 0)
            throw Error("write", "write failure at row " + std::to_string(row) + ": " + path);
    }
}

}  // namespace waterline
