#!/usr/bin/env python3
"""Regenerates the committed GeoTIFF fixtures under tests/fixtures/.

tifffile acts as the independent writer: the C++ reader is checked against
files it had no hand in producing. Keep this script deterministic.
"""

import os
import struct

import numpy as np
import tifffile

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, os.pardir, "tests", "fixtures")

MODEL_PIXEL_SCALE = 33550
MODEL_TIEPOINT = 33922
GEO_KEY_DIRECTORY = 34735
GEO_ASCII_PARAMS = 34737
GDAL_NODATA = 42113


def geo_tags(origin_x, origin_y, pixel_w, pixel_h, citation, epsg):
    """GeoTIFF tags for a north-up grid (pixel_h positive, stored as -pixel_h)."""
    ascii_params = citation + "|"
    # Key directory: version 1.1.0, then (key, location, count, value) rows.
    keys = [
        (1024, 0, 1, 1),               # GTModelType = projected
        (1025, 0, 1, 1),               # GTRasterType = pixel-is-area
        (1026, GEO_ASCII_PARAMS, len(citation) + 1, 0),  # GTCitation
        (3072, 0, 1, epsg),            # ProjectedCSType
    ]
    directory = [1, 1, 0, len(keys)]
    for row in keys:
        directory.extend(row)
    return [
        (MODEL_PIXEL_SCALE, "d", 3, (pixel_w, pixel_h, 0.0)),
        (MODEL_TIEPOINT, "d", 6, (0.0, 0.0, 0.0, origin_x, origin_y, 0.0)),
        (GEO_KEY_DIRECTORY, "H", len(directory), tuple(directory)),
        (GEO_ASCII_PARAMS, "s", len(ascii_params) + 1, ascii_params),
    ]


def write(name, data, extratags, **kwargs):
    path = os.path.join(OUT, name)
    tifffile.imwrite(path, data, extratags=extratags, **kwargs)
    print("wrote", path)


def main():
    os.makedirs(OUT, exist_ok=True)
    citation = "WGS 84 / UTM zone 33N"

    # Reference raster with a nodata hole, asymmetric pixel size.
    ref = np.array([[1.5, -2.25, 3.0], [0.5, -9999.0, 7.75]], dtype=np.float32)
    tags = geo_tags(500000.0, 6000000.0, 10.0, 5.0, citation, 32633)
    tags.append((GDAL_NODATA, "s", 6, "-9999"))
    write("ref_3x2.tif", ref, tags)

    # Same grid stored as int16: the reader must widen to float.
    ints = np.array([[-17, -22, 3], [40, 0, -5]], dtype=np.int16)
    write("int_3x2.tif", ints, geo_tags(500000.0, 6000000.0, 10.0, 5.0, citation, 32633))

    # Georeferencing stripped: must be rejected.
    write("nogeo.tif", ref, [])

    # Two samples per pixel: must be rejected.
    multi = np.stack([ref, ref + 1.0], axis=-1)
    write(
        "multiband_3x2.tif",
        multi,
        geo_tags(500000.0, 6000000.0, 10.0, 5.0, citation, 32633),
        photometric="minisblack",
        planarconfig="contig",
    )

    # Tiled layout: the strip-based reader must refuse it, not misread it.
    big = np.arange(64 * 64, dtype=np.float32).reshape(64, 64)
    write(
        "tiled_64.tif",
        big,
        geo_tags(500000.0, 6000000.0, 10.0, 5.0, citation, 32633),
        tile=(32, 32),
    )


if __name__ == "__main__":
    main()
