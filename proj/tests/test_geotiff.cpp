#include <random>
#include <string>

#include <doctest.h>

#include "testutil.hpp"
#include "waterline/errors.hpp"
#include "waterline/geotiff.hpp"

using namespace waterline;

namespace {

std::string fixture(const char* name) {
    return std::string(WATERLINE_FIXTURE_DIR) + "/" + name;
}

}  // namespace

TEST_SUITE("geotiff") {

TEST_CASE("load_raster reads the float reference fixture") {
    const Raster r = load_raster(fixture("ref_3x2.tif"));
    REQUIRE(r.width == 3);
    REQUIRE(r.height == 2);

    CHECK(r.at(0, 0) == 1.5f);
    CHECK(r.at(0, 1) == -2.25f);
    CHECK(r.at(0, 2) == 3.0f);
    CHECK(r.at(1, 0) == 0.5f);
    CHECK(r.at(1, 1) == -9999.0f);
    CHECK(r.at(1, 2) == 7.75f);

    CHECK(r.transform.origin_x == 500000.0);
    CHECK(r.transform.origin_y == 6000000.0);
    CHECK(r.transform.pixel_width == 10.0);
    CHECK(r.transform.pixel_height == -5.0);

    REQUIRE(r.nodata.has_value());
    CHECK(*r.nodata == -9999.0f);
    CHECK(r.is_nodata(r.at(1, 1)));
    CHECK(r.valid_at(0, 0));
    CHECK_FALSE(r.valid_at(1, 1));

    CHECK(r.crs == "WGS 84 / UTM zone 33N");
}

TEST_CASE("load_raster widens integer samples to float") {
    const Raster r = load_raster(fixture("int_3x2.tif"));
    REQUIRE(r.width == 3);
    REQUIRE(r.height == 2);
    const float expected[] = {-17.0f, -22.0f, 3.0f, 40.0f, 0.0f, -5.0f};
    for (int i = 0; i < 6; ++i) CHECK(r.values[i] == expected[i]);
    CHECK_FALSE(r.nodata.has_value());
}

TEST_CASE("load_raster reads tiled layouts") {
    const Raster r = load_raster(fixture("tiled_64.tif"));
    REQUIRE(r.width == 64);
    REQUIRE(r.height == 64);
    // Fixture stores v = row * 64 + col.
    CHECK(r.at(0, 0) == 0.0f);
    CHECK(r.at(17, 40) == 17.0f * 64 + 40);
    CHECK(r.at(63, 63) == 4095.0f);
}

TEST_CASE("load_raster rejects unusable files") {
    CHECK_THROWS_AS(load_raster(fixture("missing.tif")), Error);
    CHECK_THROWS_AS(load_raster(fixture("nogeo.tif")), Error);
    CHECK_THROWS_AS(load_raster(fixture("multiband_3x2.tif")), Error);
}

TEST_CASE("write_raster/load_raster round-trips bit-for-bit") {
    std::mt19937 gen(7);
    Raster original =
        testutil::random_raster(gen, 37, 23, -1000.0f, 1000.0f,
                                GeoTransform{431000.25, 5123000.5, 12.5, -12.5});
    original.nodata = -32768.0f;
    original.at(5, 5) = -32768.0f;
    original.crs = "EPSG:32633";

    const std::string path = "/tmp/waterline_test_roundtrip.tif";
    write_raster(original, path);
    const Raster back = load_raster(path);

    CHECK(back == original);
}

TEST_CASE("write_raster round-trips without nodata or CRS") {
    Raster original(4, 4, 1.25f, GeoTransform{0, 4, 1, -1});
    const std::string path = "/tmp/waterline_test_plain.tif";
    write_raster(original, path);
    const Raster back = load_raster(path);
    CHECK(back.values == original.values);
    CHECK(back.transform == original.transform);
    CHECK_FALSE(back.nodata.has_value());
}

TEST_CASE("write_raster rejects empty rasters and bad paths") {
    CHECK_THROWS_AS(write_raster(Raster(), "/tmp/waterline_test_empty.tif"), Error);
    const Raster r(2, 2, 0.0f);
    CHECK_THROWS_AS(write_raster(r, "/tmp/no_such_dir_xyz/out.tif"), Error);
}

}  // TEST_SUITE("geotiff")
