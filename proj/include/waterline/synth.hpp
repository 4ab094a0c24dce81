#pragma once

#include <cstdint>
#include <string>

#include "waterline/estimator.hpp"
#include "waterline/raster.hpp"
#include "waterline/scene.hpp"

namespace waterline {

enum class DemShape { bowl, valley };

struct NoiseStats {
    double mean = 0.0;
    double stddev = 0.0;
};

// Everything that determines a generated scene; the seed fixes all draws, so
// equal params give bit-identical scenes.
struct SynthParams {
    int size = 256;            // square grid, px
    double pixel_size = 10.0;  // m
    DemShape shape = DemShape::bowl;
    double base = 10.0;        // elevation at the DEM floor, m
    double slope = 0.25;       // m per px away from the floor
    double true_level = 12.0;  // m
    NoiseStats water{-20.0, 0.5};
    NoiseStats land{-6.0, 0.8};
    double salt = 0.0;         // per-pixel probability of a bright outlier
    double aoi_margin = 50.0;  // m around the wet bounding box (< buffer_distance)
    std::uint64_t seed = 0;
    std::string date = "2020-01-01";

    void validate() const;  // throws Error("synth", ...)
};

// Bowl: base + slope * distance from grid center. Valley: base + slope * |col
// offset| only. Both deterministic, no randomness involved.
Raster make_dem(const SynthParams& params);

// Dark-water/bright-land Gaussian intensities split at true_level, optional
// salt outliers, independent VV/VH draws. The AOI is the wet bounding box
// expanded by aoi_margin; reference level = true_level.
Scene make_sar_scene(const Raster& dem, const SynthParams& params);

// Dense fitness sweep from min to max DEM at the given granularity; argmax,
// lowest level on ties. Oracle counterpart of estimate_level.
double brute_force_level(const Scene& scene, const EstimatorConfig& config,
                         double granularity);

}  // namespace waterline
