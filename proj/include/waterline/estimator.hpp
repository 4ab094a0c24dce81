#pragma once

#include <functional>
#include <string>
#include <vector>

#include "waterline/floodsim.hpp"
#include "waterline/preprocess.hpp"
#include "waterline/raster.hpp"
#include "waterline/scene.hpp"

namespace waterline {

struct EstimatorConfig {
    int sample_num = 9;
    double tolerance = 1.0;        // meters; stop once the step shrinks below this
    int speckle_radius = 3;        // px
    double gaussian_sigma = 1.0;
    double buffer_distance = 500;  // meters of AOI expansion
    Connectivity connectivity = Connectivity::eight;

    void validate() const;  // throws Error("config", ...) on bad values
};

struct IterationTrace {
    double lower = 0;
    double upper = 0;
    double step = 0;
    std::vector<double> candidates;
    std::vector<double> values;
    std::vector<long> shoreline_sizes;  // px per candidate, for diagnostics
    double best_level = 0;
};

struct FitnessTrace {
    std::vector<IterationTrace> iterations;
};

struct EstimateResult {
    double level = 0;
    FitnessTrace trace;
    EstimatorConfig config;
    std::string scene_id;
};

// n evenly spaced values from lower to upper inclusive; value i is
// lower + i * spacing, with the last pinned to upper exactly.
std::vector<double> linspace(double lower, double upper, int n);

struct FitnessSample {
    double value = 0;
    long shoreline_px = 0;
};

// Search objective: flood the DEM at `level`, keep the biggest connected
// water body, sum edge magnitudes along its shoreline.
double fitness(double level, const Raster& dem, const EdgeRaster& edges,
               const RegionMask& region, Connectivity connectivity);
FitnessSample fitness_detail(double level, const Raster& dem, const EdgeRaster& edges,
                             const RegionMask& region, Connectivity connectivity);

// Coarse-to-fine sampling search over an arbitrary objective. Each iteration
// evaluates sample_num candidates (in parallel), re-centers the bracket on the
// argmax, and shrinks the step by 2/(sample_num-1) until it reaches the
// tolerance (or stops early if sample_num is too small to contract).
EstimateResult maximize_sampled(const std::function<FitnessSample(double)>& objective,
                                double lower, double upper, int sample_num,
                                double tolerance);

// Worst-case iteration count of maximize_sampled for a starting bracket of
// width `range`: ceil(log_{(n-1)/2}(range / ((n-1) tol))) + 1, at least 1.
int iteration_bound(double range, int n, double tol);

// Scene after the once-per-scene stages: buffered AOI mask, aligned DEM, and
// the edge image every fitness evaluation reads from.
struct PreparedScene {
    Raster dem;
    EdgeRaster edges;
    RegionMask region;
};

PreparedScene prepare_scene(const Scene& scene, const EstimatorConfig& config);

EstimateResult estimate_level(const Scene& scene, const EstimatorConfig& config);

}  // namespace waterline
