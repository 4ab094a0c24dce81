#include "waterline/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "waterline/errors.hpp"

namespace waterline {

void EstimatorConfig::validate() const {
    if (sample_num < 3) throw Error("config", "sample_num must be at least 3");
    if (!(tolerance > 0)) throw Error("config", "tolerance must be positive");
    if (speckle_radius < 0) throw Error("config", "speckle_radius must be non-negative");
    if (!(gaussian_sigma > 0)) throw Error("config", "gaussian_sigma must be positive");
    if (buffer_distance < 0) throw Error("config", "buffer_distance must be non-negative");
}

std::vector<double> linspace(double lower, double upper, int n) {
    if (n < 2) throw Error("estimator", "linspace needs at least two samples");
    if (!(lower <= upper)) throw Error("estimator", "linspace bounds out of order");
    const double spacing = (upper - lower) / (n - 1);
    std::vector<double> values(n);
    for (int i = 0; i < n; ++i) values[i] = lower + i * spacing;
    values.back() = upper;
    return values;
}

FitnessSample fitness_detail(double level, const Raster& dem, const EdgeRaster& edges,
                             const RegionMask& region, Connectivity connectivity) {
    if (grid_of(edges.magnitudes) != grid_of(dem))
        throw Error("fitness", "DEM and edge image are on different grids");
    if (region.width != dem.width || region.height != dem.height)
        throw Error("fitness", "region mask does not match the raster grid");

    const RegionMask water = water_mask(dem, level, region);
    const LabelGrid labels = connected_components(water, connectivity);
    const RegionMask biggest = largest_component(labels);
    const PixelSet line = shoreline(biggest);

    FitnessSample sample;
    sample.shoreline_px = static_cast<long>(line.size());
    // Serial sum in shoreline (row-major) order keeps the value independent
    // of thread count.
    for (const Pixel& p : line) sample.value += edges.magnitudes.at(p.row, p.col);
    return sample;
}

double fitness(double level, const Raster& dem, const EdgeRaster& edges,
               const RegionMask& region, Connectivity connectivity) {
    return fitness_detail(level, dem, edges, region, connectivity).value;
}

EstimateResult maximize_sampled(const std::function<FitnessSample(double)>& objective,
                                double lower, double upper, int sample_num,
                                double tolerance) {
    if (sample_num < 3) throw Error("estimator", "sample_num must be at least 3");
    if (!(tolerance > 0)) throw Error("estimator", "tolerance must be positive");
    if (!(lower <= upper)) throw Error("estimator", "search bounds out of order");

    EstimateResult result;
    double step = 0;
    double prev_step = std::numeric_limits<double>::infinity();
    do {
        IterationTrace it;
        it.lower = lower;
        it.upper = upper;
        it.candidates = linspace(lower, upper, sample_num);
        it.values.assign(sample_num, 0.0);
        it.shoreline_sizes.assign(sample_num, 0);

        if (lower == upper) {
            const FitnessSample s = objective(lower);  // all candidates coincide
            std::fill(it.values.begin(), it.values.end(), s.value);
            std::fill(it.shoreline_sizes.begin(), it.shoreline_sizes.end(), s.shoreline_px);
        } else {
#pragma omp parallel for
            for (int i = 0; i < sample_num; ++i) {
                const FitnessSample s = objective(it.candidates[i]);
                it.values[i] = s.value;
                it.shoreline_sizes[i] = s.shoreline_px;
            }
        }

        int best = 0;
        for (int i = 1; i < sample_num; ++i)
            if (it.values[i] > it.values[best]) best = i;  // ties keep the lowest level

        step = (upper - lower) / (sample_num - 1);
        it.step = step;
        it.best_level = it.candidates[best];
        lower = it.best_level - step;
        upper = it.best_level + step;
        result.trace.iterations.push_back(std::move(it));
        // sample_num 3 re-centers without contracting (step ratio 2/(n-1)
        // is 1); stop rather than re-sample the same spacing forever.
        if (step >= prev_step) break;
        prev_step = step;
    } while (step > tolerance);

    result.level = result.trace.iterations.back().best_level;
    return result;
}

int iteration_bound(double range, int n, double tol) {
    if (n <= 3) throw Error("estimator", "iteration bound requires sample_num >= 4");
    if (!(range > 0)) throw Error("estimator", "range must be positive");
    if (!(tol > 0)) throw Error("estimator", "tolerance must be positive");
    const double base = (n - 1) / 2.0;
    const double ratio = range / ((n - 1) * tol);
    const int bound = static_cast<int>(std::ceil(std::log(ratio) / std::log(base))) + 1;
    return std::max(bound, 1);
}

PreparedScene prepare_scene(const Scene& scene, const EstimatorConfig& config) {
    config.validate();
    validate_polygon(scene.aoi);

    const GridSpec grid = grid_of(scene.vv);
    const RegionMask footprint =
        rasterize_polygon(scene.aoi, grid.transform, grid.width, grid.height);
    RegionMask region = dilate_mask(footprint, config.buffer_distance);
    if (region.empty()) throw Error("region", "AOI does not intersect the scene rasters");

    Raster dem = grid_of(scene.dem) == grid ? scene.dem
                                            : align_to(scene.dem, grid, Resampling::nearest);

    const Raster fused = combine_bands(scene.vv, scene.vh);
    const Raster despeckled = speckle_filter(fused, config.speckle_radius);
    EdgeRaster edges = canny_edges(despeckled, region, config.gaussian_sigma);

    return {std::move(dem), std::move(edges), std::move(region)};
}

EstimateResult estimate_level(const Scene& scene, const EstimatorConfig& config) {
    const PreparedScene prep = prepare_scene(scene, config);
    const RegionStats dem_stats = clip_stats(prep.dem, prep.region);

    auto objective = [&](double level) {
        return fitness_detail(level, prep.dem, prep.edges, prep.region, config.connectivity);
    };
    EstimateResult result = maximize_sampled(objective, dem_stats.min, dem_stats.max,
                                             config.sample_num, config.tolerance);
    result.config = config;
    result.scene_id = scene.id;
    return result;
}

}  // namespace waterline
