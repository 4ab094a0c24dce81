#include "waterline/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "waterline/errors.hpp"

namespace waterline {

namespace {

constexpr double kTwoPi = 6.283185307179586;

// [0, 1) from the top 53 bits; exact and portable, unlike the distributions
// in <random> whose output is implementation-defined.
double uniform01(std::mt19937_64& gen) {
    return (gen() >> 11) * 0x1.0p-53;
}

// Box-Muller with a cached spare, again to keep draws bit-reproducible.
class GaussianSampler {
public:
    explicit GaussianSampler(std::mt19937_64& gen) : gen_(gen) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(gen_);
        while (u1 <= 0.0) u1 = uniform01(gen_);
        const double u2 = uniform01(gen_);
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        has_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

private:
    std::mt19937_64& gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace

void SynthParams::validate() const {
    if (size < 2) throw Error("synth", "grid size must be at least 2");
    if (!(pixel_size > 0)) throw Error("synth", "pixel size must be positive");
    if (!(slope > 0)) throw Error("synth", "slope must be positive");
    if (!(water.mean < land.mean))
        throw Error("synth", "water mean must be below land mean");
    if (water.stddev < 0 || land.stddev < 0)
        throw Error("synth", "stddev must be non-negative");
    if (salt < 0 || salt > 1) throw Error("synth", "salt probability must be in [0, 1]");
    if (aoi_margin < 0) throw Error("synth", "aoi margin must be non-negative");
}

Raster make_dem(const SynthParams& params) {
    params.validate();
    Raster dem;
    dem.width = params.size;
    dem.height = params.size;
    dem.values.resize(static_cast<size_t>(params.size) * params.size);
    dem.transform = {0.0, params.size * params.pixel_size, params.pixel_size,
                     -params.pixel_size};
    dem.crs = "EPSG:32633";

    const double cx = (params.size - 1) / 2.0;
    const double cy = (params.size - 1) / 2.0;
#pragma omp parallel for
    for (int r = 0; r < dem.height; ++r) {
        for (int c = 0; c < dem.width; ++c) {
            const double d = params.shape == DemShape::bowl
                                 ? std::hypot(r - cy, c - cx)
                                 : std::abs(c - cx);
            dem.values[dem.index(r, c)] = static_cast<float>(params.base + params.slope * d);
        }
    }
    return dem;
}

Scene make_sar_scene(const Raster& dem, const SynthParams& params) {
    params.validate();
    const auto [lo_it, hi_it] = std::minmax_element(dem.values.begin(), dem.values.end());
    if (params.true_level < *lo_it || params.true_level > *hi_it)
        throw Error("synth", "true_level outside the DEM elevation range");

    std::mt19937_64 gen(params.seed);
    GaussianSampler gauss(gen);
    const double salt_value = params.land.mean + 15.0;  // bright outlier

    auto make_band = [&]() {
        Raster band;
        band.width = dem.width;
        band.height = dem.height;
        band.transform = dem.transform;
        band.crs = dem.crs;
        band.values.resize(dem.values.size());
        for (size_t i = 0; i < dem.values.size(); ++i) {
            const bool wet = dem.values[i] <= params.true_level;
            const NoiseStats& stats = wet ? params.water : params.land;
            band.values[i] = static_cast<float>(stats.mean + stats.stddev * gauss());
        }
        if (params.salt > 0) {
            for (float& v : band.values)
                if (uniform01(gen) < params.salt) v = static_cast<float>(salt_value);
        }
        return band;
    };

    Scene scene;
    scene.id = params.date;
    scene.vv = make_band();
    scene.vh = make_band();
    scene.dem = dem;
    scene.reference_level = params.true_level;

    // Bounding box of wet pixel centers, padded by the margin.
    double min_x = std::numeric_limits<double>::max();
    double max_x = std::numeric_limits<double>::lowest();
    double min_y = std::numeric_limits<double>::max();
    double max_y = std::numeric_limits<double>::lowest();
    for (int r = 0; r < dem.height; ++r) {
        for (int c = 0; c < dem.width; ++c) {
            if (dem.values[dem.index(r, c)] > params.true_level) continue;
            min_x = std::min(min_x, dem.transform.center_x(c));
            max_x = std::max(max_x, dem.transform.center_x(c));
            min_y = std::min(min_y, dem.transform.center_y(r));
            max_y = std::max(max_y, dem.transform.center_y(r));
        }
    }
    min_x -= params.aoi_margin;
    max_x += params.aoi_margin;
    min_y -= params.aoi_margin;
    max_y += params.aoi_margin;
    scene.aoi.rings = {{{min_x, min_y},
                        {max_x, min_y},
                        {max_x, max_y},
                        {min_x, max_y},
                        {min_x, min_y}}};
    return scene;
}

double brute_force_level(const Scene& scene, const EstimatorConfig& config,
                         double granularity) {
    if (!(granularity > 0)) throw Error("synth", "granularity must be positive");
    const PreparedScene prep = prepare_scene(scene, config);
    const RegionStats stats = clip_stats(prep.dem, prep.region);

    const long n = static_cast<long>(std::floor((stats.max - stats.min) / granularity)) + 1;
    std::vector<double> values(n);
#pragma omp parallel for
    for (long i = 0; i < n; ++i)
        values[i] = fitness(stats.min + i * granularity, prep.dem, prep.edges, prep.region,
                            config.connectivity);

    long best = 0;
    for (long i = 1; i < n; ++i)
        if (values[i] > values[best]) best = i;  // ties keep the lowest level
    return stats.min + best * granularity;
}

}  // namespace waterline
