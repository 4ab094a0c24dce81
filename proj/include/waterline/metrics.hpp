#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "waterline/estimator.hpp"
#include "waterline/scene.hpp"

namespace waterline {

// Dated level series; entries kept unique and sorted ascending by date.
struct TimeSeries {
    struct Entry {
        std::string date;  // ISO-8601 day
        double value = 0;  // meters
    };
    std::vector<Entry> entries;
};

// Parses `date,level_m` CSV, sorting rows and rejecting duplicate dates.
TimeSeries read_series_csv(const std::string& path);
void write_series_csv(const TimeSeries& series, const std::string& path);

struct PairedEntry {
    std::string date;
    double estimate = 0;
    double reference = 0;
};

struct JoinedSeries {
    std::vector<PairedEntry> pairs;
    long excluded_below_floor = 0;
};

// Inner join on date; pairs whose reference sits at or below the DEM floor
// are dropped and counted (no water surface to observe there).
JoinedSeries join_series(const TimeSeries& estimates, const TimeSeries& reference,
                         double dem_floor);

struct EvalReport {
    std::optional<double> r2;  // absent for < 2 pairs or constant reference
    double rmse = 0;
    double mae = 0;
    long n_dates = 0;
    long excluded_below_floor = 0;
};

EvalReport evaluate(const JoinedSeries& joined);

struct CalibrationResult {
    int radius = 0;
    std::vector<std::pair<int, double>> mae_by_radius;  // in the offered order
};

// Grid-search over speckle kernel radii: run the estimator per scene per
// radius, score MAE against the scenes' reference levels, pick the argmin
// (ties toward the smaller radius).
CalibrationResult calibrate_kernel_detail(const std::vector<Scene>& scenes,
                                          const std::vector<int>& radii,
                                          const EstimatorConfig& config);
int calibrate_kernel(const std::vector<Scene>& scenes, const std::vector<int>& radii,
                     const EstimatorConfig& config);

}  // namespace waterline
