#include "waterline/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>

#include "waterline/errors.hpp"

namespace waterline {

namespace {

bool valid_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

}  // namespace

TimeSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("series", "cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error("series", path + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,level_m")
        throw Error("series", path + ": expected header 'date,level_m', got '" + line + "'");

    TimeSeries series;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw Error("series", path + ": malformed row '" + line + "'");
        TimeSeries::Entry entry;
        entry.date = line.substr(0, comma);
        if (!valid_iso_date(entry.date))
            throw Error("series", path + ": invalid date '" + entry.date +
                                      "' (expected YYYY-MM-DD)");
        const std::string value = line.substr(comma + 1);
        size_t used = 0;
        try {
            entry.value = std::stod(value, &used);
        } catch (const std::exception&) {
            throw Error("series", path + ": invalid level '" + value + "'");
        }
        if (used != value.size())
            throw Error("series", path + ": invalid level '" + value + "'");
        series.entries.push_back(std::move(entry));
    }

    std::sort(series.entries.begin(), series.entries.end(),
              [](const auto& a, const auto& b) { return a.date < b.date; });
    for (size_t i = 1; i < series.entries.size(); ++i)
        if (series.entries[i].date == series.entries[i - 1].date)
            throw Error("series", path + ": duplicate date " + series.entries[i].date);
    return series;
}

void write_series_csv(const TimeSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("series", "cannot write " + path);
    out << "date,level_m\n";
    char buf[64];
    for (const auto& entry : series.entries) {
        std::snprintf(buf, sizeof buf, "%.4f", entry.value);
        out << entry.date << ',' << buf << '\n';
    }
    if (!out) throw Error("series", "cannot write " + path);
}

JoinedSeries join_series(const TimeSeries& estimates, const TimeSeries& reference,
                         double dem_floor) {
    JoinedSeries joined;
    size_t i = 0, j = 0;
    bool any_common = false;
    while (i < estimates.entries.size() && j < reference.entries.size()) {
        const auto& e = estimates.entries[i];
        const auto& r = reference.entries[j];
        if (e.date < r.date) {
            ++i;
        } else if (r.date < e.date) {
            ++j;
        } else {
            any_common = true;
            if (r.value > dem_floor)
                joined.pairs.push_back({e.date, e.value, r.value});
            else
                ++joined.excluded_below_floor;
            ++i;
            ++j;
        }
    }
    if (!any_common) throw Error("metrics", "no common dates between the series");
    if (joined.pairs.empty())
        throw Error("metrics", "no evaluable dates (all references at or below the DEM floor)");
    return joined;
}

EvalReport evaluate(const JoinedSeries& joined) {
    const auto& pairs = joined.pairs;
    if (pairs.empty()) throw Error("metrics", "no pairs to evaluate");

    double abs_sum = 0, sq_sum = 0, ref_sum = 0;
    for (const auto& p : pairs) {
        const double d = p.estimate - p.reference;
        abs_sum += std::abs(d);
        sq_sum += d * d;
        ref_sum += p.reference;
    }
    const double n = static_cast<double>(pairs.size());

    EvalReport report;
    report.n_dates = static_cast<long>(pairs.size());
    report.excluded_below_floor = joined.excluded_below_floor;
    report.mae = abs_sum / n;
    report.rmse = std::sqrt(sq_sum / n);

    if (pairs.size() >= 2) {
        const double ref_mean = ref_sum / n;
        double ss_tot = 0;
        for (const auto& p : pairs) {
            const double d = p.reference - ref_mean;
            ss_tot += d * d;
        }
        if (ss_tot > 0) report.r2 = 1.0 - sq_sum / ss_tot;
    }
    return report;
}

CalibrationResult calibrate_kernel_detail(const std::vector<Scene>& scenes,
                                          const std::vector<int>& radii,
                                          const EstimatorConfig& config) {
    if (radii.empty()) throw Error("calibrate", "no kernel radii offered");
    std::vector<const Scene*> usable;
    for (const Scene& s : scenes)
        if (s.reference_level) usable.push_back(&s);
    if (usable.empty()) throw Error("calibrate", "no scene has a reference level");

    for (int radius : radii) {
        EstimatorConfig c = config;
        c.speckle_radius = radius;
        c.validate();
    }

    const long n_scenes = static_cast<long>(usable.size());
    const long n_radii = static_cast<long>(radii.size());
    std::vector<double> abs_err(n_scenes * n_radii, 0.0);
    std::exception_ptr failure = nullptr;

#pragma omp parallel for
    for (long k = 0; k < n_scenes * n_radii; ++k) {
        try {
            const Scene& scene = *usable[k / n_radii];
            EstimatorConfig c = config;
            c.speckle_radius = radii[k % n_radii];
            const EstimateResult result = estimate_level(scene, c);
            abs_err[k] = std::abs(result.level - *scene.reference_level);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    CalibrationResult result;
    double best_mae = 0;
    bool have_best = false;
    for (long r = 0; r < n_radii; ++r) {
        double sum = 0;
        for (long s = 0; s < n_scenes; ++s) sum += abs_err[s * n_radii + r];
        const double mae = sum / n_scenes;
        result.mae_by_radius.emplace_back(radii[r], mae);
        if (!have_best || mae < best_mae ||
            (mae == best_mae && radii[r] < result.radius)) {
            have_best = true;
            best_mae = mae;
            result.radius = radii[r];
        }
    }
    return result;
}

int calibrate_kernel(const std::vector<Scene>& scenes, const std::vector<int>& radii,
                     const EstimatorConfig& config) {
    return calibrate_kernel_detail(scenes, radii, config).radius;
}

}  // namespace waterline
