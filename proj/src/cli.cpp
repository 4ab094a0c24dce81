#include "waterline/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "waterline/errors.hpp"
#include "waterline/estimator.hpp"
#include "waterline/geojson.hpp"
#include "waterline/geotiff.hpp"
#include "waterline/metrics.hpp"
#include "waterline/plot.hpp"
#include "waterline/scene.hpp"
#include "waterline/synth.hpp"

namespace fs = std::filesystem;

namespace waterline {

namespace {

bool valid_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

std::string format_level(double level) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", level);
    return buf;
}

struct ManifestRow {
    std::string date;
    std::string vv, vh, dem, aoi;  // absolute or manifest-relative on disk
};

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

constexpr const char* kManifestHeader = "date,vv,vh,dem,aoi";

// Rows come back sorted by date with paths resolved against the manifest's
// directory; duplicate dates are rejected.
std::vector<ManifestRow> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("manifest", "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("manifest", path + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kManifestHeader)
        throw Error("manifest",
                    path + ": expected header '" + kManifestHeader + "', got '" + line + "'");

    const fs::path base = fs::path(path).parent_path();
    const auto resolve = [&](const std::string& p) {
        return fs::path(p).is_absolute() ? p : (base / p).string();
    };

    std::vector<ManifestRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 5)
            throw Error("manifest", path + ": malformed row '" + line + "'");
        if (!valid_iso_date(fields[0]))
            throw Error("manifest", path + ": invalid date '" + fields[0] + "'");
        rows.push_back({fields[0], resolve(fields[1]), resolve(fields[2]),
                        resolve(fields[3]), resolve(fields[4])});
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.date < b.date; });
    for (size_t i = 1; i < rows.size(); ++i)
        if (rows[i].date == rows[i - 1].date)
            throw Error("manifest", path + ": duplicate date " + rows[i].date);
    return rows;
}

Scene load_scene(const ManifestRow& row) {
    Scene scene;
    scene.id = row.date;
    scene.vv = load_raster(row.vv);
    scene.vh = load_raster(row.vh);
    scene.dem = load_raster(row.dem);
    scene.aoi = load_polygon(row.aoi);
    return scene;
}

nlohmann::json trace_to_json(const EstimateResult& result) {
    nlohmann::json iterations = nlohmann::json::array();
    for (const IterationTrace& it : result.trace.iterations) {
        iterations.push_back({{"lower", it.lower},
                              {"upper", it.upper},
                              {"step", it.step},
                              {"best_level", it.best_level},
                              {"candidates", it.candidates},
                              {"values", it.values},
                              {"shoreline_px", it.shoreline_sizes}});
    }
    return {{"scene", result.scene_id},
            {"level_m", result.level},
            {"config",
             {{"sample_num", result.config.sample_num},
              {"tolerance", result.config.tolerance},
              {"speckle_radius", result.config.speckle_radius},
              {"gaussian_sigma", result.config.gaussian_sigma},
              {"buffer_distance", result.config.buffer_distance},
              {"connectivity", static_cast<int>(result.config.connectivity)}}},
            {"iterations", iterations}};
}

// Shared estimator knobs; `connectivity` is bound as an int and converted
// after parsing.
void attach_config_flags(CLI::App* cmd, EstimatorConfig& config, int& connectivity) {
    cmd->add_option("--sample-num", config.sample_num, "candidates per iteration")
        ->capture_default_str();
    cmd->add_option("--tolerance", config.tolerance, "stop once the step is this small (m)")
        ->capture_default_str();
    cmd->add_option("--kernel-radius", config.speckle_radius,
                    "speckle median kernel radius (px)")
        ->capture_default_str();
    cmd->add_option("--sigma", config.gaussian_sigma, "Canny Gaussian sigma")
        ->capture_default_str();
    cmd->add_option("--buffer-meters", config.buffer_distance, "AOI expansion (m)")
        ->capture_default_str();
    cmd->add_option("--connectivity", connectivity, "water connectivity (4 or 8)")
        ->check(CLI::IsMember({4, 8}))
        ->capture_default_str();
}

EstimatorConfig finish_config(EstimatorConfig config, int connectivity) {
    config.connectivity = connectivity == 4 ? Connectivity::four : Connectivity::eight;
    config.validate();  // before any file is touched
    return config;
}

void require_iso_date(const std::string& date) {
    if (!valid_iso_date(date))
        throw Error("usage", "invalid --date '" + date + "' (expected YYYY-MM-DD)");
}

int cmd_estimate(const std::string& vv, const std::string& vh, const std::string& dem,
                 const std::string& aoi, const std::string& date,
                 const EstimatorConfig& config, const std::string& trace_path) {
    require_iso_date(date);
    ManifestRow row{date, vv, vh, dem, aoi};
    const Scene scene = load_scene(row);
    const EstimateResult result = estimate_level(scene, config);

    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw Error("io", "cannot write " + trace_path);
        out << trace_to_json(result).dump(2) << '\n';
    }
    std::cout << "date,level_m\n" << date << ',' << format_level(result.level) << '\n';
    return 0;
}

int cmd_batch(const std::string& manifest_path, const std::string& out_path, int jobs,
              const EstimatorConfig& config) {
    const std::vector<ManifestRow> rows = read_manifest(manifest_path);

    struct RowResult {
        bool ok = false;
        double level = 0;
        std::string error;
    };
    std::vector<RowResult> results(rows.size());
    const auto process = [&](size_t k) {
        try {
            const EstimateResult res = estimate_level(load_scene(rows[k]), config);
            results[k] = {true, res.level, ""};
        } catch (const std::exception& e) {
            results[k] = {false, 0, e.what()};
        }
    };

    const int workers = static_cast<int>(
        std::min<size_t>(static_cast<size_t>(jobs), rows.size()));
    if (workers <= 1) {
        for (size_t k = 0; k < rows.size(); ++k) process(k);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (size_t k = next.fetch_add(1); k < rows.size(); k = next.fetch_add(1))
                    process(k);
            });
        for (auto& th : pool) th.join();
    }

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw Error("io", "cannot write " + out_path);
    }
    std::ostream& out = out_path.empty() ? std::cout : file;

    out << "date,level_m\n";
    size_t failures = 0;
    for (size_t k = 0; k < rows.size(); ++k) {
        if (results[k].ok) {
            out << rows[k].date << ',' << format_level(results[k].level) << '\n';
        } else {
            ++failures;
            std::cerr << "warning: " << rows[k].date << ": " << results[k].error << '\n';
        }
    }
    if (!out) throw Error("io", "cannot write " + out_path);
    return (!rows.empty() && failures == rows.size()) ? 2 : 0;
}

int cmd_evaluate(const std::string& estimates_path, const std::string& reference_path,
                 double dem_floor, const std::string& json_path) {
    const TimeSeries estimates = read_series_csv(estimates_path);
    const TimeSeries reference = read_series_csv(reference_path);
    const EvalReport report = evaluate(join_series(estimates, reference, dem_floor));

    char buf[64];
    if (report.r2)
        std::snprintf(buf, sizeof buf, "%.4f", *report.r2);
    else
        std::snprintf(buf, sizeof buf, "n/a");
    std::cout << "r2                    " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.4f", report.rmse);
    std::cout << "rmse_m                " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.4f", report.mae);
    std::cout << "mae_m                 " << buf << '\n';
    std::cout << "n_dates               " << report.n_dates << '\n';
    std::cout << "excluded_below_floor  " << report.excluded_below_floor << '\n';

    if (!json_path.empty()) {
        nlohmann::json j{{"rmse_m", report.rmse},
                         {"mae_m", report.mae},
                         {"n_dates", report.n_dates},
                         {"excluded_below_floor", report.excluded_below_floor}};
        j["r2"] = report.r2 ? nlohmann::json(*report.r2) : nlohmann::json(nullptr);
        std::ofstream out(json_path);
        if (!out) throw Error("io", "cannot write " + json_path);
        out << j.dump(2) << '\n';
    }
    return 0;
}

int cmd_plot(const std::string& estimates_path, const std::string& reference_path,
             const std::string& out_path) {
    const TimeSeries estimates = read_series_csv(estimates_path);
    if (reference_path.empty()) {
        write_plot_svg(estimates, nullptr, out_path);
    } else {
        const TimeSeries reference = read_series_csv(reference_path);
        write_plot_svg(estimates, &reference, out_path);
    }
    return 0;
}

int cmd_calibrate(const std::string& manifest_path, const std::string& reference_path,
                  const std::vector<int>& radii, const EstimatorConfig& config) {
    const std::vector<ManifestRow> rows = read_manifest(manifest_path);
    const TimeSeries reference = read_series_csv(reference_path);
    std::map<std::string, double> ref_by_date;
    for (const auto& e : reference.entries) ref_by_date[e.date] = e.value;

    std::vector<Scene> scenes;
    for (const ManifestRow& row : rows) {
        Scene scene = load_scene(row);
        if (auto it = ref_by_date.find(row.date); it != ref_by_date.end())
            scene.reference_level = it->second;
        scenes.push_back(std::move(scene));
    }

    const CalibrationResult result = calibrate_kernel_detail(scenes, radii, config);
    std::cout << "radius,mae_m\n";
    for (const auto& [radius, mae] : result.mae_by_radius)
        std::cout << radius << ',' << format_level(mae) << '\n';
    std::cout << "# best radius: " << result.radius << '\n';
    return 0;
}

int cmd_synth(const SynthParams& params, const std::string& out_dir) {
    const Raster dem = make_dem(params);
    const Scene scene = make_sar_scene(dem, params);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    const std::string stem = scene.id;
    const std::string vv_name = stem + "_vv.tif";
    const std::string vh_name = stem + "_vh.tif";
    const std::string dem_name = stem + "_dem.tif";
    const std::string aoi_name = stem + "_aoi.geojson";
    write_raster(scene.vv, (dir / vv_name).string());
    write_raster(scene.vh, (dir / vh_name).string());
    write_raster(scene.dem, (dir / dem_name).string());
    write_polygon(scene.aoi, (dir / aoi_name).string());

    const fs::path manifest = dir / "manifest.csv";
    bool fresh = !fs::exists(manifest);
    if (!fresh) {
        for (const ManifestRow& row : read_manifest(manifest.string()))
            if (row.date == scene.id)
                throw Error("manifest", "duplicate date " + scene.id + " in " +
                                            manifest.string());
    }
    std::ofstream out(manifest, std::ios::app);
    if (!out) throw Error("io", "cannot write " + manifest.string());
    if (fresh) out << kManifestHeader << '\n';
    out << scene.id << ',' << vv_name << ',' << vh_name << ',' << dem_name << ','
        << aoi_name << '\n';
    if (!out) throw Error("io", "cannot write " + manifest.string());

    std::cout << "synth: wrote scene " << scene.id << " to " << out_dir << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Reservoir water level estimation from SAR + DEM"};
    app.require_subcommand(1);

    // --- estimate ---
    auto* est = app.add_subcommand("estimate", "estimate one scene's water level");
    std::string est_vv, est_vh, est_dem, est_aoi, est_trace;
    std::string est_date = "1970-01-01";
    EstimatorConfig est_config;
    int est_conn = 8;
    est->add_option("--vv", est_vv, "VV backscatter GeoTIFF")->required();
    est->add_option("--vh", est_vh, "VH backscatter GeoTIFF")->required();
    est->add_option("--dem", est_dem, "elevation GeoTIFF")->required();
    est->add_option("--aoi", est_aoi, "reservoir outline GeoJSON")->required();
    est->add_option("--date", est_date, "scene date for the output record")
        ->capture_default_str();
    est->add_option("--trace", est_trace, "write the optimizer trace JSON here");
    attach_config_flags(est, est_config, est_conn);

    // --- batch ---
    auto* bat = app.add_subcommand("batch", "estimate every scene in a manifest");
    std::string bat_manifest, bat_out;
    int bat_jobs = 1;
    EstimatorConfig bat_config;
    int bat_conn = 8;
    bat->add_option("--manifest", bat_manifest, "CSV: " + std::string(kManifestHeader))
        ->required();
    bat->add_option("--out", bat_out, "write the CSV here instead of standard output");
    bat->add_option("--jobs", bat_jobs, "scenes processed concurrently")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    attach_config_flags(bat, bat_config, bat_conn);

    // --- evaluate ---
    auto* eva = app.add_subcommand("evaluate", "score estimates against a reference series");
    std::string eva_estimates, eva_reference, eva_json;
    double eva_floor = -std::numeric_limits<double>::infinity();
    eva->add_option("--estimates", eva_estimates, "estimated series CSV")->required();
    eva->add_option("--reference", eva_reference, "reference series CSV")->required();
    eva->add_option("--dem-floor", eva_floor,
                    "exclude dates whose reference is at or below this elevation (m)");
    eva->add_option("--json", eva_json, "also write the report as JSON here");

    // --- plot ---
    auto* plo = app.add_subcommand("plot", "render series as an SVG");
    std::string plo_estimates, plo_reference, plo_out;
    plo->add_option("--estimates", plo_estimates, "estimated series CSV")->required();
    plo->add_option("--reference", plo_reference, "reference series CSV (optional)");
    plo->add_option("--out", plo_out, "output SVG path")->required();

    // --- calibrate ---
    auto* cal = app.add_subcommand("calibrate", "grid-search the speckle kernel radius");
    std::string cal_manifest, cal_reference;
    std::vector<int> cal_radii;
    EstimatorConfig cal_config;
    int cal_conn = 8;
    cal->add_option("--manifest", cal_manifest, "CSV: " + std::string(kManifestHeader))
        ->required();
    cal->add_option("--reference", cal_reference, "reference series CSV")->required();
    cal->add_option("--radii", cal_radii, "candidate radii, comma separated")
        ->required()
        ->delimiter(',');
    attach_config_flags(cal, cal_config, cal_conn);

    // --- synth ---
    auto* syn = app.add_subcommand("synth", "generate a synthetic scene");
    SynthParams params;
    std::string syn_out_dir, syn_shape = "bowl";
    syn->add_option("--out-dir", syn_out_dir, "directory for rasters, AOI, manifest")
        ->required();
    syn->add_option("--size", params.size, "grid size (px)")->capture_default_str();
    syn->add_option("--pixel-size", params.pixel_size, "pixel size (m)")
        ->capture_default_str();
    syn->add_option("--shape", syn_shape, "DEM shape")
        ->check(CLI::IsMember({"bowl", "valley"}))
        ->capture_default_str();
    syn->add_option("--base", params.base, "DEM floor elevation (m)")->capture_default_str();
    syn->add_option("--slope", params.slope, "DEM slope (m/px)")->capture_default_str();
    syn->add_option("--level", params.true_level, "true water level (m)")
        ->capture_default_str();
    syn->add_option("--water-mean", params.water.mean, "water backscatter mean")
        ->capture_default_str();
    syn->add_option("--water-std", params.water.stddev, "water backscatter stddev")
        ->capture_default_str();
    syn->add_option("--land-mean", params.land.mean, "land backscatter mean")
        ->capture_default_str();
    syn->add_option("--land-std", params.land.stddev, "land backscatter stddev")
        ->capture_default_str();
    syn->add_option("--salt", params.salt, "salt noise probability")->capture_default_str();
    syn->add_option("--margin", params.aoi_margin, "AOI margin beyond the wet extent (m)")
        ->capture_default_str();
    syn->add_option("--seed", params.seed, "random seed")->capture_default_str();
    syn->add_option("--date", params.date, "scene date")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (est->parsed())
            return cmd_estimate(est_vv, est_vh, est_dem, est_aoi, est_date,
                                finish_config(est_config, est_conn), est_trace);
        if (bat->parsed())
            return cmd_batch(bat_manifest, bat_out, bat_jobs,
                             finish_config(bat_config, bat_conn));
        if (eva->parsed()) return cmd_evaluate(eva_estimates, eva_reference, eva_floor, eva_json);
        if (plo->parsed()) return cmd_plot(plo_estimates, plo_reference, plo_out);
        if (cal->parsed())
            return cmd_calibrate(cal_manifest, cal_reference, cal_radii,
                                 finish_config(cal_config, cal_conn));
        if (syn->parsed()) {
            params.shape = syn_shape == "valley" ? DemShape::valley : DemShape::bowl;
            require_iso_date(params.date);
            params.validate();
            return cmd_synth(params, syn_out_dir);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        const std::string& stage = e.stage();
        return (stage == "config" || stage == "usage" || stage == "synth") ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace waterline
