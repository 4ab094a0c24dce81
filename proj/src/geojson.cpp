#include "waterline/geojson.hpp"

#include <fstream>

#include <json.hpp>

#include "waterline/errors.hpp"

namespace waterline {

namespace {

using nlohmann::json;

Polygon polygon_from_coordinates(const json& coords) {
    if (!coords.is_array() || coords.empty())
        throw Error("aoi", "Polygon coordinates must be a non-empty array of rings");
    Polygon poly;
    for (const auto& ring_json : coords) {
        std::vector<Point2> ring;
        for (const auto& pt : ring_json) {
            if (!pt.is_array() || pt.size() < 2)
                throw Error("aoi", "ring vertex is not an [x, y] pair");
            ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
        }
        poly.rings.push_back(std::move(ring));
    }
    validate_polygon(poly);
    return poly;
}

const json* find_polygon_geometry(const json& node) {
    if (!node.is_object()) return nullptr;
    const auto type = node.value("type", std::string{});
    if (type == "Polygon") return &node;
    if (type == "Feature" && node.contains("geometry"))
        return find_polygon_geometry(node.at("geometry"));
    if (type == "FeatureCollection" && node.contains("features")) {
        for (const auto& feature : node.at("features"))
            if (const json* g = find_polygon_geometry(feature)) return g;
    }
    return nullptr;
}

}  // namespace

Polygon load_polygon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("aoi", "cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error("aoi", "invalid GeoJSON in '" + path + "': " + e.what());
    }
    const json* geometry = find_polygon_geometry(doc);
    if (!geometry) throw Error("aoi", "no Polygon geometry found in '" + path + "'");
    return polygon_from_coordinates(geometry->at("coordinates"));
}

void write_polygon(const Polygon& poly, const std::string& path) {
    validate_polygon(poly);
    json coords = json::array();
    for (const auto& ring : poly.rings) {
        json ring_json = json::array();
        for (const auto& pt : ring) ring_json.push_back({pt.x, pt.y});
        coords.push_back(std::move(ring_json));
    }
    json doc = {{"type", "Polygon"}, {"coordinates", std::move(coords)}};
    std::ofstream out(path);
    if (!out) throw Error("aoi", "cannot create '" + path + "'");
    out << doc.dump(2) << "\n";
}

}  // namespace waterline
