#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "overcount/error.hpp"
#include "overcount/geometry.hpp"

namespace overcount {

/// An AOI plus the location it applies to. An empty location_id applies to every scene.
struct AoiEntry {
    AoiPolygon polygon;
    std::string location_id;
};

namespace detail {

inline AoiPolygon polygon_from_geojson(const nlohmann::json& geometry, const std::string& name) {
    if (!geometry.is_object() || geometry.value("type", "") != "Polygon")
        throw Error("AOI '" + name + "': geometry must be a GeoJSON Polygon");
    const auto& rings = geometry.at("coordinates");
    if (!rings.is_array() || rings.empty()) throw Error("AOI '" + name + "': polygon has no rings");
    if (rings.size() > 1) throw Error("AOI '" + name + "': polygons with holes are not supported");
    std::vector<Point> pts;
    for (const auto& c : rings[0]) {
        if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
            throw Error("AOI '" + name + "': malformed coordinate");
        pts.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    return AoiPolygon(name, std::move(pts));
}

inline AoiEntry entry_from_feature(const nlohmann::json& feature, std::size_t index) {
    std::string name = "aoi_" + std::to_string(index);
    std::string location;
    if (auto it = feature.find("properties"); it != feature.end() && it->is_object()) {
        if (auto n = it->find("name"); n != it->end() && n->is_string()) name = n->get<std::string>();
        if (auto l = it->find("location_id"); l != it->end() && l->is_string()) location = l->get<std::string>();
    }
    if (!feature.contains("geometry")) throw Error("AOI '" + name + "': feature has no geometry");
    return {polygon_from_geojson(feature.at("geometry"), name), location};
}

}  // namespace detail

/// Parses a Polygon, Feature or FeatureCollection. Only the outer ring is used; holes are an error.
/// Feature properties `name` and `location_id` are honoured.
inline std::vector<AoiEntry> parse_aoi_geojson(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("AOI file is not valid JSON: ") + e.what());
    }
    const std::string type = doc.is_object() ? doc.value("type", "") : "";
    std::vector<AoiEntry> out;
    try {
        if (type == "Polygon") {
            out.push_back({detail::polygon_from_geojson(doc, "aoi_0"), ""});
        } else if (type == "Feature") {
            out.push_back(detail::entry_from_feature(doc, 0));
        } else if (type == "FeatureCollection") {
            std::size_t i = 0;
            for (const auto& f : doc.at("features")) out.push_back(detail::entry_from_feature(f, i++));
        } else {
            throw Error("AOI file: unsupported GeoJSON type '" + type + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("AOI file: ") + e.what());
    }
    return out;
}

inline std::vector<AoiEntry> read_aoi_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open AOI file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_aoi_geojson(text);
}

/// AOIs applicable to a location; falls back to the whole image when none match.
inline std::vector<AoiPolygon> aois_for_location(const std::vector<AoiEntry>& entries, const std::string& location_id,
                                                 double width, double height) {
    std::vector<AoiPolygon> out;
    for (const auto& e : entries)
        if (e.location_id.empty() || e.location_id == location_id) out.push_back(e.polygon);
    if (out.empty()) out.push_back(AoiPolygon::whole_image(width, height));
    return out;
}

}  // namespace overcount
