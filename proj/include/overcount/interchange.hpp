#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "overcount/detail/text.hpp"
#include "overcount/detection.hpp"
#include "overcount/error.hpp"

// Detection interchange: one flat JSON object per LF-terminated line,
//   {"scene_id": s, "x_min": f, "y_min": f, "x_max": f, "y_max": f, "score": f, "class": "car"}
// with scene-global pixel coordinates written to 2 decimal places.

namespace overcount {

namespace detail {

inline double number_field(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw Error(where + ": missing field '" + key + "'");
    if (!it->is_number()) throw Error(where + ": field '" + key + "' is not a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw Error(where + ": field '" + key + "' is not finite");
    return v;
}

}  // namespace detail

inline Detection parse_detection_line(std::string_view line, std::size_t line_no) {
    const std::string where = "detections line " + std::to_string(line_no);
    if (!line.empty() && line.back() == '\r') throw Error(where + ": CRLF line ending (LF required)");
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(where + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw Error(where + ": record is not a JSON object");
    for (const auto& [key, value] : obj.items())
        if (value.is_object() || value.is_array()) throw Error(where + ": field '" + key + "' is not flat");

    const auto sid = obj.find("scene_id");
    if (sid == obj.end() || !sid->is_string()) throw Error(where + ": missing string field 'scene_id'");
    std::string label = "car";
    if (auto c = obj.find("class"); c != obj.end()) {
        if (!c->is_string()) throw Error(where + ": field 'class' is not a string");
        label = c->get<std::string>();
    }
    if (label != "car") throw Error(where + ": unsupported class '" + label + "'");
    const double score = detail::number_field(obj, "score", where);
    if (score < 0.0 || score > 1.0) throw Error(where + ": score " + detail::format_shortest(score) + " outside [0, 1]");
    const double x0 = detail::number_field(obj, "x_min", where), y0 = detail::number_field(obj, "y_min", where);
    const double x1 = detail::number_field(obj, "x_max", where), y1 = detail::number_field(obj, "y_max", where);
    if (!(x0 < x1 && y0 < y1)) throw Error(where + ": degenerate box");
    return {PixelBox(x0, y0, x1, y1), score, label, Frame::SceneGlobal, std::nullopt, sid->get<std::string>()};
}

/// Order-preserving parse. Empty lines are ignored.
inline std::vector<Detection> read_detections(std::istream& in) {
    std::vector<Detection> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(parse_detection_line(line, line_no));
    }
    return out;
}

inline std::vector<Detection> read_detections_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open detections file: " + path);
    return read_detections(in);
}

inline std::string format_detection_line(const Detection& d) {
    if (d.frame != Frame::SceneGlobal) throw Error("only scene-global detections can be written");
    std::string s = "{\"scene_id\": " + nlohmann::json(d.scene_id).dump();
    s += ", \"x_min\": " + detail::format_fixed(d.box.x_min(), 2);
    s += ", \"y_min\": " + detail::format_fixed(d.box.y_min(), 2);
    s += ", \"x_max\": " + detail::format_fixed(d.box.x_max(), 2);
    s += ", \"y_max\": " + detail::format_fixed(d.box.y_max(), 2);
    s += ", \"score\": " + detail::format_shortest(d.score);
    s += ", \"class\": " + nlohmann::json(d.class_label).dump() + "}";
    return s;
}

inline void write_detections(std::ostream& out, const std::vector<Detection>& dets) {
    for (const auto& d : dets) out << format_detection_line(d) << '\n';
}

}  // namespace overcount
