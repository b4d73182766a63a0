#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "overcount/detail/text.hpp"
#include "overcount/error.hpp"
#include "overcount/geometry.hpp"

namespace overcount {

/// Calendar date, parsed strictly as ISO-8601 YYYY-MM-DD.
struct Date {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    static Date parse(std::string_view s) {
        auto bad = [&] { return Error("invalid ISO-8601 date '" + std::string(s) + "' (expected YYYY-MM-DD)"); };
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw bad();
        for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
            if (s[i] < '0' || s[i] > '9') throw bad();
        auto num = [&](std::size_t pos, std::size_t len) {
            int v = 0;
            for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (s[i] - '0');
            return v;
        };
        Date d{num(0, 4), static_cast<unsigned>(num(5, 2)), static_cast<unsigned>(num(8, 2))};
        const std::chrono::year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{d.month},
                                              std::chrono::day{d.day}};
        if (!ymd.ok()) throw bad();
        return d;
    }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
        return buf;
    }

    friend auto operator<=>(const Date&, const Date&) = default;
};

struct Location {
    std::string location_id;
    std::string name;
    double area_km2 = 0.0;

    friend bool operator==(const Location&, const Location&) = default;
};

struct Scene {
    std::string scene_id;
    std::string location_id;
    Date capture_date;
    double gsd_m = 0.0;
    int width = 0;
    int height = 0;
    std::string image_path;
    std::optional<GeoTransform> geo;
    // Grayscale captures are kept out of RGB-only processing (cf. the Columbus/Vaihingen COWC subsets).
    bool grayscale = false;
};

inline bool same_fields(const Scene& a, const Scene& b) {
    const bool geo_eq = a.geo.has_value() == b.geo.has_value() &&
                        (!a.geo || a.geo->coefficients() == b.geo->coefficients());
    return a.scene_id == b.scene_id && a.location_id == b.location_id && a.capture_date == b.capture_date &&
           a.gsd_m == b.gsd_m && a.width == b.width && a.height == b.height && a.image_path == b.image_path &&
           a.grayscale == b.grayscale && geo_eq;
}

/// Ground-truth boxes for one scene, derived from COWC-style car center points.
struct AnnotationSet {
    std::string scene_id;
    std::vector<Point> centers;
    std::vector<PixelBox> boxes;
    double source_box_size_px = 32.0;
};

namespace detail {

struct CsvLine {
    std::size_t line_no;
    std::vector<std::string> fields;
};

// Reads header + records, skipping blank lines and '#' comments.
inline std::pair<std::vector<std::string>, std::vector<CsvLine>> read_csv(std::istream& in, const std::string& what) {
    std::vector<std::string> header;
    std::vector<CsvLine> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::vector<std::string> fields;
        try {
            fields = split_csv_line(line);
        } catch (const Error& e) {
            throw Error(what + " line " + std::to_string(line_no) + ": " + e.what());
        }
        for (auto& f : fields) f = std::string(trim(f));
        if (header.empty())
            header = std::move(fields);
        else
            rows.push_back({line_no, std::move(fields)});
    }
    return {std::move(header), std::move(rows)};
}

inline std::map<std::string, std::size_t> column_index(const std::vector<std::string>& header,
                                                       const std::vector<std::string>& required,
                                                       const std::vector<std::string>& optional,
                                                       const std::string& what) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto& h = header[i];
        if (std::find(required.begin(), required.end(), h) == required.end() &&
            std::find(optional.begin(), optional.end(), h) == optional.end())
            throw Error(what + ": unknown column '" + h + "'");
        if (!idx.emplace(h, i).second) throw Error(what + ": duplicate column '" + h + "'");
    }
    for (const auto& r : required)
        if (!idx.count(r)) throw Error(what + ": missing column '" + r + "'");
    return idx;
}

inline std::string slurp(const std::string& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + what + ": " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

/// Location registry CSV: `location_id,name,area_km2`.
inline std::vector<Location> parse_locations(std::istream& in) {
    const std::string what = "location registry";
    auto [header, rows] = detail::read_csv(in, what);
    if (header.empty()) return {};
    const auto col = detail::column_index(header, {"location_id", "name", "area_km2"}, {}, what);
    std::vector<Location> out;
    std::set<std::string> seen;
    for (const auto& row : rows) {
        const std::string where = what + " line " + std::to_string(row.line_no);
        if (row.fields.size() != header.size())
            throw Error(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(row.fields.size()));
        Location loc{row.fields[col.at("location_id")], row.fields[col.at("name")], 0.0};
        if (loc.location_id.empty()) throw Error(where + ", field 'location_id': empty");
        loc.area_km2 = detail::parse_double(row.fields[col.at("area_km2")], where + ", field 'area_km2'");
        if (!(loc.area_km2 > 0.0) || !std::isfinite(loc.area_km2))
            throw Error(where + ", field 'area_km2': must be positive");
        if (!seen.insert(loc.location_id).second)
            throw Error(where + ": duplicate location_id '" + loc.location_id + "'");
        out.push_back(std::move(loc));
    }
    return out;
}

inline std::vector<Location> read_locations_file(const std::string& path) {
    std::istringstream in(detail::slurp(path, "location registry"));
    return parse_locations(in);
}

inline const Location& find_location(const std::vector<Location>& registry, const std::string& id) {
    for (const auto& l : registry)
        if (l.location_id == id) return l;
    throw Error("unknown location_id '" + id + "'");
}

struct ManifestOptions {
    /// When set, rows whose location_id is not in the registry are rejected.
    const std::vector<Location>* registry = nullptr;
    bool include_grayscale = false;
};

/// Scene manifest CSV: `scene_id,location_id,capture_date,gsd_m,width,height,image_path`, with optional
/// trailing columns `grayscale` (0/1) and `geotransform` (six space-separated coefficients).
inline std::vector<Scene> parse_manifest(std::istream& in, const ManifestOptions& opts = {}) {
    const std::string what = "manifest";
    auto [header, rows] = detail::read_csv(in, what);
    if (header.empty()) return {};
    const auto col = detail::column_index(
        header, {"scene_id", "location_id", "capture_date", "gsd_m", "width", "height", "image_path"},
        {"grayscale", "geotransform"}, what);

    std::vector<Scene> out;
    std::set<std::string> seen;
    std::size_t row_no = 0;
    for (const auto& row : rows) {
        ++row_no;
        const std::string where = "manifest row " + std::to_string(row_no) + " (line " + std::to_string(row.line_no) + ")";
        if (row.fields.size() != header.size())
            throw Error(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(row.fields.size()));
        auto field = [&](const char* name) -> const std::string& { return row.fields[col.at(name)]; };
        auto ctx = [&](const char* name) { return where + ", field '" + name + "'"; };

        Scene s;
        s.scene_id = field("scene_id");
        if (s.scene_id.empty()) throw Error(ctx("scene_id") + ": empty");
        s.location_id = field("location_id");
        if (s.location_id.empty()) throw Error(ctx("location_id") + ": empty");
        if (opts.registry) {
            const auto& reg = *opts.registry;
            if (std::none_of(reg.begin(), reg.end(), [&](const Location& l) { return l.location_id == s.location_id; }))
                throw Error(ctx("location_id") + ": unknown location '" + s.location_id + "'");
        }
        try {
            s.capture_date = Date::parse(field("capture_date"));
        } catch (const Error& e) {
            throw Error(ctx("capture_date") + ": " + e.what());
        }
        s.gsd_m = detail::parse_double(field("gsd_m"), ctx("gsd_m"));
        if (!(s.gsd_m > 0.0) || !std::isfinite(s.gsd_m)) throw Error(ctx("gsd_m") + ": must be positive");
        const auto w = detail::parse_int(field("width"), ctx("width"));
        const auto h = detail::parse_int(field("height"), ctx("height"));
        if (w < 1 || w > (1 << 30)) throw Error(ctx("width") + ": must be >= 1");
        if (h < 1 || h > (1 << 30)) throw Error(ctx("height") + ": must be >= 1");
        s.width = static_cast<int>(w);
        s.height = static_cast<int>(h);
        s.image_path = field("image_path");
        if (col.count("grayscale")) {
            const auto& g = field("grayscale");
            if (g == "1" || g == "true")
                s.grayscale = true;
            else if (!(g.empty() || g == "0" || g == "false"))
                throw Error(ctx("grayscale") + ": expected 0/1");
        }
        if (col.count("geotransform") && !field("geotransform").empty()) {
            std::istringstream gs(field("geotransform"));
            std::array<double, 6> c{};
            std::string tok;
            std::size_t n = 0;
            while (gs >> tok) {
                if (n == 6) throw Error(ctx("geotransform") + ": expected 6 coefficients");
                c[n++] = detail::parse_double(tok, ctx("geotransform"));
            }
            if (n != 6) throw Error(ctx("geotransform") + ": expected 6 coefficients");
            try {
                s.geo = GeoTransform(c);
            } catch (const Error& e) {
                throw Error(ctx("geotransform") + ": " + e.what());
            }
        }
        if (!seen.insert(s.scene_id).second) throw Error(where + ": duplicate scene_id '" + s.scene_id + "'");
        if (s.grayscale && !opts.include_grayscale) continue;
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<Scene> read_manifest_file(const std::string& path, const ManifestOptions& opts = {}) {
    std::istringstream in(detail::slurp(path, "manifest"));
    return parse_manifest(in, opts);
}

inline void write_manifest(std::ostream& out, const std::vector<Scene>& scenes) {
    out << "scene_id,location_id,capture_date,gsd_m,width,height,image_path,grayscale,geotransform\n";
    for (const auto& s : scenes) {
        out << detail::csv_field(s.scene_id) << ',' << detail::csv_field(s.location_id) << ','
            << s.capture_date.to_string() << ',' << detail::format_shortest(s.gsd_m) << ',' << s.width << ','
            << s.height << ',' << detail::csv_field(s.image_path) << ',' << (s.grayscale ? 1 : 0) << ',';
        if (s.geo) {
            const auto& c = s.geo->coefficients();
            for (std::size_t i = 0; i < 6; ++i) out << (i ? " " : "") << detail::format_shortest(c[i]);
        }
        out << '\n';
    }
}

/// COWC point text: one `x y` car center per line. Blank lines and '#' comments are ignored.
inline std::vector<Point> parse_cowc_points(std::istream& in) {
    std::vector<Point> pts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::istringstream ls{std::string(t)};
        std::string xs, ys, extra;
        if (!(ls >> xs >> ys) || (ls >> extra))
            throw Error("COWC points line " + std::to_string(line_no) + ": expected 'x y'");
        const std::string where = "COWC points line " + std::to_string(line_no);
        const Point p{detail::parse_double(xs, where), detail::parse_double(ys, where)};
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error(where + ": non-finite coordinate");
        pts.push_back(p);
    }
    return pts;
}

inline std::vector<Point> read_cowc_points_file(const std::string& path) {
    std::istringstream in(detail::slurp(path, "COWC points file"));
    return parse_cowc_points(in);
}

/// Each center becomes a box_size square centred on it, clipped to [0,width]x[0,height].
inline AnnotationSet cowc_points_to_boxes(std::string scene_id, const std::vector<Point>& points, double box_size_px,
                                          int width, int height) {
    if (!(box_size_px >= 2.0) || !std::isfinite(box_size_px)) throw Error("COWC box size must be >= 2 px");
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!(p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height)) bad.push_back(i);
    }
    if (!bad.empty()) {
        std::string msg = "scene '" + scene_id + "': points outside scene bounds at indices";
        for (std::size_t k = 0; k < bad.size() && k < 20; ++k) msg += " " + std::to_string(bad[k]);
        if (bad.size() > 20) msg += " ... (" + std::to_string(bad.size()) + " total)";
        throw Error(msg);
    }
    AnnotationSet set{std::move(scene_id), points, {}, box_size_px};
    const PixelBox frame(0.0, 0.0, width, height);
    const double half = box_size_px / 2.0;
    set.boxes.reserve(points.size());
    for (const auto& p : points) {
        // A center on the frame still keeps at least half the square, so the clip is never empty.
        set.boxes.push_back(*clip(PixelBox(p.x - half, p.y - half, p.x + half, p.y + half), frame));
    }
    return set;
}

/// Deterministic train/test partition. Membership depends only on (scene_id, seed), so re-sorting the
/// manifest does not move scenes between sides. Both outputs keep input order.
inline std::pair<std::vector<Scene>, std::vector<Scene>> split_scenes(const std::vector<Scene>& scenes,
                                                                      double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error("train fraction must be in (0, 1)");
    const std::size_t n = scenes.size();
    const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));

    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    keyed.reserve(n);
    const std::uint64_t seed_mix = detail::mix64(seed);
    for (std::size_t i = 0; i < n; ++i)
        keyed.emplace_back(detail::mix64(detail::fnv1a64(scenes[i].scene_id) ^ seed_mix), i);
    std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return scenes[a.second].scene_id < scenes[b.second].scene_id;
    });
    std::vector<bool> in_train(n, false);
    for (std::size_t k = 0; k < n_train; ++k) in_train[keyed[k].second] = true;

    std::pair<std::vector<Scene>, std::vector<Scene>> out;
    for (std::size_t i = 0; i < n; ++i) (in_train[i] ? out.first : out.second).push_back(scenes[i]);
    return out;
}

}  // namespace overcount
