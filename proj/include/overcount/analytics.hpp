#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "overcount/detail/text.hpp"
#include "overcount/detection.hpp"
#include "overcount/error.hpp"
#include "overcount/geometry.hpp"
#include "overcount/ingestion.hpp"

namespace overcount {

struct CountRecord {
    std::string scene_id;
    std::string location_id;
    Date capture_date;
    std::size_t count = 0;
    std::string aoi_name;

    friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

/// Detections whose box center lies in the AOI (boundary inclusive).
inline std::size_t count_in_aoi(const std::vector<Detection>& detections, const AoiPolygon& aoi) {
    return std::size_t(std::count_if(detections.begin(), detections.end(),
                                     [&](const Detection& d) { return point_in_polygon(d.box.center(), aoi); }));
}

/// Mean per-scene count for a location over one calendar year. Scenes with several AOIs contribute
/// the sum over their AOIs.
inline double yearly_average(const std::vector<CountRecord>& records, const std::string& location_id, int year) {
    std::map<std::string, std::size_t> per_scene;
    for (const auto& r : records)
        if (r.location_id == location_id && r.capture_date.year == year) per_scene[r.scene_id] += r.count;
    if (per_scene.empty())
        throw NoDataError("no data for location '" + location_id + "' in " + std::to_string(year));
    double sum = 0.0;
    for (const auto& [_, c] : per_scene) sum += double(c);
    return sum / double(per_scene.size());
}

struct TrendRow {
    std::string location_id;
    int year_a = 0, year_b = 0;
    double avg_count_a = 0.0, avg_count_b = 0.0;
    double change_ratio = 0.0;
};

struct SkippedLocation {
    std::string location_id;
    std::string reason;
};

struct TrendReport {
    int year_a = 0, year_b = 0;
    std::vector<TrendRow> rows;  // ordered by location_id
    std::vector<SkippedLocation> skipped;
    /// Unweighted mean of the per-location change ratios.
    double overall_change_ratio = 0.0;
};

inline TrendReport change_report(const std::vector<CountRecord>& records, int year_a, int year_b) {
    std::set<std::string> locations;
    for (const auto& r : records) locations.insert(r.location_id);

    TrendReport rep{year_a, year_b, {}, {}, 0.0};
    for (const auto& loc : locations) {
        double a = 0.0, b = 0.0;
        try {
            a = yearly_average(records, loc, year_a);
            b = yearly_average(records, loc, year_b);
        } catch (const NoDataError& e) {
            rep.skipped.push_back({loc, e.what()});
            continue;
        }
        if (!(a > 0.0)) {
            rep.skipped.push_back({loc, "zero average count in " + std::to_string(year_a) + "; ratio undefined"});
            continue;
        }
        rep.rows.push_back({loc, year_a, year_b, a, b, (b - a) / a});
    }
    if (rep.rows.empty())
        throw Error("no location has a defined change ratio between " + std::to_string(year_a) + " and " +
                    std::to_string(year_b));
    double sum = 0.0;
    for (const auto& r : rep.rows) sum += r.change_ratio;
    rep.overall_change_ratio = sum / double(rep.rows.size());
    return rep;
}

inline double density_per_km2(std::size_t count, const Location& location) {
    if (!(location.area_km2 > 0.0)) throw Error("location '" + location.location_id + "' has no positive area");
    return double(count) / location.area_km2;
}

inline constexpr const char* kCountsHeader = "scene_id,location_id,capture_date,aoi,count";

inline void write_count_rows(std::ostream& out, const std::vector<CountRecord>& records) {
    for (const auto& r : records)
        out << detail::csv_field(r.scene_id) << ',' << detail::csv_field(r.location_id) << ','
            << r.capture_date.to_string() << ',' << detail::csv_field(r.aoi_name) << ',' << r.count << '\n';
}

/// Reads a counts CSV; '#' comment lines (run metadata, error section) are skipped.
inline std::vector<CountRecord> parse_counts(std::istream& in) {
    const std::string what = "counts file";
    auto [header, rows] = detail::read_csv(in, what);
    if (header.empty()) return {};
    const auto col = detail::column_index(header, {"scene_id", "location_id", "capture_date", "aoi", "count"}, {}, what);
    std::vector<CountRecord> out;
    for (const auto& row : rows) {
        const std::string where = what + " line " + std::to_string(row.line_no);
        if (row.fields.size() != header.size()) throw Error(where + ": wrong number of fields");
        CountRecord r;
        r.scene_id = row.fields[col.at("scene_id")];
        r.location_id = row.fields[col.at("location_id")];
        try {
            r.capture_date = Date::parse(row.fields[col.at("capture_date")]);
        } catch (const Error& e) {
            throw Error(where + ": " + e.what());
        }
        r.aoi_name = row.fields[col.at("aoi")];
        const auto c = detail::parse_int(row.fields[col.at("count")], where + ", field 'count'");
        if (c < 0) throw Error(where + ": negative count");
        r.count = std::size_t(c);
        out.push_back(std::move(r));
    }
    return out;
}

inline void write_trend_csv(std::ostream& out, const TrendReport& rep) {
    using detail::format_shortest;
    out << "location_id,year_a,year_b,avg_count_a,avg_count_b,change_ratio\n";
    for (const auto& r : rep.rows)
        out << detail::csv_field(r.location_id) << ',' << r.year_a << ',' << r.year_b << ','
            << format_shortest(r.avg_count_a) << ',' << format_shortest(r.avg_count_b) << ','
            << format_shortest(r.change_ratio) << '\n';
    out << "# overall_change_ratio=" << format_shortest(rep.overall_change_ratio) << '\n';
    for (const auto& s : rep.skipped) out << "# skipped " << s.location_id << ": " << s.reason << '\n';
}

inline nlohmann::ordered_json trend_json(const TrendReport& rep) {
    nlohmann::ordered_json j;
    j["year_a"] = rep.year_a;
    j["year_b"] = rep.year_b;
    j["locations"] = nlohmann::ordered_json::array();
    for (const auto& r : rep.rows) {
        nlohmann::ordered_json row;
        row["location_id"] = r.location_id;
        row["avg_count_a"] = r.avg_count_a;
        row["avg_count_b"] = r.avg_count_b;
        row["change_ratio"] = r.change_ratio;
        j["locations"].push_back(std::move(row));
    }
    j["overall_change_ratio"] = rep.overall_change_ratio;
    j["skipped"] = nlohmann::ordered_json::array();
    for (const auto& s : rep.skipped) j["skipped"].push_back({{"location_id", s.location_id}, {"reason", s.reason}});
    return j;
}

}  // namespace overcount
