#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "overcount/error.hpp"

namespace overcount {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned box in continuous pixel coordinates. Pixel (i, j) spans [i, i+1) x [j, j+1).
/// Always non-degenerate: construction rejects zero-area and non-finite boxes.
class PixelBox {
public:
    PixelBox(double x_min, double y_min, double x_max, double y_max)
        : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
        if (!(std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) && std::isfinite(y_max)))
            throw Error("PixelBox: non-finite coordinate");
        if (!(x_min < x_max) || !(y_min < y_max))
            throw Error("PixelBox: degenerate box [" + std::to_string(x_min) + "," + std::to_string(y_min) + "," +
                        std::to_string(x_max) + "," + std::to_string(y_max) + "]");
    }

    double x_min() const noexcept { return x_min_; }
    double y_min() const noexcept { return y_min_; }
    double x_max() const noexcept { return x_max_; }
    double y_max() const noexcept { return y_max_; }
    double width() const noexcept { return x_max_ - x_min_; }
    double height() const noexcept { return y_max_ - y_min_; }
    double area() const noexcept { return width() * height(); }
    Point center() const noexcept { return {(x_min_ + x_max_) / 2.0, (y_min_ + y_max_) / 2.0}; }

    PixelBox translated(double dx, double dy) const { return {x_min_ + dx, y_min_ + dy, x_max_ + dx, y_max_ + dy}; }

    bool contains(const PixelBox& other) const noexcept {
        return other.x_min_ >= x_min_ && other.y_min_ >= y_min_ && other.x_max_ <= x_max_ && other.y_max_ <= y_max_;
    }

    /// Lexicographic (x_min, y_min, x_max, y_max).
    friend auto operator<=>(const PixelBox&, const PixelBox&) = default;
    friend bool operator==(const PixelBox&, const PixelBox&) = default;

private:
    double x_min_, y_min_, x_max_, y_max_;
};

inline double intersection_area(const PixelBox& a, const PixelBox& b) noexcept {
    const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
    const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

/// Intersection over union; 0 for disjoint or edge-touching boxes.
inline double iou(const PixelBox& a, const PixelBox& b) noexcept {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

/// Intersection of `box` with `window`, or nothing if they share no area.
inline std::optional<PixelBox> clip(const PixelBox& box, const PixelBox& window) {
    const double x0 = std::max(box.x_min(), window.x_min());
    const double y0 = std::max(box.y_min(), window.y_min());
    const double x1 = std::min(box.x_max(), window.x_max());
    const double y1 = std::min(box.y_max(), window.y_max());
    if (!(x0 < x1 && y0 < y1)) return std::nullopt;
    return PixelBox(x0, y0, x1, y1);
}

/// Affine pixel -> geographic mapping, GDAL coefficient order:
///   x = c0 + col * c1 + row * c2
///   y = c3 + col * c4 + row * c5
class GeoTransform {
public:
    explicit GeoTransform(const std::array<double, 6>& c) : c_(c) {
        for (double v : c_)
            if (!std::isfinite(v)) throw Error("GeoTransform: non-finite coefficient");
        det_ = c_[1] * c_[5] - c_[2] * c_[4];
        if (det_ == 0.0 || !std::isfinite(det_)) throw Error("GeoTransform: linear part is not invertible");
    }

    static GeoTransform identity() { return GeoTransform({0.0, 1.0, 0.0, 0.0, 0.0, 1.0}); }

    /// North-up raster: top-left corner at `origin`, pixel size (sx, sy); sy is usually negative.
    static GeoTransform north_up(Point origin, double sx, double sy) {
        return GeoTransform({origin.x, sx, 0.0, origin.y, 0.0, sy});
    }

    const std::array<double, 6>& coefficients() const noexcept { return c_; }

    Point pixel_to_geo(double col, double row) const noexcept {
        return {c_[0] + col * c_[1] + row * c_[2], c_[3] + col * c_[4] + row * c_[5]};
    }

    Point geo_to_pixel(double x, double y) const noexcept {
        const double dx = x - c_[0];
        const double dy = y - c_[3];
        return {(c_[5] * dx - c_[2] * dy) / det_, (-c_[4] * dx + c_[1] * dy) / det_};
    }

private:
    std::array<double, 6> c_;
    double det_ = 1.0;
};

namespace detail {

inline double cross(Point o, Point a, Point b) noexcept {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(Point p, Point a, Point b) noexcept {
    return cross(a, b, p) == 0.0 && p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
           p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

inline int orientation(Point a, Point b, Point c) noexcept {
    const double v = cross(a, b, c);
    return (v > 0.0) - (v < 0.0);
}

inline bool segments_intersect(Point p1, Point p2, Point q1, Point q2) noexcept {
    const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    return (o1 == 0 && on_segment(q1, p1, p2)) || (o2 == 0 && on_segment(q2, p1, p2)) ||
           (o3 == 0 && on_segment(p1, q1, q2)) || (o4 == 0 && on_segment(p2, q1, q2));
}

}  // namespace detail

/// Simple polygon (implicitly closed) in scene pixel coordinates.
class AoiPolygon {
public:
    AoiPolygon(std::string name, std::vector<Point> vertices) : name_(std::move(name)), vertices_(std::move(vertices)) {
        if (vertices_.size() >= 2 && vertices_.front() == vertices_.back()) vertices_.pop_back();
        if (vertices_.size() < 3) throw Error("AOI '" + name_ + "': polygon needs at least 3 distinct vertices");
        for (const auto& v : vertices_)
            if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw Error("AOI '" + name_ + "': non-finite vertex");
        check_simple();
    }

    /// Whole-scene rectangle, the default AOI when none is supplied.
    static AoiPolygon whole_image(double width, double height, std::string name = "image") {
        return AoiPolygon(std::move(name), {{0.0, 0.0}, {width, 0.0}, {width, height}, {0.0, height}});
    }

    const std::string& name() const noexcept { return name_; }
    const std::vector<Point>& vertices() const noexcept { return vertices_; }

private:
    void check_simple() const {
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point a = vertices_[i], b = vertices_[(i + 1) % n];
            if (a == b) throw Error("AOI '" + name_ + "': repeated consecutive vertex");
            for (std::size_t j = i + 1; j < n; ++j) {
                // Adjacent edges share a vertex by construction.
                if (j == i + 1 || (i == 0 && j == n - 1)) continue;
                if (detail::segments_intersect(a, b, vertices_[j], vertices_[(j + 1) % n]))
                    throw Error("AOI '" + name_ + "': polygon is self-intersecting");
            }
        }
    }

    std::string name_;
    std::vector<Point> vertices_;
};

/// Even-odd ray crossing; points on the boundary are inside.
inline bool point_in_polygon(Point p, const AoiPolygon& poly) noexcept {
    const auto& v = poly.vertices();
    const std::size_t n = v.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if (detail::on_segment(p, v[j], v[i])) return true;
        if ((v[i].y > p.y) != (v[j].y > p.y)) {
            const double x_cross = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

}  // namespace overcount
