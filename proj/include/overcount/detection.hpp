#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "overcount/error.hpp"
#include "overcount/geometry.hpp"
#include "overcount/image.hpp"
#include "overcount/ingestion.hpp"
#include "overcount/tiler.hpp"

namespace overcount {

enum class Frame { TileLocal, SceneGlobal };

/// One scored vehicle box.
struct Detection {
    PixelBox box;
    double score = 1.0;
    std::string class_label = "car";
    Frame frame = Frame::SceneGlobal;
    std::optional<TileIndex> tile_index;
    std::string scene_id;
};

struct DetectorConfig {
    /// Pixels with mean(R,G,B) strictly above this are foreground.
    double threshold = 128.0;
    double min_area_px = 100.0;
    double max_area_px = 5000.0;
    /// Components whose fill ratio falls below this are dropped.
    double min_fill = 0.0;

    void validate() const {
        if (!(threshold >= 0.0 && threshold <= 255.0)) throw Error("detector threshold must be in [0, 255]");
        if (!(min_area_px >= 0.0) || !(min_area_px < max_area_px))
            throw Error("detector area bounds must satisfy 0 <= min_area < max_area");
        if (!(min_fill >= 0.0 && min_fill <= 1.0)) throw Error("detector min_fill must be in [0, 1]");
    }
};

/// Luminance threshold, then 4-connected components. Each component with pixel area in
/// [min_area, max_area] becomes a box scored by its fill ratio (component area / box area).
/// Output is in order of each component's first pixel in row-major scan.
inline std::vector<Detection> blob_detect(const RgbImage& image, const DetectorConfig& cfg) {
    cfg.validate();
    const int w = image.width(), h = image.height();
    const double limit = 3.0 * cfg.threshold;
    std::vector<std::uint8_t> fg(std::size_t(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto* p = image.pixel(x, y);
            fg[std::size_t(y) * w + x] = (double(p[0]) + p[1] + p[2]) > limit;
        }

    std::vector<Detection> out;
    std::vector<std::size_t> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t start = std::size_t(y) * w + x;
            if (!fg[start]) continue;
            fg[start] = 0;
            stack.assign(1, start);
            long long area = 0;
            int x0 = x, x1 = x, y0 = y, y1 = y;
            while (!stack.empty()) {
                const std::size_t i = stack.back();
                stack.pop_back();
                const int cx = int(i % w), cy = int(i / w);
                ++area;
                x0 = std::min(x0, cx), x1 = std::max(x1, cx), y0 = std::min(y0, cy), y1 = std::max(y1, cy);
                auto visit = [&](int nx, int ny) {
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
                    const std::size_t j = std::size_t(ny) * w + nx;
                    if (fg[j]) {
                        fg[j] = 0;
                        stack.push_back(j);
                    }
                };
                visit(cx - 1, cy), visit(cx + 1, cy), visit(cx, cy - 1), visit(cx, cy + 1);
            }
            if (area < cfg.min_area_px || area > cfg.max_area_px) continue;
            PixelBox box(x0, y0, x1 + 1, y1 + 1);
            const double fill = double(area) / box.area();
            if (fill < cfg.min_fill) continue;
            out.push_back({box, fill, "car", Frame::TileLocal, std::nullopt, {}});
        }
    }
    return out;
}

/// Ground-truth boxes that overlap the tile, localized and clipped, score 1.
inline std::vector<Detection> oracle_detect(const Tile& tile, const AnnotationSet& truth) {
    std::vector<Detection> out;
    const PixelBox window = tile.window();
    for (const auto& b : truth.boxes) {
        if (intersection_area(b, window) <= 0.0) continue;
        out.push_back({localize_box(tile, b), 1.0, "car", Frame::TileLocal, tile.index, {}});
    }
    return out;
}

/// A per-tile detector. `tile_pixels` is the tile's crop of the scene; it is empty for detectors
/// that declare `needs_pixels == false`. Implementations must be safe to call concurrently.
template <class D>
concept TileDetector = requires(const D& d, const Tile& t, const RgbImage& img) {
    { d.detect(t, img) } -> std::convertible_to<std::vector<Detection>>;
    { D::needs_pixels } -> std::convertible_to<bool>;
};

class BlobDetector {
public:
    static constexpr bool needs_pixels = true;

    explicit BlobDetector(DetectorConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    std::vector<Detection> detect(const Tile& tile, const RgbImage& tile_pixels) const {
        if (tile_pixels.width() != tile.width || tile_pixels.height() != tile.height)
            throw Error("blob detector: tile pixels do not match tile window");
        auto dets = blob_detect(tile_pixels, cfg_);
        for (auto& d : dets) d.tile_index = tile.index;
        return dets;
    }

    const DetectorConfig& config() const noexcept { return cfg_; }

private:
    DetectorConfig cfg_;
};

class OracleDetector {
public:
    static constexpr bool needs_pixels = false;

    explicit OracleDetector(AnnotationSet truth) : truth_(std::move(truth)) {}

    std::vector<Detection> detect(const Tile& tile, const RgbImage&) const { return oracle_detect(tile, truth_); }

private:
    AnnotationSet truth_;
};

static_assert(TileDetector<BlobDetector>);
static_assert(TileDetector<OracleDetector>);

}  // namespace overcount
