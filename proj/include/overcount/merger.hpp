#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "overcount/detection.hpp"
#include "overcount/error.hpp"
#include "overcount/geometry.hpp"
#include "overcount/tiler.hpp"

namespace overcount {

/// Drops tile-local detections that touch a window edge lying inside the scene. When every object is
/// smaller than the tile overlap, each object is seen untouched in at least one tile, so only
/// truncated fragments are removed. Without this, a thin fragment at a seam has low IoU with its
/// whole counterpart and survives suppression.
inline std::vector<Detection> drop_seam_truncated(const std::vector<Detection>& per_tile, const std::vector<Tile>& tiles,
                                                  int scene_width, int scene_height) {
    std::map<TileIndex, const Tile*> by_index;
    for (const auto& t : tiles) by_index.emplace(t.index, &t);
    std::vector<Detection> out;
    out.reserve(per_tile.size());
    for (const auto& d : per_tile) {
        if (d.frame != Frame::TileLocal || !d.tile_index) throw Error("seam filter: detection is not tile-local");
        const auto it = by_index.find(*d.tile_index);
        if (it == by_index.end()) throw Error("seam filter: detection references unknown tile");
        if (!touches_interior_seam(*it->second, d.box, scene_width, scene_height)) out.push_back(d);
    }
    return out;
}

/// Tile-local detections -> scene frame, ordered by tile (row-major) then by original within-tile order.
inline std::vector<Detection> globalize_all(const std::vector<Detection>& per_tile, const std::vector<Tile>& tiles) {
    std::map<TileIndex, const Tile*> by_index;
    for (const auto& t : tiles) by_index.emplace(t.index, &t);

    std::vector<std::pair<const Tile*, const Detection*>> keyed;
    keyed.reserve(per_tile.size());
    for (const auto& d : per_tile) {
        if (d.frame != Frame::TileLocal) throw Error("globalize_all: detection is already scene-global");
        if (!d.tile_index) throw Error("globalize_all: detection has no tile index");
        const auto it = by_index.find(*d.tile_index);
        if (it == by_index.end())
            throw Error("globalize_all: unknown tile (" + std::to_string(d.tile_index->row) + "," +
                        std::to_string(d.tile_index->col) + ")");
        keyed.emplace_back(it->second, &d);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first->index < b.first->index; });

    std::vector<Detection> out;
    out.reserve(keyed.size());
    for (const auto& [tile, d] : keyed) {
        Detection g = *d;
        g.box = globalize_box(*tile, d->box);
        g.frame = Frame::SceneGlobal;
        out.push_back(std::move(g));
    }
    return out;
}

/// Total order used for suppression: score descending, then box coordinates ascending.
/// Remaining fields only break ties between otherwise identical detections.
inline bool suppression_order(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.box != b.box) return a.box < b.box;
    if (a.tile_index != b.tile_index) return a.tile_index < b.tile_index;
    return a.scene_id < b.scene_id;
}

namespace detail {

// Uniform bucket grid over accepted boxes; a box is registered in every cell it overlaps.
class BoxGrid {
public:
    explicit BoxGrid(const std::vector<Detection>& dets) {
        if (dets.empty()) return;
        double x0 = dets[0].box.x_min(), y0 = dets[0].box.y_min();
        double x1 = dets[0].box.x_max(), y1 = dets[0].box.y_max();
        double mean_side = 0.0;
        for (const auto& d : dets) {
            x0 = std::min(x0, d.box.x_min()), y0 = std::min(y0, d.box.y_min());
            x1 = std::max(x1, d.box.x_max()), y1 = std::max(y1, d.box.y_max());
            mean_side += std::max(d.box.width(), d.box.height());
        }
        mean_side /= double(dets.size());
        origin_x_ = x0, origin_y_ = y0;
        cell_ = std::max(mean_side, 1e-9);
        constexpr double max_cells = double(1 << 20);
        const double need = std::ceil((x1 - x0) / cell_) * std::ceil((y1 - y0) / cell_);
        if (need > max_cells) cell_ *= std::sqrt(need / max_cells);
        nx_ = std::max<std::int64_t>(1, std::int64_t(std::ceil((x1 - x0) / cell_)));
        ny_ = std::max<std::int64_t>(1, std::int64_t(std::ceil((y1 - y0) / cell_)));
        cells_.resize(std::size_t(nx_ * ny_));
    }

    template <class F>
    bool any_of(const PixelBox& b, F&& pred) const {
        const auto [cx0, cy0, cx1, cy1] = range(b);
        for (auto cy = cy0; cy <= cy1; ++cy)
            for (auto cx = cx0; cx <= cx1; ++cx)
                for (auto idx : cells_[std::size_t(cy * nx_ + cx)])
                    if (pred(idx)) return true;
        return false;
    }

    void insert(const PixelBox& b, std::uint32_t idx) {
        const auto [cx0, cy0, cx1, cy1] = range(b);
        for (auto cy = cy0; cy <= cy1; ++cy)
            for (auto cx = cx0; cx <= cx1; ++cx) cells_[std::size_t(cy * nx_ + cx)].push_back(idx);
    }

private:
    std::int64_t cell_of(double v, double origin, std::int64_t n) const {
        return std::clamp<std::int64_t>(std::int64_t(std::floor((v - origin) / cell_)), 0, n - 1);
    }

    std::array<std::int64_t, 4> range(const PixelBox& b) const {
        return {cell_of(b.x_min(), origin_x_, nx_), cell_of(b.y_min(), origin_y_, ny_),
                cell_of(b.x_max(), origin_x_, nx_), cell_of(b.y_max(), origin_y_, ny_)};
    }

    double origin_x_ = 0.0, origin_y_ = 0.0, cell_ = 1.0;
    std::int64_t nx_ = 1, ny_ = 1;
    std::vector<std::vector<std::uint32_t>> cells_;
};

}  // namespace detail

/// Greedy non-maximum suppression. Candidates are visited in suppression_order; a candidate is kept
/// iff its IoU with every kept box is below iou_threshold. Output is in acceptance order.
inline std::vector<Detection> dedupe(std::vector<Detection> dets, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw Error("NMS IoU threshold must be in (0, 1]");
    std::sort(dets.begin(), dets.end(), suppression_order);

    // IoU >= threshold > 0 implies positive overlap, so only boxes sharing a grid cell can conflict.
    detail::BoxGrid grid(dets);
    std::vector<Detection> kept;
    for (auto& d : dets) {
        const bool suppressed =
            grid.any_of(d.box, [&](std::uint32_t k) { return iou(kept[k].box, d.box) >= iou_threshold; });
        if (suppressed) continue;
        grid.insert(d.box, std::uint32_t(kept.size()));
        kept.push_back(std::move(d));
    }
    return kept;
}

}  // namespace overcount
