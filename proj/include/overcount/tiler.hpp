#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "overcount/error.hpp"
#include "overcount/geometry.hpp"

namespace overcount {

/// Sliding-window parameters. Overlap between neighbouring tiles is tile_size - stride.
class TileGrid {
public:
    TileGrid(int tile_size_px = 256, int stride_px = 192) : tile_size_(tile_size_px), stride_(stride_px) {
        if (tile_size_ < 1) throw Error("tile size must be >= 1");
        if (stride_ < 1 || stride_ > tile_size_) throw Error("tile stride must be in [1, tile size]");
    }

    int tile_size() const noexcept { return tile_size_; }
    int stride() const noexcept { return stride_; }
    int overlap() const noexcept { return tile_size_ - stride_; }

private:
    int tile_size_;
    int stride_;
};

struct TileIndex {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const TileIndex&, const TileIndex&) = default;
};

/// One window of a scene. Windows are tile_size square except when the scene itself is smaller.
struct Tile {
    TileIndex index;
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;

    PixelBox window() const { return {double(x0), double(y0), double(x0 + width), double(y0 + height)}; }
    PixelBox local_window() const { return {0.0, 0.0, double(width), double(height)}; }

    friend bool operator==(const Tile&, const Tile&) = default;
};

/// Window origins along one axis: multiples of stride, with the last one shifted back to end at the edge.
inline std::vector<int> tile_origins(int extent, const TileGrid& grid) {
    if (extent < 1) throw Error("scene extent must be >= 1");
    const int t = grid.tile_size();
    std::vector<int> origins{0};
    while (origins.back() + t < extent) {
        int next = origins.back() + grid.stride();
        if (next + t > extent) next = extent - t;
        origins.push_back(next);
    }
    return origins;
}

/// Row-major tile plan covering every pixel of a width x height scene.
inline std::vector<Tile> plan_tiles(int width, int height, const TileGrid& grid) {
    const auto xs = tile_origins(width, grid);
    const auto ys = tile_origins(height, grid);
    const int w = std::min(width, grid.tile_size());
    const int h = std::min(height, grid.tile_size());
    std::vector<Tile> tiles;
    tiles.reserve(xs.size() * ys.size());
    for (std::size_t r = 0; r < ys.size(); ++r)
        for (std::size_t c = 0; c < xs.size(); ++c)
            tiles.push_back({{int(r), int(c)}, xs[c], ys[r], w, h});
    return tiles;
}

/// Scene-frame box -> tile-local frame, clipped to the window.
inline PixelBox localize_box(const Tile& tile, const PixelBox& global_box) {
    const auto clipped = clip(global_box, tile.window());
    if (!clipped) throw Error("localize_box: box does not intersect tile window");
    return clipped->translated(-tile.x0, -tile.y0);
}

/// Tile-local box -> scene frame.
inline PixelBox globalize_box(const Tile& tile, const PixelBox& local_box) {
    if (!tile.local_window().contains(local_box)) throw Error("globalize_box: box exceeds tile window");
    return local_box.translated(tile.x0, tile.y0);
}

/// True when the tile-local box touches a window edge that lies inside the scene, i.e. an edge where
/// the object may continue into a neighbouring tile.
inline bool touches_interior_seam(const Tile& tile, const PixelBox& local_box, int scene_width, int scene_height) {
    return (tile.x0 > 0 && local_box.x_min() <= 0.0) || (tile.y0 > 0 && local_box.y_min() <= 0.0) ||
           (tile.x0 + tile.width < scene_width && local_box.x_max() >= tile.width) ||
           (tile.y0 + tile.height < scene_height && local_box.y_max() >= tile.height);
}

}  // namespace overcount
