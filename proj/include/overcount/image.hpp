#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <png.h>

#include "overcount/error.hpp"

namespace overcount {

/// Interleaved 8-bit RGB raster, row-major.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, std::uint8_t fill = 0)
        : width_(width), height_(height), data_(std::size_t(width) * height * 3, fill) {
        if (width < 0 || height < 0) throw Error("RgbImage: negative size");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }

    const std::uint8_t* pixel(int x, int y) const noexcept { return &data_[(std::size_t(y) * width_ + x) * 3]; }
    std::uint8_t* pixel(int x, int y) noexcept { return &data_[(std::size_t(y) * width_ + x) * 3]; }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
        auto* p = pixel(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }

    void fill_rect(int x0, int y0, int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
        for (int y = std::max(0, y0); y < std::min(height_, y0 + h); ++y)
            for (int x = std::max(0, x0); x < std::min(width_, x0 + w); ++x) set(x, y, r, g, b);
    }

    RgbImage crop(int x0, int y0, int w, int h) const {
        if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > width_ || y0 + h > height_)
            throw Error("RgbImage::crop: window outside image");
        RgbImage out(w, h);
        for (int y = 0; y < h; ++y) {
            const auto* src = pixel(x0, y0 + y);
            std::copy(src, src + std::size_t(w) * 3, out.pixel(0, y));
        }
        return out;
    }

    const std::vector<std::uint8_t>& data() const noexcept { return data_; }
    std::vector<std::uint8_t>& data() noexcept { return data_; }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Reads any PNG libpng understands, converted to 8-bit RGB.
inline RgbImage read_png(const std::string& path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str()))
        throw Error("cannot read PNG '" + path + "': " + img.message);
    img.format = PNG_FORMAT_RGB;
    RgbImage out(int(img.width), int(img.height));
    if (!png_image_finish_read(&img, nullptr, out.data().data(), 0, nullptr)) {
        png_image_free(&img);
        throw Error("cannot decode PNG '" + path + "': " + img.message);
    }
    return out;
}

inline void write_png(const std::string& path, const RgbImage& image) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = png_uint_32(image.width());
    img.height = png_uint_32(image.height());
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, image.data().data(), 0, nullptr))
        throw Error("cannot write PNG '" + path + "': " + img.message);
}

}  // namespace overcount
