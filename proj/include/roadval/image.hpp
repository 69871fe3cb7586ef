#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roadval/geometry.hpp"

namespace roadval {

// 8-bit RGB raster, row-major, origin at top-left.
struct ImageRGB {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // width * height * 3

    ImageRGB() = default;
    ImageRGB(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {}

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    std::uint8_t* px(int x, int y) { return &data[(static_cast<size_t>(y) * width + x) * 3]; }
    const std::uint8_t* px(int x, int y) const {
        return &data[(static_cast<size_t>(y) * width + x) * 3];
    }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        std::uint8_t* p = px(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
};

ImageRGB load_ppm(const std::string& path);
void save_ppm(const ImageRGB& img, const std::string& path);

// Drawing helpers for annotated debug output.
void draw_line(ImageRGB& img, Vec2 a, Vec2 b, std::uint8_t r, std::uint8_t g, std::uint8_t b_);
void draw_square(ImageRGB& img, Vec2 center, int half, std::uint8_t r, std::uint8_t g,
                 std::uint8_t b);
void draw_circle(ImageRGB& img, Vec2 center, int radius, std::uint8_t r, std::uint8_t g,
                 std::uint8_t b);

}  // namespace roadval
