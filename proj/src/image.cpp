#include "roadval/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace roadval {

ImageRGB load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw std::runtime_error("unsupported image format (want binary PPM): " + path);
    auto skip_ws_comments = [&in]() {
        while (true) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
    };
    int w, h, maxval;
    skip_ws_comments();
    in >> w;
    skip_ws_comments();
    in >> h;
    skip_ws_comments();
    in >> maxval;
    in.get();  // single whitespace before raster
    if (maxval != 255) throw std::runtime_error("unsupported PPM maxval: " + path);
    ImageRGB img(w, h);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (!in) throw std::runtime_error("truncated PPM raster: " + path);
    return img;
}

void save_ppm(const ImageRGB& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write image: " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
}

void draw_line(ImageRGB& img, Vec2 a, Vec2 b, std::uint8_t r, std::uint8_t g, std::uint8_t b_) {
    int x0 = static_cast<int>(std::lround(a.x));
    int y0 = static_cast<int>(std::lround(a.y));
    int x1 = static_cast<int>(std::lround(b.x));
    int y1 = static_cast<int>(std::lround(b.y));
    int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        if (img.in_bounds(x0, y0)) img.set(x0, y0, r, g, b_);
        if (x0 == x1 && y0 == y1) break;
        int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void draw_square(ImageRGB& img, Vec2 center, int half, std::uint8_t r, std::uint8_t g,
                 std::uint8_t b) {
    int cx = static_cast<int>(std::lround(center.x));
    int cy = static_cast<int>(std::lround(center.y));
    for (int y = cy - half; y <= cy + half; ++y)
        for (int x = cx - half; x <= cx + half; ++x)
            if (img.in_bounds(x, y)) img.set(x, y, r, g, b);
}

void draw_circle(ImageRGB& img, Vec2 center, int radius, std::uint8_t r, std::uint8_t g,
                 std::uint8_t b) {
    int cx = static_cast<int>(std::lround(center.x));
    int cy = static_cast<int>(std::lround(center.y));
    for (int y = cy - radius; y <= cy + radius; ++y) {
        for (int x = cx - radius; x <= cx + radius; ++x) {
            double d = std::hypot(x - cx, y - cy);
            if (std::abs(d - radius) <= 0.75 && img.in_bounds(x, y)) img.set(x, y, r, g, b);
        }
    }
}

}  // namespace roadval
