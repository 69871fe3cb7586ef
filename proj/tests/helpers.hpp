#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "roadval/scene.hpp"

namespace testutil {

// Deterministic rng for test data, independent of library code.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * (1.0 / 9007199254740992.0); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

// Flat-terrain scene: square DEM, one straight west-east road, oblique camera
// looking north from south of the center.
inline roadval::Scene make_flat_scene(double height = 0.0, int grid = 21,
                                      double cell_m = 30.0) {
    using namespace roadval;
    Scene s;
    EnuFrame enu = EnuFrame::at(47.0, -122.0);
    s.dem.origin = {47.0, -122.0, 0.0};
    s.dem.rows = grid;
    s.dem.cols = grid;
    s.dem.cell_size_lat = cell_m / enu.m_per_deg_lat;
    s.dem.cell_size_lon = cell_m / enu.m_per_deg_lon;
    s.dem.heights.assign(static_cast<size_t>(grid) * grid, height);

    double e = (grid - 1) * cell_m;
    RoadSegment seg;
    seg.id = "road0";
    for (double x : {0.1 * e, 0.5 * e, 0.9 * e})
        seg.polyline.push_back(enu.to_geo({x, 0.5 * e, height}));
    s.roads.segments.push_back(seg);

    double alt = height + 300.0;
    double ground = 300.0 * std::tan(roadval::deg2rad(40.0));
    s.camera.position = enu.to_geo({0.5 * e, 0.5 * e - ground, alt});
    s.camera.yaw_deg = 0.0;
    s.camera.pitch_deg = 50.0;  // oblique angle 40
    s.camera.roll_deg = 0.0;
    s.camera.focal_px = 1200.0;
    s.camera.cx = 639.5;
    s.camera.cy = 479.5;
    s.camera.width = 1280;
    s.camera.height = 960;
    return s;
}

inline roadval::BuildingPrism make_box(const roadval::EnuFrame& enu, double cx, double cy,
                                       double half, double base, double height) {
    roadval::BuildingPrism b;
    for (auto [dx, dy] : {std::pair{-half, -half}, std::pair{half, -half},
                          std::pair{half, half}, std::pair{-half, half}}) {
        roadval::GeoPoint g = enu.to_geo({cx + dx, cy + dy, 0.0});
        b.footprint.push_back({g.lat, g.lon});
    }
    b.base_alt = base;
    b.height = height;
    return b;
}

}  // namespace testutil
