#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "roadval/geometry.hpp"

namespace roadval {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeoPoint {
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees
    double alt = 0.0;  // meters above datum
};

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

struct DemGrid {
    GeoPoint origin;             // grid node (0,0); alt ignored
    double cell_size_lat = 0.0;  // degrees per cell
    double cell_size_lon = 0.0;
    int rows = 0;
    int cols = 0;
    std::vector<double> heights;  // row-major, rows*cols

    double at(int r, int c) const { return heights[static_cast<size_t>(r) * cols + c]; }
    bool contains(double lat, double lon) const;
    // Bilinear interpolation of the four surrounding cells. Throws on out-of-bounds.
    double height_at(double lat, double lon) const;
    double min_height() const;
    double max_height() const;
};

struct RoadSegment {
    std::string id;
    std::vector<GeoPoint> polyline;
    std::string source = "input";
};

struct RoadNetwork {
    std::vector<RoadSegment> segments;
};

struct BuildingPrism {
    std::vector<LatLon> footprint;  // closed polygon, no repeated last vertex
    double base_alt = 0.0;
    double height = 0.0;
};

struct Camera {
    GeoPoint position;
    double yaw_deg = 0.0;    // heading of optical axis, clockwise from north
    double pitch_deg = 0.0;  // optical axis tilt down from horizontal, (0, 90)
    double roll_deg = 0.0;   // about the optical axis
    double focal_px = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    // Angle between the optical axis and the vertical, degrees.
    double oblique_angle_deg() const { return 90.0 - pitch_deg; }
};

// Local East-North-Up tangent plane anchored at the DEM origin, spherical earth.
struct EnuFrame {
    double lat0 = 0.0;
    double lon0 = 0.0;
    double m_per_deg_lat = 0.0;
    double m_per_deg_lon = 0.0;

    static EnuFrame at(double lat0, double lon0) {
        EnuFrame f;
        f.lat0 = lat0;
        f.lon0 = lon0;
        f.m_per_deg_lat = kEarthRadiusM * kPi / 180.0;
        f.m_per_deg_lon = kEarthRadiusM * std::cos(deg2rad(lat0)) * kPi / 180.0;
        return f;
    }

    Vec3 to_enu(const GeoPoint& p) const {
        return {(p.lon - lon0) * m_per_deg_lon, (p.lat - lat0) * m_per_deg_lat, p.alt};
    }
    GeoPoint to_geo(const Vec3& v) const {
        return {lat0 + v.y / m_per_deg_lat, lon0 + v.x / m_per_deg_lon, v.z};
    }
};

struct Scene {
    int version = 1;
    DemGrid dem;
    RoadNetwork roads;
    std::vector<BuildingPrism> buildings;
    Camera camera;

    EnuFrame enu() const { return EnuFrame::at(dem.origin.lat, dem.origin.lon); }
    void validate() const;  // throws ValidationError naming the offending field
};

Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

}  // namespace roadval
