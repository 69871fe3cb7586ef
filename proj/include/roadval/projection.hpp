#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roadval/scene.hpp"

namespace roadval {

enum class SampleLabel { consistent, inconsistent, unlabeled };

// One sampled point on a projected road segment.
struct ProjectedSample {
    std::string segment_id;
    GeoPoint world;
    Vec2 px;
    Vec2 primary_dir;  // projected road tangent, unit
    Vec2 normal_dir;   // primary rotated +90 degrees
    bool visible = false;
    SampleLabel label = SampleLabel::unlabeled;
};

// Pinhole camera resolved into the scene's ENU frame.
// Camera axes: right (image u), down (image v), forward (optical axis).
struct CameraFrame {
    Vec3 origin;
    Vec3 right;
    Vec3 down;
    Vec3 forward;
    double focal = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    static CameraFrame from(const Camera& cam, const EnuFrame& enu);

    // Perspective projection; nullopt marks a point behind the camera (depth <= 0).
    std::optional<Vec2> project(const Vec3& p_enu) const;
    double depth_of(const Vec3& p_enu) const { return (p_enu - origin).dot(forward); }
    // Unit ray direction through a pixel.
    Vec3 pixel_ray(const Vec2& px) const;
    bool px_in_bounds(const Vec2& px) const {
        return px.x >= 0.0 && px.x <= width - 1 && px.y >= 0.0 && px.y <= height - 1;
    }
};

// Ray/segment tests against building prisms, shared by projection and synthgen.
struct PrismEnu {
    std::vector<Vec2> footprint;  // ENU east/north
    double z_base = 0.0;
    double z_top = 0.0;

    static PrismEnu from(const BuildingPrism& b, const EnuFrame& enu);
    bool contains(const Vec3& p) const;
    // Smallest t in (0, t_max) with origin + t*dir on a wall or the roof; nullopt if none.
    std::optional<double> ray_hit(const Vec3& origin, const Vec3& dir, double t_max) const;
};

bool point_in_polygon(const Vec2& q, const std::vector<Vec2>& poly);

// True iff the camera-to-p line of sight is blocked by a building prism or the DEM,
// strictly between the endpoints. A hit within 1e-6 m of p counts as visible.
bool is_occluded(const Scene& scene, const GeoPoint& p);

// Arc-length sampling of projected road polylines, spacing measured in image space.
std::vector<ProjectedSample> sample_segments(const Scene& scene, double spacing_px = 12.0);

// First intersection of a ray with the DEM surface (ray march + bisection refinement);
// closed-form for constant-height grids.
std::optional<Vec3> ray_dem_intersect(const DemGrid& dem, const EnuFrame& enu, const Vec3& origin,
                                      const Vec3& dir, double max_range);
// Hot-loop variant with precomputed grid height bounds.
std::optional<Vec3> ray_dem_intersect(const DemGrid& dem, const EnuFrame& enu, const Vec3& origin,
                                      const Vec3& dir, double max_range, double hmin, double hmax);

// Intersect the pixel ray with the DEM surface.
std::optional<GeoPoint> backproject_to_dem(const Scene& scene, const Vec2& px);

// Delimited-text dump of samples (segment_id, u, v, dirs, visible).
void dump_samples(const std::vector<ProjectedSample>& samples, const std::string& path);

}  // namespace roadval
