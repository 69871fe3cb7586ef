#include "roadval/projection.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace roadval {

CameraFrame CameraFrame::from(const Camera& cam, const EnuFrame& enu) {
    double yaw = deg2rad(cam.yaw_deg);
    double pitch = deg2rad(cam.pitch_deg);
    double roll = deg2rad(cam.roll_deg);

    Vec3 heading{std::sin(yaw), std::cos(yaw), 0.0};
    Vec3 up{0.0, 0.0, 1.0};
    Vec3 forward = (heading * std::cos(pitch) - up * std::sin(pitch)).normalized();
    Vec3 right0 = forward.cross(up).normalized();
    Vec3 down0 = (right0.cross(forward)) * -1.0;

    CameraFrame f;
    f.origin = enu.to_enu(cam.position);
    f.forward = forward;
    f.right = right0 * std::cos(roll) + down0 * std::sin(roll);
    f.down = down0 * std::cos(roll) - right0 * std::sin(roll);
    f.focal = cam.focal_px;
    f.cx = cam.cx;
    f.cy = cam.cy;
    f.width = cam.width;
    f.height = cam.height;
    return f;
}

std::optional<Vec2> CameraFrame::project(const Vec3& p_enu) const {
    Vec3 d = p_enu - origin;
    double z = d.dot(forward);
    if (z <= 0.0) return std::nullopt;
    return Vec2{cx + focal * d.dot(right) / z, cy + focal * d.dot(down) / z};
}

Vec3 CameraFrame::pixel_ray(const Vec2& px) const {
    Vec3 d = forward + right * ((px.x - cx) / focal) + down * ((px.y - cy) / focal);
    return d.normalized();
}

PrismEnu PrismEnu::from(const BuildingPrism& b, const EnuFrame& enu) {
    PrismEnu p;
    for (const LatLon& v : b.footprint) {
        Vec3 e = enu.to_enu({v.lat, v.lon, 0.0});
        p.footprint.push_back({e.x, e.y});
    }
    p.z_base = b.base_alt;
    p.z_top = b.base_alt + b.height;
    return p;
}

bool point_in_polygon(const Vec2& q, const std::vector<Vec2>& poly) {
    bool inside = false;
    size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y > q.y) != (b.y > q.y)) {
            double x = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (q.x < x) inside = !inside;
        }
    }
    return inside;
}

bool PrismEnu::contains(const Vec3& p) const {
    if (p.z < z_base || p.z > z_top) return false;
    return point_in_polygon({p.x, p.y}, footprint);
}

std::optional<double> PrismEnu::ray_hit(const Vec3& origin, const Vec3& dir, double t_max) const {
    double best = std::numeric_limits<double>::infinity();
    size_t n = footprint.size();

    // Walls: vertical quads on each footprint edge.
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = footprint[i];
        const Vec2& b = footprint[(i + 1) % n];
        Vec2 e = b - a;
        Vec2 normal{-e.y, e.x};
        double denom = dir.x * normal.x + dir.y * normal.y;
        if (std::abs(denom) < 1e-15) continue;
        double t = ((a.x - origin.x) * normal.x + (a.y - origin.y) * normal.y) / denom;
        if (t <= 0.0 || t >= best || t > t_max) continue;
        Vec3 p = origin + dir * t;
        if (p.z < z_base || p.z > z_top) continue;
        double len2 = e.dot(e);
        if (len2 <= 0.0) continue;
        double s = ((p.x - a.x) * e.x + (p.y - a.y) * e.y) / len2;
        if (s < 0.0 || s > 1.0) continue;
        best = t;
    }

    // Roof and base: horizontal polygons.
    for (double z_plane : {z_top, z_base}) {
        if (std::abs(dir.z) < 1e-15) continue;
        double t = (z_plane - origin.z) / dir.z;
        if (t <= 0.0 || t >= best || t > t_max) continue;
        Vec3 p = origin + dir * t;
        if (point_in_polygon({p.x, p.y}, footprint)) best = t;
    }

    if (std::isfinite(best)) return best;
    return std::nullopt;
}

bool is_occluded(const Scene& scene, const GeoPoint& p) {
    EnuFrame enu = scene.enu();
    CameraFrame cam = CameraFrame::from(scene.camera, enu);
    Vec3 target = enu.to_enu(p);
    Vec3 d = target - cam.origin;
    double dist = d.norm();
    if (dist <= 1e-6) return false;
    Vec3 dir = d * (1.0 / dist);
    // A hit within 1e-6 m of the target is the surface itself, not an occluder.
    double t_max = dist - 1e-6;

    for (const BuildingPrism& b : scene.buildings) {
        PrismEnu prism = PrismEnu::from(b, enu);
        auto t = prism.ray_hit(cam.origin, dir, t_max);
        if (t && *t > 1e-6) return true;
    }

    // DEM self-occlusion, ray-marched at half-cell steps.
    double cell_m = std::fmin(scene.dem.cell_size_lat * enu.m_per_deg_lat,
                              scene.dem.cell_size_lon * enu.m_per_deg_lon);
    double step = 0.5 * cell_m;
    for (double s = step; s < dist - step; s += step) {
        Vec3 q = cam.origin + dir * s;
        double lat = enu.lat0 + q.y / enu.m_per_deg_lat;
        double lon = enu.lon0 + q.x / enu.m_per_deg_lon;
        if (!scene.dem.contains(lat, lon)) continue;
        if (q.z < scene.dem.height_at(lat, lon) - 1e-6) return true;
    }
    return false;
}

namespace {
constexpr double kNearClipM = 0.1;  // behind-camera spans clipped at this depth
}

std::vector<ProjectedSample> sample_segments(const Scene& scene, double spacing_px) {
    EnuFrame enu = scene.enu();
    CameraFrame cam = CameraFrame::from(scene.camera, enu);
    std::vector<ProjectedSample> out;

    for (const RoadSegment& seg : scene.roads.segments) {
        std::vector<Vec3> pts;
        pts.reserve(seg.polyline.size());
        for (const GeoPoint& g : seg.polyline) pts.push_back(enu.to_enu(g));

        double s_acc = 0.0;   // image arc length consumed so far
        double s_next = 0.0;  // next sample position; continuous across vertices

        for (size_t i = 0; i + 1 < pts.size(); ++i) {
            Vec3 a = pts[i];
            Vec3 b = pts[i + 1];
            double za = cam.depth_of(a);
            double zb = cam.depth_of(b);
            if (za <= kNearClipM && zb <= kNearClipM) continue;
            if (za < kNearClipM) {
                double t = (kNearClipM - za) / (zb - za);
                a = a + (b - a) * t;
                za = kNearClipM;
            } else if (zb < kNearClipM) {
                double t = (kNearClipM - zb) / (za - zb);
                b = b + (a - b) * t;
                zb = kNearClipM;
            }
            auto pa = cam.project(a);
            auto pb = cam.project(b);
            if (!pa || !pb) continue;
            double len = (*pb - *pa).norm();
            if (len <= 0.0) continue;
            Vec2 dir = (*pb - *pa) * (1.0 / len);

            while (s_next <= s_acc + len + 1e-9) {
                double tl = (s_next - s_acc) / len;
                tl = std::fmax(0.0, std::fmin(1.0, tl));
                Vec2 px = *pa + dir * (tl * len);
                // Perspective-correct interpolation back to the 3-D edge.
                double wa = (1.0 - tl) / za;
                double wb = tl / zb;
                Vec3 world = (a * wa + b * wb) * (1.0 / (wa + wb));

                if (cam.px_in_bounds(px)) {
                    ProjectedSample s;
                    s.segment_id = seg.id;
                    s.world = enu.to_geo(world);
                    s.px = px;
                    s.primary_dir = dir;
                    s.normal_dir = dir.perp();
                    s.visible = !is_occluded(scene, s.world);
                    out.push_back(std::move(s));
                }
                s_next += spacing_px;
            }
            s_acc += len;
        }
    }
    return out;
}

std::optional<Vec3> ray_dem_intersect(const DemGrid& dem, const EnuFrame& enu, const Vec3& origin,
                                      const Vec3& dir, double max_range, double hmin,
                                      double hmax) {
    auto height_at_enu = [&](const Vec3& q) -> std::optional<double> {
        double lat = enu.lat0 + q.y / enu.m_per_deg_lat;
        double lon = enu.lon0 + q.x / enu.m_per_deg_lon;
        if (!dem.contains(lat, lon)) return std::nullopt;
        return dem.height_at(lat, lon);
    };

    // Constant-height DEM: closed-form plane intersection.
    if (hmax - hmin < 1e-12) {
        if (std::abs(dir.z) < 1e-15) return std::nullopt;
        double t = (hmin - origin.z) / dir.z;
        if (t <= 0.0 || t > max_range) return std::nullopt;
        Vec3 p = origin + dir * t;
        if (!height_at_enu(p)) return std::nullopt;
        return p;
    }

    // Clip the march to the DEM bounding box (grid extent x [hmin, hmax]).
    double x_max = (dem.cols - 1) * dem.cell_size_lon * enu.m_per_deg_lon;
    double y_max = (dem.rows - 1) * dem.cell_size_lat * enu.m_per_deg_lat;
    double x0 = (dem.origin.lon - enu.lon0) * enu.m_per_deg_lon;
    double y0 = (dem.origin.lat - enu.lat0) * enu.m_per_deg_lat;
    double t_lo = 0.0, t_hi = max_range;
    const double lo_b[3] = {x0, y0, hmin};
    const double hi_b[3] = {x0 + x_max, y0 + y_max, hmax};
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    for (int ax = 0; ax < 3; ++ax) {
        if (std::abs(d[ax]) < 1e-15) {
            if (o[ax] < lo_b[ax] || o[ax] > hi_b[ax]) return std::nullopt;
            continue;
        }
        double ta = (lo_b[ax] - o[ax]) / d[ax];
        double tb = (hi_b[ax] - o[ax]) / d[ax];
        t_lo = std::fmax(t_lo, std::fmin(ta, tb));
        t_hi = std::fmin(t_hi, std::fmax(ta, tb));
    }
    if (t_hi <= t_lo) return std::nullopt;

    double cell_m =
        std::fmin(dem.cell_size_lat * enu.m_per_deg_lat, dem.cell_size_lon * enu.m_per_deg_lon);
    double step = 0.5 * cell_m;
    double t_prev = t_lo;
    bool prev_above = true, prev_valid = false;
    {
        Vec3 q = origin + dir * t_lo;
        auto h = height_at_enu(q);
        if (h) {
            prev_valid = true;
            prev_above = q.z >= *h;
            if (!prev_above && t_lo <= 0.0) return std::nullopt;  // starts below terrain
            if (!prev_above) return q;  // enters the box already below the surface
        }
    }
    for (double t = t_lo + step; t <= t_hi + step; t += step) {
        t = std::fmin(t, t_hi);
        Vec3 q = origin + dir * t;
        auto h = height_at_enu(q);
        if (!h) {
            t_prev = t;
            prev_above = true;
            prev_valid = false;
            if (t >= t_hi) break;
            continue;
        }
        bool above = q.z >= *h;
        if (!above && prev_above && prev_valid) {
            // Bisection refinement between the last above and first below samples.
            double lo = t_prev, hi = t;
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                Vec3 m = origin + dir * mid;
                auto hm = height_at_enu(m);
                if (hm && m.z < *hm)
                    hi = mid;
                else
                    lo = mid;
            }
            return origin + dir * (0.5 * (lo + hi));
        }
        if (!above && !prev_valid) return q;  // fell below while entering the grid
        t_prev = t;
        prev_above = above;
        prev_valid = true;
        if (t >= t_hi) break;
    }
    return std::nullopt;
}

std::optional<Vec3> ray_dem_intersect(const DemGrid& dem, const EnuFrame& enu, const Vec3& origin,
                                      const Vec3& dir, double max_range) {
    return ray_dem_intersect(dem, enu, origin, dir, max_range, dem.min_height(),
                             dem.max_height());
}

std::optional<GeoPoint> backproject_to_dem(const Scene& scene, const Vec2& px) {
    EnuFrame enu = scene.enu();
    CameraFrame cam = CameraFrame::from(scene.camera, enu);
    Vec3 dir = cam.pixel_ray(px);
    auto hit = ray_dem_intersect(scene.dem, enu, cam.origin, dir, 1e5);
    if (!hit) return std::nullopt;
    return enu.to_geo(*hit);
}

void dump_samples(const std::vector<ProjectedSample>& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sample dump: " + path);
    out << "# roadval samples v1\n";
    out << "# segment_id\tu\tv\tprimary_x\tprimary_y\tnormal_x\tnormal_y\tvisible\tlabel\n";
    char buf[512];
    for (const ProjectedSample& s : samples) {
        int label = s.label == SampleLabel::consistent     ? 1
                    : s.label == SampleLabel::inconsistent ? -1
                                                           : 0;
        std::snprintf(buf, sizeof(buf), "%s\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%d\t%d\n",
                      s.segment_id.c_str(), s.px.x, s.px.y, s.primary_dir.x, s.primary_dir.y,
                      s.normal_dir.x, s.normal_dir.y, s.visible ? 1 : 0, label);
        out << buf;
    }
}

}  // namespace roadval
