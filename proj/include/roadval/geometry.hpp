#pragma once

#include <cmath>

namespace roadval {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    // +90 degree rotation in image coordinates (u right, v down).
    Vec2 perp() const { return {-y, x}; }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{0.0, 0.0, 0.0};
    }
};

// Distance from point q to the 2-D segment [a, b].
inline double point_segment_distance(const Vec2& q, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.dot(ab);
    if (len2 <= 0.0) return (q - a).norm();
    double t = (q - a).dot(ab) / len2;
    t = std::fmax(0.0, std::fmin(1.0, t));
    return (q - (a + ab * t)).norm();
}

}  // namespace roadval
