#pragma once

#include <cmath>

namespace kl {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

/// Unit vector keyed by its angle; components are cached so that repeated
/// support evaluations cost nothing.
struct UnitDir {
    double theta;
    Vec2 u;

    static UnitDir from_angle(double a) {
        return UnitDir{a, Vec2{std::cos(a), std::sin(a)}};
    }
    static UnitDir of(Vec2 v) {
        double n = norm(v);
        return UnitDir{std::atan2(v.y, v.x), v / n};
    }
};

} // namespace kl
