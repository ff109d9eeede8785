#pragma once

#include <string>
#include <vector>

#include "kl/vec2.hpp"

namespace kl::svg {

/// Minimal deterministic SVG writer with a fixed viewbox. Layers render in
/// insertion order; coordinates are emitted with shortest round-trip
/// formatting so identical inputs give identical bytes.
class Canvas {
public:
    Canvas(double half_extent = 1.25, int pixels = 640);

    void polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width = 0.004,
                  bool closed = false);
    void circle(Vec2 center, double radius, const std::string& stroke, double width = 0.004);
    void dot(Vec2 center, double radius, const std::string& fill);

    std::string str() const;

private:
    double half_;
    int px_;
    std::string body_;
};

} // namespace kl::svg
