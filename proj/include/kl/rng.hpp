#pragma once

#include <cstdint>
#include <random>

#include "kl/vec2.hpp"

namespace kl {

/// Deterministic sampler. Draws are derived from raw mt19937_64 words so the
/// stream does not depend on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1234567) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// log-uniform on [a,b], 0 < a < b
    double log_uniform(double a, double b) {
        return a * std::exp(uniform() * std::log(b / a));
    }

    Vec2 in_disk(Vec2 center, double radius) {
        for (;;) {
            double px = uniform(-1.0, 1.0), py = uniform(-1.0, 1.0);
            if (px * px + py * py <= 1.0) return {center.x + radius * px, center.y + radius * py};
        }
    }

    Vec2 on_circle(double radius) {
        double a = uniform(0.0, 2.0 * 3.14159265358979323846);
        return {radius * std::cos(a), radius * std::sin(a)};
    }

private:
    std::mt19937_64 gen_;
};

} // namespace kl
