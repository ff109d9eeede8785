#include <doctest.h>

#include <cmath>
#include <vector>

#include "kl/counterexample.hpp"
#include "kl/geometry.hpp"
#include "kl/rng.hpp"

using namespace kl;
using geom::ConvexBody;

namespace {

constexpr double kTwoPi = 6.283185307179586;

// Independent oracle: dense sampling of the ring boundary (m polygon edges
// plus the closing arc), max of <x,u>.
double ring_support_brute(int n, int m, double rho, UnitDir u, int samples_per_piece = 20000) {
    double best = -1e300;
    for (int j = 0; j < m; ++j) {
        double a0 = kTwoPi * j / n, a1 = kTwoPi * (j + 1) / n;
        Vec2 p0{rho * std::cos(a0), rho * std::sin(a0)};
        Vec2 p1{rho * std::cos(a1), rho * std::sin(a1)};
        for (int s = 0; s <= samples_per_piece; ++s) {
            double t = static_cast<double>(s) / samples_per_piece;
            best = std::max(best, dot(p0 + t * (p1 - p0), u.u));
        }
    }
    double arc0 = kTwoPi * m / n;
    for (int s = 0; s <= 4 * samples_per_piece; ++s) {
        double a = arc0 + (kTwoPi - arc0) * s / (4.0 * samples_per_piece);
        best = std::max(best, rho * dot(Vec2{std::cos(a), std::sin(a)}, u.u));
    }
    return best;
}

ConvexBody random_body(Rng& rng, int depth = 0) {
    double pick = rng.uniform();
    if (pick < 0.4 || depth > 1) {
        return ConvexBody::disk(rng.in_disk({0, 0}, 0.3), rng.uniform(0.2, 1.0));
    }
    if (pick < 0.7) {
        int n = 3 + static_cast<int>(rng.uniform() * 9);
        int m = 1 + static_cast<int>(rng.uniform() * n);
        return ConvexBody::ring(n, std::min(m, n), rng.uniform(0.3, 1.0));
    }
    return ConvexBody::blend(random_body(rng, depth + 1), random_body(rng, depth + 1),
                             rng.uniform());
}

} // namespace

TEST_CASE("disk support is offset plus radius") {
    auto d = ConvexBody::disk({0, 0}, 1.0);
    for (double a : {0.0, 0.3, 1.7, 3.9, 6.0})
        CHECK(d.support(UnitDir::from_angle(a)) == doctest::Approx(1.0).epsilon(1e-15));
    auto off = ConvexBody::disk({0.5, -0.25}, 2.0);
    UnitDir u = UnitDir::from_angle(0.7);
    CHECK(off.support(u) == doctest::Approx(dot(Vec2{0.5, -0.25}, u.u) + 2.0).epsilon(1e-15));
}

TEST_CASE("square hull from points") {
    std::vector<Vec2> corners{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    auto sq = ConvexBody::from_points(corners, 256);
    CHECK(sq.support(UnitDir::from_angle(0.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sq.support(UnitDir::from_angle(kTwoPi / 8)) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("ring support matches dense boundary sampling") {
    double R5 = cex::generation_radius(5);
    double mu5 = 1.0 - 1.0 / 125.0;
    double rho = mu5 * mu5 * R5;
    auto ring = ConvexBody::ring(5, 2, rho);
    for (double a : {0.0, 0.4, kTwoPi / 10.0, 2.0, 3.9, 5.5}) {
        UnitDir u = UnitDir::from_angle(a);
        double brute = ring_support_brute(5, 2, rho, u);
        CHECK(ring.support(u) == doctest::Approx(brute).epsilon(1e-7));
        CHECK(ring.support(u) >= brute - 1e-12); // closed form dominates samples
    }
    // direction at angle pi/5 hits the vertex at angle 2*pi/5
    UnitDir u = UnitDir::from_angle(kTwoPi / 10.0);
    CHECK(ring.support(u) == doctest::Approx(rho * std::cos(kTwoPi / 10.0)).epsilon(1e-14));
}

TEST_CASE("support point attains the support value") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        ConvexBody b = random_body(rng);
        UnitDir u = UnitDir::from_angle(rng.uniform(0.0, kTwoPi));
        CHECK(dot(b.support_point(u), u.u) == doctest::Approx(b.support(u)).epsilon(1e-12));
    }
}

TEST_CASE("hausdorff distance basics") {
    auto d1 = ConvexBody::disk({0, 0}, 1.0);
    auto d2 = ConvexBody::disk({0, 0}, 0.4);
    CHECK(geom::hausdorff_dist(d1, d2) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(geom::hausdorff_dist(d1, d1) == doctest::Approx(0.0));
}

TEST_CASE("consecutive ring distance has the closed form") {
    // Dist(hull C_{n,m}, hull C_{n,m-1}) = mu^{m-1} R_n (1 - mu cos(pi/n))
    for (int n : {5, 7}) {
        double Rn = cex::generation_radius(n);
        double mu = 1.0 - 1.0 / (static_cast<double>(n) * n * n);
        for (int m : {2, 3, n}) {
            auto outer = ConvexBody::ring(n, m - 1, std::pow(mu, m - 1) * Rn);
            auto inner = ConvexBody::ring(n, m, std::pow(mu, m) * Rn);
            double expect = std::pow(mu, m - 1) * Rn * (1.0 - mu * std::cos(M_PI / n));
            CHECK(geom::hausdorff_dist(outer, inner) == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("hausdorff metric properties on random bodies") {
    Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        ConvexBody a = random_body(rng), b = random_body(rng), c = random_body(rng);
        double ab = geom::hausdorff_dist(a, b), ba = geom::hausdorff_dist(b, a);
        double ac = geom::hausdorff_dist(a, c), cb = geom::hausdorff_dist(c, b);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab <= ac + cb + 1e-9);
    }
}

TEST_CASE("nested bodies: gap, membership, distance bound") {
    Rng rng(13);
    auto outer = ConvexBody::disk({0, 0}, 1.0);
    auto inner = ConvexBody::blend(ConvexBody::ring(6, 3, 0.8), ConvexBody::disk({0, 0}, 0.5), 0.5);
    double d = geom::hausdorff_dist(outer, inner);
    CHECK(d == doctest::Approx(geom::max_support_gap(outer, inner)).epsilon(1e-12));
    for (int i = 0; i < 64; ++i) {
        UnitDir u = UnitDir::from_angle(rng.uniform(0.0, kTwoPi));
        Vec2 p = outer.support_point(u);
        CHECK(geom::dist_to_body(p, inner) <= d + 1e-9);
    }
}

TEST_CASE("blend support is the pointwise blend") {
    Rng rng(17);
    ConvexBody a = ConvexBody::ring(7, 4, 0.9);
    ConvexBody b = ConvexBody::disk({0.1, 0.2}, 0.3);
    double t = 0.375;
    ConvexBody ab = ConvexBody::blend(a, b, t);
    for (int i = 0; i < 200; ++i) {
        UnitDir u = UnitDir::from_angle(rng.uniform(0.0, kTwoPi));
        double expect = t * a.support(u) + (1 - t) * b.support(u);
        CHECK(std::abs(ab.support(u) - expect) <= 1e-14 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("membership") {
    auto d = ConvexBody::disk({0, 0}, 1.0);
    CHECK(geom::contains(d, {0, 0}));
    CHECK(!geom::contains(d, {2, 0}));
    // boundary vertex of a ring hull
    double R5 = cex::generation_radius(5);
    double mu = 1.0 - 1.0 / 125.0;
    auto ring = ConvexBody::ring(5, 3, mu * mu * mu * R5);
    Vec2 vertex{mu * mu * mu * R5 * std::cos(kTwoPi * 2 / 5), mu * mu * mu * R5 * std::sin(kTwoPi * 2 / 5)};
    CHECK(geom::contains(ring, vertex));
}

TEST_CASE("point-to-body distance") {
    auto d = ConvexBody::disk({0, 0}, 1.0);
    CHECK(geom::dist_to_body({2, 0}, d) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(geom::dist_to_body({0.3, 0.1}, d) == doctest::Approx(0.0));
    auto small = ConvexBody::disk({0, 0}, 0.1);
    CHECK(geom::dist_to_body({0.2, 0}, small) == doctest::Approx(0.1).epsilon(1e-12));
}
