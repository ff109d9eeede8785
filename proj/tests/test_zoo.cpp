#include <doctest.h>

#include <array>
#include <cmath>

#include "kl/error.hpp"
#include "kl/rng.hpp"
#include "kl/zoo.hpp"

using namespace kl;

namespace {

Vec2 fd_grad(const zoo::ScalarField& f, Vec2 x, double h = 1e-6) {
    return {(f.value({x.x + h, x.y}) - f.value({x.x - h, x.y})) / (2 * h),
            (f.value({x.x, x.y + h}) - f.value({x.x, x.y - h})) / (2 * h)};
}

const std::array<double, 7> kRadii{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};

// test-only field with a restricted domain, to exercise OUT_OF_DOMAIN paths
class BallRestricted final : public zoo::ScalarField {
public:
    explicit BallRestricted(zoo::FieldPtr inner, double R) : inner_(std::move(inner)), R_(R) {}
    std::string name() const override { return inner_->name() + "|ball"; }
    double value(Vec2 x) const override { return inner_->value(x); }
    Vec2 grad(Vec2 x) const override { return inner_->grad(x); }
    bool in_domain(Vec2 x) const override { return norm(x) <= R_; }

private:
    zoo::FieldPtr inner_;
    double R_;
};

} // namespace

TEST_CASE("eval_grad closed forms") {
    auto quad = zoo::make_quad(1, 1);
    auto [v1, g1] = zoo::eval_grad(*quad, {1, 0});
    CHECK(v1 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g1.x == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g1.y == doctest::Approx(0.0));

    auto p2 = zoo::make_power(2);
    auto [v2, g2] = zoo::eval_grad(*p2, {1, 0});
    CHECK(v2 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g2.x == doctest::Approx(2.0).epsilon(1e-15));

    auto flat = zoo::make_flat(0.5);
    double t = 0.25;
    auto [v3, g3] = zoo::eval_grad(*flat, {t, 0});
    CHECK(v3 == doctest::Approx(std::exp(-1.0 / std::sqrt(t))).epsilon(1e-14));
    double mag = 0.5 * std::pow(t, -1.5) * std::exp(-1.0 / std::sqrt(t));
    CHECK(norm(g3) == doctest::Approx(mag).epsilon(1e-12));
}

TEST_CASE("gradients agree with finite differences at 100 random points") {
    Rng rng(101);
    for (auto f : {zoo::make_power(1.5), zoo::make_power(2), zoo::make_power(3),
                   zoo::make_quad(1, 4), zoo::make_quad(2, 1, 0.5), zoo::make_flat(0.5),
                   zoo::make_norm()}) {
        for (int i = 0; i < 100; ++i) {
            Vec2 x = rng.in_disk({0, 0}, 1.0);
            if (norm(x) < 0.2) x = x + Vec2{0.3, 0.3}; // stay away from the kink/flat region
            Vec2 g = f->grad(x);
            Vec2 fd = fd_grad(*f, x);
            double scale = std::max({1e-9, norm(g), norm(fd)});
            CHECK(norm(g - fd) / scale < 1e-6);
        }
    }
}

TEST_CASE("power slope identity |grad f| = p f^((p-1)/p)") {
    Rng rng(202);
    for (double p : {1.5, 2.0, 2.5, 3.0, 4.0}) {
        auto f = zoo::make_power(p);
        for (int i = 0; i < 50; ++i) {
            Vec2 x = rng.in_disk({0, 0}, 1.2);
            if (norm(x) < 1e-3) continue;
            double lhs = norm(f->grad(x));
            double rhs = p * std::pow(f->value(x), (p - 1.0) / p);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
        }
    }
}

TEST_CASE("strong slope estimator") {
    auto p2 = zoo::make_power(2);
    CHECK(zoo::strong_slope(*p2, {1, 0}, kRadii) == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(zoo::strong_slope(*p2, {0, 0}, kRadii) == doctest::Approx(0.0).epsilon(1e-6));
    auto nrm = zoo::make_norm();
    CHECK(zoo::strong_slope(*nrm, {0.3, 0.4}, kRadii) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("strong slope matches the minimal subgradient norm") {
    Rng rng(303);
    for (auto f : {zoo::make_power(2), zoo::make_power(3), zoo::make_quad(1, 4),
                   zoo::make_flat(0.5)}) {
        for (int i = 0; i < 100; ++i) {
            Vec2 x = rng.in_disk({0, 0}, 1.0);
            if (norm(x) < 0.25) continue;
            double est = zoo::strong_slope(*f, x, kRadii);
            double ref = norm(f->grad(x));
            CHECK(std::abs(est - ref) <= 1e-3 * (1.0 + ref));
        }
    }
}

TEST_CASE("semiconvexity inequality with the declared modulus") {
    Rng rng(404);
    for (auto f : {zoo::make_power(2), zoo::make_power(3), zoo::make_norm(), zoo::make_quad(3, 1),
                   zoo::make_flat(0.5)}) {
        double alpha = f->semiconvexity();
        for (int i = 0; i < 10000; ++i) {
            Vec2 x = rng.in_disk({0, 0}, 1.0);
            Vec2 y = rng.in_disk({0, 0}, 1.0);
            double lhs = f->value(y) - f->value(x);
            double rhs = dot(f->grad(x), y - x) - alpha * norm2(x - y);
            CHECK(lhs >= rhs - 1e-9);
        }
    }
}

TEST_CASE("flat modulus is the numeric curvature bound") {
    auto flat = zoo::make_flat(0.5);
    // independent scan of the radial second derivative on (0,1]
    double worst = 0.0;
    for (int i = 1; i <= 200000; ++i) {
        double r = i / 200000.0;
        double ra = std::pow(r, -0.5);
        double g2 = 0.5 * std::pow(r, -2.5) * std::exp(-ra) * (0.5 * ra - 1.5);
        worst = std::min(worst, g2);
    }
    CHECK(flat->semiconvexity() == doctest::Approx(-worst).epsilon(1e-6));
    CHECK(flat->semiconvexity() == doctest::Approx(1.1421906696856).epsilon(1e-9));
}

TEST_CASE("minimal-norm subgradient conventions at the kinks") {
    auto nrm = zoo::make_norm();
    CHECK(norm(nrm->grad({0, 0})) == 0.0);
    auto flat = zoo::make_flat(0.5);
    CHECK(flat->value({0, 0}) == 0.0);
    CHECK(norm(flat->grad({0, 0})) == 0.0);
}

TEST_CASE("closed-form desingularizations differentiate correctly") {
    for (auto f : {zoo::make_power(2), zoo::make_power(3), zoo::make_quad(1, 4),
                   zoo::make_flat(0.5), zoo::make_norm()}) {
        auto phi = f->desing();
        REQUIRE(phi.has_value());
        for (double s : {1e-4, 1e-2, 0.3}) {
            double h = s * 1e-6;
            double fd = (phi->value(s + h) - phi->value(s - h)) / (2 * h);
            CHECK(phi->deriv(s) == doctest::Approx(fd).epsilon(1e-6));
        }
        CHECK(phi->value(1e-14) <= 1e-3); // phi(0+) = 0
    }
}

TEST_CASE("closed-form flows satisfy the steepest descent ODE") {
    Rng rng(505);
    for (auto f : {zoo::make_power(2), zoo::make_power(3), zoo::make_quad(1, 4),
                   zoo::make_quad(2, 1, 0.5), zoo::make_norm()}) {
        for (int i = 0; i < 20; ++i) {
            Vec2 x0 = rng.in_disk({0, 0}, 1.0);
            double t = rng.uniform(0.01, 0.4);
            auto xt = f->flow_closed(x0, t);
            REQUIRE(xt.has_value());
            if (norm(*xt) < 1e-3) continue;
            double h = 1e-6;
            Vec2 dxdt = (*f->flow_closed(x0, t + h) - *f->flow_closed(x0, t - h)) / (2 * h);
            Vec2 rhs = -f->grad(*xt);
            CHECK(norm(dxdt - rhs) <= 1e-5 * (1.0 + norm(rhs)));
        }
    }
}

TEST_CASE("field spec parsing and catalog") {
    CHECK(zoo::parse_field("power:2")->name() == "power:2");
    CHECK(zoo::parse_field("quad:1,4")->name() == "quad:1,4");
    CHECK(zoo::parse_field("norm")->name() == "norm");
    CHECK(zoo::parse_field("flat:0.5")->name() == "flat:0.5");
    CHECK_THROWS_AS((void)zoo::parse_field("nope"), Error);
    CHECK_THROWS_AS((void)zoo::parse_field("power:1"), Error);   // exponent out of (1,4]
    CHECK_THROWS_AS((void)zoo::parse_field("quad:1,-1"), Error); // not SPD
    CHECK(!zoo::zoo_catalog().empty());
}

TEST_CASE("domain predicate raises OUT_OF_DOMAIN") {
    auto f = std::make_shared<BallRestricted>(zoo::make_power(2), 1.0);
    CHECK(zoo::eval_grad(*f, {0.5, 0}).value == doctest::Approx(0.25));
    CHECK_THROWS_AS((void)zoo::eval_grad(*f, {2, 0}), Error);
}
