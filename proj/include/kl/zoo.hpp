#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kl/vec2.hpp"

namespace kl::zoo {

/// A desingularization function phi in K(0, r0): continuous on [0,r0),
/// phi(0) = 0, C^1 with phi' > 0 on (0,r0).
struct Desing {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    double r0 = 0.0;
    bool concave = false;
    std::string note;
};

/// A function R^2 -> R u {+inf} with evaluation and a minimal-norm
/// (sub)gradient. Closed-form oracles are optional; estimators in the
/// analysis module fall back to sampling when they are absent.
class ScalarField {
public:
    virtual ~ScalarField() = default;

    virtual std::string name() const = 0;
    virtual double value(Vec2 x) const = 0;
    /// Minimal-norm element of the (Frechet) subdifferential. Equals the
    /// gradient wherever the field is differentiable.
    virtual Vec2 grad(Vec2 x) const = 0;

    /// Semiconvexity modulus alpha >= 0: x -> f(x) + (alpha/2)|x|^2 is convex.
    virtual double semiconvexity() const { return 0.0; }
    virtual bool in_domain(Vec2) const { return true; }
    /// Strong slope-regularity (|grad f| = |grad(-f)| everywhere); true for
    /// C^1 fields. Level-set (as opposed to sublevel-set) checks require it.
    virtual bool slope_regular() const { return false; }
    virtual double min_value() const { return 0.0; }
    virtual std::string argmin_note() const { return "{(0,0)}"; }
    /// Anchor for radial level tracing; all built-in fields are star-shaped
    /// about the origin.
    virtual Vec2 anchor() const { return {0, 0}; }
    /// Lipschitz constant of the gradient on the closed ball of the given
    /// radius (infinity = global), when known.
    virtual std::optional<double> grad_lipschitz(double ball_radius) const {
        (void)ball_radius;
        return std::nullopt;
    }

    // --- optional closed-form oracles ---
    /// Minimal slope s(r) = inf{ |grad f(x)| : f(x) = r }.
    virtual std::optional<double> slope_min_on_level(double r) const {
        (void)r;
        return std::nullopt;
    }
    virtual std::optional<Desing> desing() const { return std::nullopt; }
    virtual std::optional<Vec2> prox_closed(double lambda, Vec2 x) const {
        (void)lambda; (void)x;
        return std::nullopt;
    }
    virtual std::optional<Vec2> flow_closed(Vec2 x0, double t) const {
        (void)x0; (void)t;
        return std::nullopt;
    }
};

using FieldPtr = std::shared_ptr<const ScalarField>;

struct EvalResult {
    double value;
    Vec2 grad;
};

/// value + minimal-norm subgradient; throws OUT_OF_DOMAIN outside the domain.
EvalResult eval_grad(const ScalarField& f, Vec2 x);

/// Estimate of the strong slope limsup_{y->x} (f(x)-f(y))^+ / |y-x| by
/// spherical sampling over a decreasing radius schedule. The estimate is the
/// max over the two smallest radii once successive estimates plateau.
double strong_slope(const ScalarField& f, Vec2 x, std::span<const double> radii, int M = 64);

// Built-in fields.
FieldPtr make_power(double p);                       // |x|^p, p in (1,4]
FieldPtr make_quad(double a, double b, double c = 0); // 1/2 <Ax,x>, A = [[a,c],[c,b]] SPD
FieldPtr make_norm();                                // |x|
FieldPtr make_flat(double alpha);                    // exp(-|x|^-alpha), alpha in (0,1)

struct ZooEntry {
    std::string name;
    std::string note;
};

/// Catalog of field spec strings understood by parse_field.
std::vector<ZooEntry> zoo_catalog();

/// Parse a field spec string: "power:2", "quad:1,4", "quad:2,1,0.5", "norm",
/// "flat:0.5", "cex", "cex:12". The cex forms build the plane counterexample
/// with the given generation bound (default 12).
FieldPtr parse_field(const std::string& spec);

} // namespace kl::zoo
