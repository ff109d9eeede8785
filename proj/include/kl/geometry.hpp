#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "kl/vec2.hpp"

namespace kl::geom {

/// Compact convex subsets of the plane, represented by an exactly evaluable
/// support function sigma(u) = sup_{x in T} <x,u> on unit directions.
///
/// Kinds:
///   Disk        - center + radius
///   PolyArc     - the first m edges of a regular n-gon inscribed in a circle
///                 of radius rho (vertices at angles 2*pi*j/n, j = 0..m), closed
///                 by the circle arc of the same radius over [2*pi*m/n, 2*pi]
///   Blend       - weighted Minkowski combination t*A + (1-t)*B
///   GridSupport - support values sampled on N uniform directions; the body is
///                 the intersection of the corresponding halfspaces

struct Disk {
    Vec2 center;
    double radius;
};

struct PolyArc {
    int n;
    int m;       // 1 <= m <= n
    double rho;
};

class ConvexBody;

struct Blend {
    std::shared_ptr<const ConvexBody> a;
    std::shared_ptr<const ConvexBody> b;
    double t; // weight of a, in [0,1]
};

struct GridSupport {
    std::vector<double> sigma;  // support at angles 2*pi*i/N
    std::vector<Vec2> verts;    // halfspace-intersection polygon, one vertex per grid cell
};

class ConvexBody {
public:
    static ConvexBody disk(Vec2 center, double radius);
    static ConvexBody ring(int n, int m, double rho);
    static ConvexBody blend(ConvexBody a, ConvexBody b, double t);
    static ConvexBody from_support_samples(std::vector<double> sigma);
    static ConvexBody from_points(const std::vector<Vec2>& pts, int grid);

    /// sigma(u), exact (closed form) for disk/ring, recursive for blends.
    double support(const UnitDir& u) const;

    /// A boundary point attaining the support maximum in direction u.
    Vec2 support_point(const UnitDir& u) const;

    const std::variant<Disk, PolyArc, Blend, GridSupport>& rep() const { return rep_; }

private:
    std::variant<Disk, PolyArc, Blend, GridSupport> rep_;
};

/// max over unit directions of sigma_A - sigma_B (signed), grid of N
/// directions plus one golden-section refinement around the argmax.
double max_support_gap(const ConvexBody& a, const ConvexBody& b, int N = 2048);

/// Hausdorff distance between convex compacts: sup |sigma_A - sigma_B|.
double hausdorff_dist(const ConvexBody& a, const ConvexBody& b, int N = 2048);

/// Membership test: <x,u> <= sigma(u) + 1e-12 on the grid plus one refinement
/// at the most violated direction.
bool contains(const ConvexBody& body, Vec2 x, int N = 2048);

/// dist(x, body) for convex bodies, via max(0, sup_u(<x,u> - sigma(u))).
double dist_to_body(Vec2 x, const ConvexBody& body, int N = 2048);

/// Maximize a unimodal-enough function of the angle over [lo,hi] by golden
/// section; returns the final argument. Used for the single refinement pass.
template <class F>
double golden_max(F&& f, double lo, double hi, int iters = 80) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a); f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a); f1 = f(x1);
        }
    }
    return (f1 > f2) ? x1 : x2;
}

} // namespace kl::geom
