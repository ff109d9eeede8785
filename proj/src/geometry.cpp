#include "kl/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "kl/error.hpp"

namespace kl::geom {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a;
}

// Support of the polygon part: vertices v_j = rho * e^{i 2pi j / n}, j = 0..m.
// <v_j, u> = rho * cos(2pi j/n - theta_u) is unimodal in j, so it suffices to
// probe the index nearest to theta_u and its neighbours.
double polyarc_vertex_support(const PolyArc& p, double theta, int* arg_j = nullptr) {
    double step = kTwoPi / p.n;
    int jc = static_cast<int>(std::lround(theta / step));
    double best = -1e300;
    int bestj = 0;
    for (int dj = -1; dj <= 1; ++dj) {
        int j = std::clamp(jc + dj, 0, p.m);
        double v = p.rho * std::cos(step * j - theta);
        if (v > best) { best = v; bestj = j; }
    }
    if (arg_j) *arg_j = bestj;
    return best;
}

bool polyarc_in_arc(const PolyArc& p, double theta) {
    return theta >= kTwoPi * p.m / p.n;
}

} // namespace

ConvexBody ConvexBody::disk(Vec2 center, double radius) {
    if (radius < 0) throw Error(Err::BadInput, "disk radius must be >= 0");
    ConvexBody b;
    b.rep_ = Disk{center, radius};
    return b;
}

ConvexBody ConvexBody::ring(int n, int m, double rho) {
    if (n < 3 || m < 1 || m > n || rho <= 0)
        throw Error(Err::BadInput, "ring requires n >= 3, 1 <= m <= n, rho > 0");
    ConvexBody b;
    b.rep_ = PolyArc{n, m, rho};
    return b;
}

ConvexBody ConvexBody::blend(ConvexBody a, ConvexBody b, double t) {
    if (t < 0 || t > 1) throw Error(Err::BadInput, "blend weight must be in [0,1]");
    ConvexBody r;
    r.rep_ = Blend{std::make_shared<ConvexBody>(std::move(a)),
                   std::make_shared<ConvexBody>(std::move(b)), t};
    return r;
}

ConvexBody ConvexBody::from_support_samples(std::vector<double> sigma) {
    const int N = static_cast<int>(sigma.size());
    if (N < 64) throw Error(Err::BadInput, "grid body needs at least 64 samples");
    GridSupport g;
    g.sigma = std::move(sigma);
    g.verts.resize(N);
    // Vertex i solves <v, u_i> = sigma_i, <v, u_{i+1}> = sigma_{i+1}.
    for (int i = 0; i < N; ++i) {
        int j = (i + 1) % N;
        double ai = kTwoPi * i / N, aj = kTwoPi * j / N;
        double c1 = std::cos(ai), s1 = std::sin(ai);
        double c2 = std::cos(aj), s2 = std::sin(aj);
        double det = c1 * s2 - c2 * s1;
        g.verts[i] = Vec2{(g.sigma[i] * s2 - g.sigma[j] * s1) / det,
                          (c1 * g.sigma[j] - c2 * g.sigma[i]) / det};
    }
    ConvexBody b;
    b.rep_ = std::move(g);
    return b;
}

ConvexBody ConvexBody::from_points(const std::vector<Vec2>& pts, int grid) {
    if (pts.empty()) throw Error(Err::BadInput, "empty point set");
    std::vector<double> sigma(grid);
    for (int i = 0; i < grid; ++i) {
        UnitDir u = UnitDir::from_angle(kTwoPi * i / grid);
        double best = -1e300;
        for (const Vec2& p : pts) best = std::max(best, dot(p, u.u));
        sigma[i] = best;
    }
    return from_support_samples(std::move(sigma));
}

double ConvexBody::support(const UnitDir& u) const {
    return std::visit(
        [&](const auto& r) -> double {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return dot(r.center, u.u) + r.radius;
            } else if constexpr (std::is_same_v<T, PolyArc>) {
                double theta = wrap_angle(u.theta);
                double best = polyarc_vertex_support(r, theta);
                if (polyarc_in_arc(r, theta)) best = std::max(best, r.rho);
                return best;
            } else if constexpr (std::is_same_v<T, Blend>) {
                return r.t * r.a->support(u) + (1.0 - r.t) * r.b->support(u);
            } else {
                double best = -1e300;
                for (const Vec2& v : r.verts) best = std::max(best, dot(v, u.u));
                return best;
            }
        },
        rep_);
}

Vec2 ConvexBody::support_point(const UnitDir& u) const {
    return std::visit(
        [&](const auto& r) -> Vec2 {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return r.center + r.radius * u.u;
            } else if constexpr (std::is_same_v<T, PolyArc>) {
                double theta = wrap_angle(u.theta);
                int j = 0;
                double vbest = polyarc_vertex_support(r, theta, &j);
                if (polyarc_in_arc(r, theta) && r.rho >= vbest)
                    return Vec2{r.rho * std::cos(theta), r.rho * std::sin(theta)};
                double step = kTwoPi / r.n;
                return Vec2{r.rho * std::cos(step * j), r.rho * std::sin(step * j)};
            } else if constexpr (std::is_same_v<T, Blend>) {
                // support point of a Minkowski combination is the combination
                // of support points
                return r.t * r.a->support_point(u) + (1.0 - r.t) * r.b->support_point(u);
            } else {
                double best = -1e300;
                Vec2 arg{};
                for (const Vec2& v : r.verts) {
                    double s = dot(v, u.u);
                    if (s > best) { best = s; arg = v; }
                }
                return arg;
            }
        },
        rep_);
}

double max_support_gap(const ConvexBody& a, const ConvexBody& b, int N) {
    if (N < 64) throw Error(Err::BadInput, "direction grid must have N >= 64");
    auto gap = [&](double theta) {
        UnitDir u = UnitDir::from_angle(theta);
        return a.support(u) - b.support(u);
    };
    double best = -1e300;
    int arg = 0;
    for (int i = 0; i < N; ++i) {
        double g = gap(kTwoPi * i / N);
        if (g > best) { best = g; arg = i; }
    }
    double h = kTwoPi / N;
    double theta = golden_max(gap, arg * h - h, arg * h + h);
    return std::max(best, gap(theta));
}

double hausdorff_dist(const ConvexBody& a, const ConvexBody& b, int N) {
    return std::max(std::max(max_support_gap(a, b, N), max_support_gap(b, a, N)), 0.0);
}

bool contains(const ConvexBody& body, Vec2 x, int N) {
    auto viol = [&](double theta) {
        UnitDir u = UnitDir::from_angle(theta);
        return dot(x, u.u) - body.support(u);
    };
    double worst = -1e300;
    int arg = 0;
    for (int i = 0; i < N; ++i) {
        double v = viol(kTwoPi * i / N);
        if (v > worst) { worst = v; arg = i; }
    }
    double h = kTwoPi / N;
    double theta = golden_max(viol, arg * h - h, arg * h + h);
    worst = std::max(worst, viol(theta));
    return worst <= 1e-12;
}

double dist_to_body(Vec2 x, const ConvexBody& body, int N) {
    auto viol = [&](double theta) {
        UnitDir u = UnitDir::from_angle(theta);
        return dot(x, u.u) - body.support(u);
    };
    double worst = -1e300;
    int arg = 0;
    for (int i = 0; i < N; ++i) {
        double v = viol(kTwoPi * i / N);
        if (v > worst) { worst = v; arg = i; }
    }
    double h = kTwoPi / N;
    double theta = golden_max(viol, arg * h - h, arg * h + h);
    worst = std::max(worst, viol(theta));
    return std::max(worst, 0.0);
}

} // namespace kl::geom
