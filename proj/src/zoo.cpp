#include "kl/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kl/counterexample.hpp"
#include "kl/error.hpp"
#include "kl/geometry.hpp"

namespace kl::zoo {

namespace {

class PowerField final : public ScalarField {
public:
    explicit PowerField(double p) : p_(p) {
        if (!(p > 1.0 && p <= 4.0)) throw Error(Err::BadInput, "power exponent must be in (1,4]");
    }

    std::string name() const override { return "power:" + fmt_short(p_); }

    double value(Vec2 x) const override { return std::pow(norm(x), p_); }

    Vec2 grad(Vec2 x) const override {
        double r = norm(x);
        if (r == 0.0) return {0, 0};
        return std::pow(r, p_ - 2.0) * p_ * x;
    }

    bool slope_regular() const override { return true; }

    std::optional<double> grad_lipschitz(double ball_radius) const override {
        if (p_ == 2.0) return 2.0;
        if (!std::isfinite(ball_radius) || p_ < 2.0) return std::nullopt;
        return p_ * (p_ - 1.0) * std::pow(ball_radius, p_ - 2.0);
    }

    std::optional<double> slope_min_on_level(double r) const override {
        if (r <= 0) return std::nullopt;
        return p_ * std::pow(r, (p_ - 1.0) / p_);
    }

    std::optional<Desing> desing() const override {
        double p = p_;
        return Desing{[p](double s) { return std::pow(s, 1.0 / p); },
                      [p](double s) { return std::pow(s, 1.0 / p - 1.0) / p; },
                      1e300, true, "s^(1/p)"};
    }

    std::optional<Vec2> prox_closed(double lambda, Vec2 x) const override {
        if (p_ == 2.0) return x / (1.0 + 2.0 * lambda);
        return std::nullopt;
    }

    std::optional<Vec2> flow_closed(Vec2 x0, double t) const override {
        double r0 = norm(x0);
        if (r0 == 0.0) return Vec2{0, 0};
        if (p_ == 2.0) return std::exp(-2.0 * t) * x0;
        // radial ODE dr/dt = -p r^(p-1), so r^(2-p) decreases at rate p(2-p)
        double s = std::pow(r0, 2.0 - p_) - p_ * (2.0 - p_) * t;
        if (p_ < 2.0 && s <= 0.0) return Vec2{0, 0};
        double r = std::pow(s, 1.0 / (2.0 - p_));
        return (r / r0) * x0;
    }

private:
    static std::string fmt_short(double v) {
        std::ostringstream ss;
        ss << v;
        return ss.str();
    }
    double p_;
};

class QuadField final : public ScalarField {
public:
    QuadField(double a, double b, double c) : a_(a), b_(b), c_(c) {
        if (!(a > 0 && a * b - c * c > 0))
            throw Error(Err::BadInput, "quad matrix must be symmetric positive definite");
        double tr = a_ + b_, det = a_ * b_ - c_ * c_;
        double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
        lmin_ = (tr - disc) / 2.0;
        lmax_ = (tr + disc) / 2.0;
        // orthonormal eigenvectors (vmin_, vmax_)
        if (std::abs(c_) > 1e-300) {
            Vec2 v{c_, lmin_ - a_};
            if (norm(v) < 1e-12 * std::abs(c_)) v = Vec2{lmin_ - b_, c_};
            vmin_ = v / norm(v);
        } else {
            vmin_ = (a_ <= b_) ? Vec2{1, 0} : Vec2{0, 1};
        }
        vmax_ = Vec2{-vmin_.y, vmin_.x};
    }

    std::string name() const override {
        std::ostringstream ss;
        ss << "quad:" << a_ << "," << b_;
        if (c_ != 0) ss << "," << c_;
        return ss.str();
    }

    double value(Vec2 x) const override { return 0.5 * dot(mul(x), x); }
    Vec2 grad(Vec2 x) const override { return mul(x); }
    bool slope_regular() const override { return true; }

    std::optional<double> grad_lipschitz(double) const override { return lmax_; }

    std::optional<double> slope_min_on_level(double r) const override {
        if (r <= 0) return std::nullopt;
        return std::sqrt(2.0 * r * lmin_);
    }

    std::optional<Desing> desing() const override {
        double lm = lmin_;
        return Desing{[lm](double s) { return std::sqrt(2.0 * s / lm); },
                      [lm](double s) { return 1.0 / std::sqrt(2.0 * s * lm); },
                      1e300, true, "sqrt(2s/lmin)"};
    }

    std::optional<Vec2> prox_closed(double lambda, Vec2 x) const override {
        // (I + lambda A) y = x
        double m11 = 1 + lambda * a_, m12 = lambda * c_, m22 = 1 + lambda * b_;
        double det = m11 * m22 - m12 * m12;
        return Vec2{(m22 * x.x - m12 * x.y) / det, (m11 * x.y - m12 * x.x) / det};
    }

    std::optional<Vec2> flow_closed(Vec2 x0, double t) const override {
        double cmin = dot(x0, vmin_), cmax = dot(x0, vmax_);
        return std::exp(-lmin_ * t) * cmin * vmin_ + std::exp(-lmax_ * t) * cmax * vmax_;
    }

    double lambda_min() const { return lmin_; }
    double lambda_max() const { return lmax_; }

private:
    Vec2 mul(Vec2 x) const { return {a_ * x.x + c_ * x.y, c_ * x.x + b_ * x.y}; }
    double a_, b_, c_;
    double lmin_, lmax_;
    Vec2 vmin_{1, 0}, vmax_{0, 1};
};

class NormField final : public ScalarField {
public:
    std::string name() const override { return "norm"; }
    double value(Vec2 x) const override { return norm(x); }

    // 0 is the minimal-norm element of the subdifferential at the kink
    Vec2 grad(Vec2 x) const override {
        double r = norm(x);
        if (r == 0.0) return {0, 0};
        return x / r;
    }

    std::optional<double> slope_min_on_level(double r) const override {
        if (r <= 0) return std::nullopt;
        return 1.0;
    }

    std::optional<Desing> desing() const override {
        return Desing{[](double s) { return s; }, [](double) { return 1.0; }, 1e300, true, "s"};
    }

    std::optional<Vec2> prox_closed(double lambda, Vec2 x) const override {
        double r = norm(x);
        if (r <= lambda) return Vec2{0, 0};
        return (1.0 - lambda / r) * x;
    }

    std::optional<Vec2> flow_closed(Vec2 x0, double t) const override {
        double r0 = norm(x0);
        if (r0 == 0.0) return Vec2{0, 0};
        double r = std::max(r0 - t, 0.0);
        return (r / r0) * x0;
    }
};

class FlatField final : public ScalarField {
public:
    explicit FlatField(double alpha) : alpha_(alpha) {
        if (!(alpha > 0 && alpha < 1)) throw Error(Err::BadInput, "flat exponent must be in (0,1)");
        semiconvexity_ = compute_semiconvexity();
    }

    std::string name() const override {
        std::ostringstream ss;
        ss << "flat:" << alpha_;
        return ss.str();
    }

    double value(Vec2 x) const override {
        double r = norm(x);
        if (r == 0.0) return 0.0;
        return std::exp(-std::pow(r, -alpha_));
    }

    Vec2 grad(Vec2 x) const override {
        double r = norm(x);
        if (r == 0.0) return {0, 0}; // flat at the origin, all derivatives vanish
        return (gprime(r) / r) * x;
    }

    double semiconvexity() const override { return semiconvexity_; }
    bool slope_regular() const override { return true; }

    std::optional<double> grad_lipschitz(double ball_radius) const override {
        if (!std::isfinite(ball_radius)) return std::nullopt;
        double best = 0.0;
        for (int i = 1; i <= 4000; ++i) {
            double r = ball_radius * i / 4000.0;
            best = std::max({best, std::abs(gsecond(r)), gprime(r) / r});
        }
        return best;
    }

    std::optional<double> slope_min_on_level(double r) const override {
        if (r <= 0 || r >= 1) return std::nullopt;
        double w = -std::log(r);
        return alpha_ * r * std::pow(w, (alpha_ + 1.0) / alpha_);
    }

    std::optional<Desing> desing() const override {
        double a = alpha_;
        return Desing{[a](double s) { return s > 0 ? std::pow(-std::log(s), -1.0 / a) : 0.0; },
                      [a](double s) {
                          double w = -std::log(s);
                          return std::pow(w, -1.0 / a - 1.0) / (a * s);
                      },
                      0.99, false, "(-log s)^(-1/alpha)"};
    }

private:
    double gprime(double r) const {
        return alpha_ * std::pow(r, -alpha_ - 1.0) * std::exp(-std::pow(r, -alpha_));
    }
    double gsecond(double r) const {
        double ra = std::pow(r, -alpha_);
        return alpha_ * std::pow(r, -alpha_ - 2.0) * std::exp(-ra) * (alpha_ * ra - (alpha_ + 1.0));
    }
    // largest negative radial curvature on the unit ball, computed once
    double compute_semiconvexity() const {
        double worst = 0.0, argr = 1.0;
        for (int i = 1; i <= 4000; ++i) {
            double r = i / 4000.0;
            double v = gsecond(r);
            if (v < worst) { worst = v; argr = r; }
        }
        if (worst >= 0.0) return 0.0;
        double lo = std::max(argr - 1e-3, 1e-9), hi = std::min(argr + 1e-3, 1.0);
        double arg = geom::golden_max([&](double r) { return -gsecond(r); }, lo, hi);
        return std::max(0.0, -gsecond(arg));
    }

    double alpha_;
    double semiconvexity_;
};

} // namespace

EvalResult eval_grad(const ScalarField& f, Vec2 x) {
    if (!f.in_domain(x)) throw Error(Err::OutOfDomain, f.name());
    return {f.value(x), f.grad(x)};
}

double strong_slope(const ScalarField& f, Vec2 x, std::span<const double> radii, int M) {
    if (radii.size() < 2 || M < 32) throw Error(Err::BadInput, "need >= 2 radii and M >= 32");
    if (!f.in_domain(x)) throw Error(Err::OutOfDomain, f.name());
    const double fx = f.value(x);
    const double two_pi = 6.283185307179586;

    auto estimate = [&](double rho) {
        auto quot = [&](double a) {
            Vec2 y = x + rho * Vec2{std::cos(a), std::sin(a)};
            if (!f.in_domain(y)) return 0.0;
            return std::max(fx - f.value(y), 0.0) / rho;
        };
        double best = 0.0;
        int arg = 0;
        for (int i = 0; i < M; ++i) {
            double q = quot(two_pi * i / M);
            if (q > best) { best = q; arg = i; }
        }
        double h = two_pi / M;
        double a = geom::golden_max(quot, arg * h - h, arg * h + h);
        return std::max(best, quot(a));
    };

    double prev = estimate(radii[0]);
    double cur = prev;
    for (size_t i = 1; i < radii.size(); ++i) {
        if (!(radii[i] < radii[i - 1]) || radii[i] <= 0)
            throw Error(Err::BadInput, "radius schedule must decrease to 0");
        prev = cur;
        cur = estimate(radii[i]);
        double scale = std::max({std::abs(cur), std::abs(prev), 1e-30});
        if (std::abs(cur - prev) < 1e-4 * scale) break; // plateau reached
    }
    return std::max(cur, prev);
}

FieldPtr make_power(double p) { return std::make_shared<PowerField>(p); }
FieldPtr make_quad(double a, double b, double c) { return std::make_shared<QuadField>(a, b, c); }
FieldPtr make_norm() { return std::make_shared<NormField>(); }
FieldPtr make_flat(double alpha) { return std::make_shared<FlatField>(alpha); }

std::vector<ZooEntry> zoo_catalog() {
    return {
        {"power:<p>", "|x|^p, p in (1,4]; slope p*f^((p-1)/p), desingularization s^(1/p)"},
        {"quad:<a>,<b>[,<c>]", "1/2 <Ax,x> with A = [[a,c],[c,b]] SPD; desingularization sqrt(2s/lmin)"},
        {"norm", "|x|; minimal-norm subgradient 0 at the kink; prox is shrinkage"},
        {"flat:<alpha>", "exp(-|x|^-alpha), alpha in (0,1); flat at 0, desingularization (-log s)^(-1/alpha)"},
        {"cex[:<nmax>]", "convex plane counterexample with prescribed sublevel sets (default nmax 12)"},
    };
}

FieldPtr parse_field(const std::string& spec) {
    std::string head = spec, args;
    if (auto pos = spec.find(':'); pos != std::string::npos) {
        head = spec.substr(0, pos);
        args = spec.substr(pos + 1);
    }
    auto nums = [&]() {
        std::vector<double> v;
        std::stringstream ss(args);
        std::string tok;
        while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
        return v;
    };
    if (head == "power") {
        auto v = nums();
        if (v.size() != 1) throw Error(Err::BadInput, "power:<p>");
        return make_power(v[0]);
    }
    if (head == "quad") {
        auto v = nums();
        if (v.size() == 2) return make_quad(v[0], v[1]);
        if (v.size() == 3) return make_quad(v[0], v[1], v[2]);
        throw Error(Err::BadInput, "quad:<a>,<b>[,<c>]");
    }
    if (head == "norm") return make_norm();
    if (head == "flat") {
        auto v = nums();
        if (v.size() != 1) throw Error(Err::BadInput, "flat:<alpha>");
        return make_flat(v[0]);
    }
    if (head == "cex") {
        int nmax = 12;
        if (!args.empty()) nmax = std::stoi(args);
        return cex::make_cex_field(cex::build_construction(nmax));
    }
    throw Error(Err::BadInput, "unknown field spec '" + spec + "'");
}

} // namespace kl::zoo
