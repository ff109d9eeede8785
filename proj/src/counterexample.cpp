#include "kl/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kl/error.hpp"
#include "kl/numfmt.hpp"

namespace kl::cex {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

// ln of the tail product prod_{j>n} mu_j^{j+1} cos(pi/j); direct sum up to a
// large index, then the asymptotic remainder of -(1+pi^2/2)/j^2 - 1/j^3.
double log_tail_product(int n) {
    const long N = 200000;
    double s = 0.0;
    for (long j = n + 1; j <= N; ++j) {
        s += (j + 1) * std::log1p(-1.0 / (static_cast<double>(j) * j * j));
        s += std::log(std::cos(kPi / j));
    }
    double Nd = static_cast<double>(N);
    double s2 = 1.0 / Nd - 1.0 / (2 * Nd * Nd) + 1.0 / (6 * Nd * Nd * Nd);
    double s3 = 1.0 / (2 * Nd * Nd) - 1.0 / (2 * Nd * Nd * Nd);
    s -= (1.0 + kPi * kPi / 2.0) * s2 + s3;
    return s;
}

} // namespace

int NestedBodies::index_of(int n, int m) const {
    if (n == 2 && m == 3) return 0;
    if (n < 3 || n > n_max || m < 1 || m > n + 1)
        throw Error(Err::Range, "no body C_{" + std::to_string(n) + "," + std::to_string(m) + "}");
    int idx = 1;
    for (int j = 3; j < n; ++j) idx += j + 1;
    return idx + (m - 1);
}

NestedBodies build_rings(int n_max) {
    if (n_max < 4 || n_max > 200)
        throw Error(Err::BadInput, "n_max must be in [4, 200]");
    NestedBodies nb;
    nb.n_max = n_max;
    nb.body.push_back(geom::ConvexBody::disk({0, 0}, 1.0));
    nb.param.push_back({2, 3, 0.0, 1.0, 1.0, true});
    double R = 1.0;
    nb.gen_radius.push_back(R); // R_3
    for (int n = 3; n <= n_max; ++n) {
        double mu = 1.0 - 1.0 / (static_cast<double>(n) * n * n);
        double rho = R;
        for (int m = 1; m <= n; ++m) {
            rho *= mu;
            nb.body.push_back(geom::ConvexBody::ring(n, m, rho));
            nb.param.push_back({n, m, mu, R, rho, false});
        }
        double Rnext = rho * mu * std::cos(kPi / n); // mu^{n+1} R_n cos(pi/n)
        nb.body.push_back(geom::ConvexBody::disk({0, 0}, Rnext));
        nb.param.push_back({n, n + 1, mu, R, Rnext, true});
        nb.gen_radius.push_back(Rnext);
        R = Rnext;
    }
    nb.limit_radius = R * std::exp(log_tail_product(n_max));
    return nb;
}

double generation_sum_formula(int n, double R_n) {
    double mu = 1.0 - 1.0 / (static_cast<double>(n) * n * n);
    double head = R_n * (1.0 - mu * std::cos(kPi / n));
    return head * (1.0 - std::pow(mu, n + 1)) / (1.0 - mu);
}

double generation_radius(int n) {
    if (n < 3) throw Error(Err::Range, "generations start at n = 3");
    double R = 1.0;
    for (int j = 3; j < n; ++j) {
        double mu = 1.0 - 1.0 / (static_cast<double>(j) * j * j);
        R *= std::pow(mu, j + 1) * std::cos(kPi / j);
    }
    return R;
}

double generation_dist_sum(const NestedBodies& nb, int n, int N) {
    if (n < 3 || n > nb.n_max) throw Error(Err::Range, "generation not built");
    double s = 0.0;
    for (int m = 1; m <= n + 1; ++m) {
        int k = nb.index_of(n, m);
        s += geom::hausdorff_dist(nb.body[k - 1], nb.body[k], N);
    }
    return s;
}

double torralba_K(const NestedBodies& nb, int k, int N) {
    if (k < 1 || k + 1 >= nb.count()) throw Error(Err::Range, "torralba_K needs built neighbours");
    const auto& a = nb.body[k - 1];
    const auto& b = nb.body[k];
    const auto& c = nb.body[k + 1];
    auto ratio = [&](double theta) {
        UnitDir u = UnitDir::from_angle(theta);
        double num = a.support(u) - b.support(u);
        double den = b.support(u) - c.support(u);
        if (den < 1e-14)
            throw Error(Err::Degenerate, "support gap below 1e-14 (nesting not strict)", k);
        return num / den;
    };
    double best = -1e300;
    int arg = 0;
    for (int i = 0; i < N; ++i) {
        double v = ratio(kTwoPi * i / N);
        if (v > best) { best = v; arg = i; }
    }
    double h = kTwoPi / N;
    double theta = geom::golden_max(ratio, arg * h - h, arg * h + h);
    return std::max(best, ratio(theta));
}

PrescribedLevels assign_levels(const NestedBodies& nb, double lambda0, double lambda1, int N) {
    if (!(lambda0 > lambda1 && lambda1 > 0))
        throw Error(Err::BadInput, "need lambda0 > lambda1 > 0");
    const int B = nb.count();
    PrescribedLevels lv;
    lv.lambda0 = lambda0;
    lv.lambda1 = lambda1;
    lv.K.assign(B, 0.0);
    lv.log_gap.assign(B - 1, kNegInf);
    lv.log_delta.assign(B, kNegInf);

    lv.log_gap[0] = std::log(lambda0 - lambda1);
    for (int k = 1; k + 1 < B; ++k) {
        lv.K[k] = torralba_K(nb, k, N);
        // K_k (lambda_k - lambda_{k+1}) = (lambda_{k-1} - lambda_k) / 2
        lv.log_gap[k] = lv.log_gap[k - 1] - std::log(2.0 * lv.K[k]);
    }

    // geometric tail below the last computed gap
    double q = std::exp(lv.log_gap[B - 2] - lv.log_gap[B - 3]);
    q = std::min(q, 0.75);
    double log_tail = lv.log_gap[B - 2] + std::log(q / (1.0 - q));
    lv.log_delta[B - 1] = log_tail;
    for (int k = B - 2; k >= 0; --k)
        lv.log_delta[k] = logaddexp(lv.log_gap[k], lv.log_delta[k + 1]);

    lv.lambda_inf = lambda0 - std::exp(lv.log_delta[0]);
    lv.lambda.assign(B, lv.lambda_inf);
    for (int k = 0; k < B; ++k) lv.lambda[k] = lv.lambda_inf + std::exp(lv.log_delta[k]);
    return lv;
}

Construction build_construction(int n_max, double lambda0, double lambda1, int N) {
    Construction c;
    c.bodies = build_rings(n_max);
    c.levels = assign_levels(c.bodies, lambda0, lambda1, N);
    return c;
}

namespace {

// f(x) restricted to the ray <x,u>: invert the per-direction support
// interpolation. Returns ln(lambda - lambda_inf) and the bracket.
struct DirValue {
    double log_delta;
    int bracket;
};

DirValue dir_value(const Construction& c, Vec2 x, const UnitDir& u) {
    const auto& nb = c.bodies;
    const auto& lv = c.levels;
    const int B = nb.count();
    double t = dot(x, u.u);
    const double s0 = nb.body[0].support(u);
    // on the outermost level curve the minimal-norm subgradient belongs to
    // the inner band, so points within rounding of the boundary are clamped
    // onto it rather than handed to the affine extension
    if (t > s0 + 1e-12 * std::max(1.0, std::abs(t))) {
        return {std::log(std::exp(lv.log_delta[0]) + (t - s0)), -1};
    }
    t = std::min(t, s0);
    const double r = nb.limit_radius;
    if (t <= r) return {kNegInf, kAtMin};
    const double sB = nb.body[B - 1].support(u);
    if (t <= sB) {
        // tail segment between the innermost built body and the limit disk
        return {lv.log_delta[B - 1] + std::log((t - r) / (sB - r)), B - 1};
    }
    // binary search for the largest k with sigma_k(u) >= t
    int lo = 0, hi = B - 1; // sigma_lo >= t > sigma_hi
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (nb.body[mid].support(u) >= t) lo = mid; else hi = mid;
    }
    double sk = nb.body[lo].support(u);
    double sk1 = nb.body[lo + 1].support(u);
    double frac = (t - sk1) / (sk - sk1);
    double lg = (frac > 0) ? lv.log_gap[lo] + std::log(frac) : kNegInf;
    return {logaddexp(lv.log_delta[lo + 1], lg), lo};
}

} // namespace

CexValue eval_cex(const Construction& c, Vec2 x, int M, int refine_iters) {
    if (M < 64) throw Error(Err::BadInput, "direction grid must have M >= 64");
    auto ld = [&](double theta) { return dir_value(c, x, UnitDir::from_angle(theta)).log_delta; };
    double best = kNegInf;
    int arg = 0;
    for (int i = 0; i < M; ++i) {
        double v = ld(kTwoPi * i / M);
        if (v > best) { best = v; arg = i; }
    }
    double h = kTwoPi / M;
    double theta = kTwoPi * arg / M;
    if (best != kNegInf && refine_iters > 0) {
        double t2 = geom::golden_max(ld, arg * h - h, arg * h + h, refine_iters);
        if (ld(t2) >= best) theta = t2;
    }
    DirValue dv = dir_value(c, x, UnitDir::from_angle(theta));
    return {dv.log_delta, dv.bracket, theta};
}

double eval_cex_value(const Construction& c, Vec2 x, int M) {
    CexValue v = eval_cex(c, x, M);
    return c.levels.lambda_inf + (v.log_delta == kNegInf ? 0.0 : std::exp(v.log_delta));
}

CexGrad grad_from_value(const Construction& c, const CexValue& v) {
    if (v.bracket == kAtMin)
        throw Error(Err::UndefinedAtMin, "gradient undefined on the minimizer disk");
    UnitDir u = UnitDir::from_angle(v.theta);
    const auto& nb = c.bodies;
    const auto& lv = c.levels;
    const int B = nb.count();
    if (v.bracket == -1) return {0.0, u}; // extension has unit slope
    if (v.bracket == B - 1) {
        double den = nb.body[B - 1].support(u) - nb.limit_radius;
        return {lv.log_delta[B - 1] - std::log(den), u};
    }
    double den = nb.body[v.bracket].support(u) - nb.body[v.bracket + 1].support(u);
    return {lv.log_gap[v.bracket] - std::log(den), u};
}

CexGrad grad_cex_detail(const Construction& c, Vec2 x, int M) {
    return grad_from_value(c, eval_cex(c, x, M));
}

Vec2 grad_cex(const Construction& c, Vec2 x, int M) {
    CexGrad g = grad_cex_detail(c, x, M);
    return g.vec();
}

double band_grad_log_max(const Construction& c, int k, int theta_grid, int M) {
    if (k < 0 || k + 1 >= c.bodies.count()) throw Error(Err::Range, "band not built");
    const auto& outer = c.bodies.body[k];
    const auto& inner = c.bodies.body[k + 1];
    auto at = [&](double theta) {
        UnitDir u = UnitDir::from_angle(theta);
        Vec2 p = 0.5 * (outer.support_point(u) + inner.support_point(u));
        return grad_cex_detail(c, p, M).log_mag;
    };
    double best = kNegInf;
    int arg = 0;
    for (int i = 0; i < theta_grid; ++i) {
        double v = at(kTwoPi * i / theta_grid);
        if (v > best) { best = v; arg = i; }
    }
    double h = kTwoPi / theta_grid;
    double theta = geom::golden_max(at, arg * h - h, arg * h + h, 40);
    return std::max(best, at(theta));
}

std::vector<WitnessRow> kl_failure_witness(const NestedBodies& nb, int K, int N) {
    if (K < 1 || K >= nb.count()) throw Error(Err::Range, "witness range exceeds built bodies");
    std::vector<WitnessRow> rows;
    rows.reserve(K);
    double acc = 0.0;
    for (int k = 0; k < K; ++k) {
        double d = geom::hausdorff_dist(nb.body[k], nb.body[k + 1], N);
        acc += d;
        rows.push_back({k, d, acc});
    }
    return rows;
}

void save_construction(const std::string& path, const Construction& c) {
    std::ostringstream out;
    const auto& nb = c.bodies;
    const auto& lv = c.levels;
    out << "klab-cex 1\n";
    out << "nmax " << nb.n_max << "\n";
    out << "lambda0 " << fmt(lv.lambda0) << " lambda1 " << fmt(lv.lambda1) << "\n";
    out << "lambda_inf " << fmt(lv.lambda_inf) << "\n";
    out << "limit_radius " << fmt(nb.limit_radius) << "\n";
    out << "bodies " << nb.count() << "\n";
    for (int k = 0; k < nb.count(); ++k) {
        const auto& p = nb.param[k];
        out << "body " << k << " " << (p.is_disk ? "disk" : "ring") << " " << p.n << " " << p.m
            << " " << fmt(p.rho) << "\n";
    }
    out << "levels " << lv.count() << "\n";
    for (int k = 0; k < lv.count(); ++k) {
        out << "level " << k << " " << fmt(lv.lambda[k]) << " " << fmt(lv.K[k]) << "\n";
    }
    write_atomic(path, out.str());
}

Construction load_construction(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string word;
    int version = 0;
    in >> word >> version;
    if (word != "klab-cex" || version != 1)
        throw Error(Err::BadInput, "unrecognized construction file " + path);
    int n_max = 0;
    double l0 = 0, l1 = 0, linf = 0, lr = 0;
    in >> word >> n_max;
    in >> word >> l0 >> word >> l1;
    in >> word >> linf;
    in >> word >> lr;

    Construction c;
    c.bodies = build_rings(n_max);
    int nbodies = 0;
    in >> word >> nbodies;
    if (nbodies != c.bodies.count())
        throw Error(Err::BadInput, "body count mismatch in " + path);
    for (int k = 0; k < nbodies; ++k) {
        int idx, n, m;
        std::string kind, rho_s;
        in >> word >> idx >> kind >> n >> m >> rho_s;
        if (std::stod(rho_s) != c.bodies.param[k].rho)
            throw Error(Err::BadInput, "body record mismatch in " + path, k);
    }
    // Levels are reconstructed from the persisted K values so that the level
    // offsets are recovered at full precision.
    int nlevels = 0;
    in >> word >> nlevels;
    if (nlevels != nbodies) throw Error(Err::BadInput, "level count mismatch in " + path);
    const int B = nlevels;
    auto& lv = c.levels;
    lv.lambda0 = l0;
    lv.lambda1 = l1;
    lv.K.assign(B, 0.0);
    lv.log_gap.assign(B - 1, kNegInf);
    lv.log_delta.assign(B, kNegInf);
    for (int k = 0; k < B; ++k) {
        int idx;
        std::string lam_s, K_s;
        in >> word >> idx >> lam_s >> K_s;
        lv.K[k] = std::stod(K_s);
    }
    lv.log_gap[0] = std::log(l0 - l1);
    for (int k = 1; k + 1 < B; ++k)
        lv.log_gap[k] = lv.log_gap[k - 1] - std::log(2.0 * lv.K[k]);
    double q = std::min(std::exp(lv.log_gap[B - 2] - lv.log_gap[B - 3]), 0.75);
    lv.log_delta[B - 1] = lv.log_gap[B - 2] + std::log(q / (1.0 - q));
    for (int k = B - 2; k >= 0; --k)
        lv.log_delta[k] = logaddexp(lv.log_gap[k], lv.log_delta[k + 1]);
    lv.lambda_inf = l0 - std::exp(lv.log_delta[0]);
    lv.lambda.assign(B, lv.lambda_inf);
    for (int k = 0; k < B; ++k) lv.lambda[k] = lv.lambda_inf + std::exp(lv.log_delta[k]);
    return c;
}

geom::ConvexBody body_at_level(const Construction& c, double level) {
    const auto& lv = c.levels;
    const auto& nb = c.bodies;
    const int B = nb.count();
    double delta = level - lv.lambda_inf;
    if (!(delta > 0) || level > lv.lambda0 + 1e-15)
        throw Error(Err::Range, "level outside (lambda_inf, lambda0]");
    if (delta >= std::exp(lv.log_delta[0])) return nb.body[0];
    double ld = std::log(delta);
    if (ld <= lv.log_delta[B - 1]) {
        double t = delta / std::exp(lv.log_delta[B - 1]);
        return geom::ConvexBody::blend(nb.body[B - 1],
                                       geom::ConvexBody::disk({0, 0}, nb.limit_radius), t);
    }
    int lo = 0, hi = B - 1; // log_delta[lo] >= ld > log_delta[hi]
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (lv.log_delta[mid] >= ld) lo = mid; else hi = mid;
    }
    double t = (delta - std::exp(lv.log_delta[lo + 1])) / std::exp(lv.log_gap[lo]);
    t = std::clamp(t, 0.0, 1.0);
    return geom::ConvexBody::blend(nb.body[lo], nb.body[lo + 1], t);
}

namespace {

class CexField final : public zoo::ScalarField {
public:
    CexField(Construction c, int dirs) : c_(std::move(c)), dirs_(dirs) {}

    std::string name() const override {
        return "cex:" + std::to_string(c_.bodies.n_max);
    }
    double value(Vec2 x) const override { return eval_cex_value(c_, x, dirs_); }
    Vec2 grad(Vec2 x) const override {
        CexValue v = eval_cex(c_, x, dirs_);
        if (v.bracket == kAtMin) return {0, 0}; // 0 in the subdifferential on argmin
        return grad_cex(c_, x, dirs_);
    }
    double min_value() const override { return c_.levels.lambda_inf; }
    std::string argmin_note() const override {
        return "disk of radius " + fmt(c_.bodies.limit_radius);
    }
    const Construction& construction() const { return c_; }

private:
    Construction c_;
    int dirs_;
};

} // namespace

zoo::FieldPtr make_cex_field(Construction c, int eval_dirs) {
    return std::make_shared<CexField>(std::move(c), eval_dirs);
}

const Construction* try_get_construction(const zoo::ScalarField& f) {
    if (auto* cf = dynamic_cast<const CexField*>(&f)) return &cf->construction();
    return nullptr;
}

} // namespace kl::cex
