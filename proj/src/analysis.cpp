#include "kl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "kl/counterexample.hpp"
#include "kl/error.hpp"
#include "kl/geometry.hpp"
#include "kl/numfmt.hpp"
#include "kl/rng.hpp"

namespace kl::analysis {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::string to_json(const CheckReport& rep) {
    nlohmann::json j;
    j["name"] = rep.name;
    j["verdict"] = to_string(rep.verdict);
    j["witness"] = {{"x", {rep.witness_x.x, rep.witness_x.y}},
                    {"r", rep.witness_r},
                    {"margin", rep.margin}};
    j["tol"] = rep.tol;
    if (!rep.note.empty()) j["note"] = rep.note;
    return j.dump(2) + "\n";
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
    if (!(lo > 0 && hi > lo && n >= 2)) throw Error(Err::BadInput, "bad geometric grid");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = hi * std::exp(std::log(lo / hi) * i / (n - 1));
    return g; // descending
}

Vec2 trace_level_point(const zoo::ScalarField& f, double r, double angle) {
    Vec2 a = f.anchor();
    double fa = f.value(a);
    if (!(r > fa)) throw Error(Err::Range, "level at or below the anchor value");
    Vec2 d{std::cos(angle), std::sin(angle)};
    double hi = 1.0;
    int expand = 0;
    while (f.value(a + hi * d) <= r) {
        hi *= 2.0;
        if (++expand > 60) throw Error(Err::NotStarShaped, "no radial bracket for the level");
    }
    double lo = 0.0;
    // the absolute tolerance must stay well below the height of the level
    // above the anchor, or tracing near a flat minimum drifts off the level
    double ftol = std::min(1e-10 * std::max(1.0, std::abs(r)), 1e-3 * (r - fa));
    Vec2 best = a + hi * d;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        Vec2 p = a + mid * d;
        double v = f.value(p);
        if (std::abs(v - r) <= ftol) return p;
        if (v > r) { hi = mid; best = p; }
        else lo = mid;
        if (hi - lo < 1e-16 * (1.0 + hi)) break;
    }
    return best;
}

std::vector<Vec2> trace_level(const zoo::ScalarField& f, double r, int N) {
    if (N < 4) throw Error(Err::BadInput, "need at least 4 directions");
    std::vector<Vec2> pts;
    pts.reserve(N);
    for (int i = 0; i < N; ++i) pts.push_back(trace_level_point(f, r, kTwoPi * i / N));
    return pts;
}

LevelProfile slope_profile(const zoo::ScalarField& f, const std::vector<double>& rgrid, int N) {
    if (rgrid.size() < 2) throw Error(Err::BadInput, "profile needs at least 2 levels");
    for (size_t j = 0; j + 1 < rgrid.size(); ++j)
        if (!(rgrid[j] > rgrid[j + 1]) || rgrid[j + 1] <= 0)
            throw Error(Err::BadInput, "level grid must decrease and stay positive");

    LevelProfile p;
    p.r = rgrid;
    p.s.resize(rgrid.size());
    p.u.resize(rgrid.size());
    for (size_t j = 0; j < rgrid.size(); ++j) {
        double r = rgrid[j];
        auto slope_at = [&](double angle) {
            Vec2 x = trace_level_point(f, r, angle);
            return norm(f.grad(x));
        };
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int i = 0; i < N; ++i) {
            double s = slope_at(kTwoPi * i / N);
            if (s < best) { best = s; arg = i; }
        }
        double h = kTwoPi / N;
        double a = geom::golden_max([&](double ang) { return -slope_at(ang); }, arg * h - h,
                                    arg * h + h, 40);
        best = std::min(best, slope_at(a));
        if (best < 1e-12)
            throw Error(Err::CriticalValue, "vanishing slope on the level grid at r=" + fmt(r));
        p.s[j] = best;
        p.u[j] = 1.0 / best;
    }
    return p;
}

namespace {

struct Fit {
    double slope = 0, intercept = 0, sse = std::numeric_limits<double>::infinity();
    bool valid = false;
};

Fit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    Fit f;
    size_t n = xs.size();
    if (n < 3) return f;
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) { mx += xs[i]; my += ys[i]; }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.sse = 0;
    for (size_t i = 0; i < n; ++i) {
        double e = ys[i] - (f.intercept + f.slope * xs[i]);
        f.sse += e * e;
    }
    f.valid = true;
    return f;
}

} // namespace

void build_phi(LevelProfile& p, TailModel model) {
    const size_t n = p.r.size();
    p.ubar.assign(n, 0.0);
    double run = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < n; ++j) { // largest r first; ubar grows toward the minimum
        run = std::max(run, p.u[j]);
        p.ubar[j] = run;
    }

    // tail fit over the smallest levels
    size_t tn = std::min<size_t>(12, n / 2 + 1);
    std::vector<double> lr, lu, lw, lur;
    for (size_t j = n - tn; j < n; ++j) {
        lr.push_back(std::log(p.r[j]));
        lu.push_back(std::log(p.u[j]));
        if (p.r[j] < 1.0) {
            lw.push_back(std::log(-std::log(p.r[j])));
            lur.push_back(std::log(p.u[j] * p.r[j]));
        }
    }
    Fit pow_fit = linear_fit(lr, lu);
    Fit logpow_fit = (lw.size() == tn) ? linear_fit(lw, lur) : Fit{};

    bool use_logpow = false;
    switch (model) {
        case TailModel::None: break;
        case TailModel::Power: break;
        case TailModel::LogPower: use_logpow = true; break;
        case TailModel::Auto:
            use_logpow = logpow_fit.valid && (!pow_fit.valid || logpow_fit.sse < pow_fit.sse);
            break;
    }

    p.tail_integral = 0.0;
    p.divergent_tail = false;
    p.tail_model = "none";
    double rmin = p.r.back();
    if (model != TailModel::None) {
        if (use_logpow && logpow_fit.valid) {
            p.tail_model = "log-power";
            double b = logpow_fit.slope, C = std::exp(logpow_fit.intercept);
            double wmin = -std::log(rmin);
            if (b < -1.0 - 1e-9)
                p.tail_integral = C * std::pow(wmin, b + 1.0) / (-b - 1.0);
            else
                p.divergent_tail = true;
        } else if (pow_fit.valid) {
            p.tail_model = "power";
            double s = pow_fit.slope, C = std::exp(pow_fit.intercept);
            if (s > -1.0 + 1e-9)
                p.tail_integral = C * std::pow(rmin, s + 1.0) / (s + 1.0);
            else
                p.divergent_tail = true;
        }
    }

    p.phi.assign(n, 0.0);
    p.phi[n - 1] = p.tail_integral;
    for (size_t j = n - 1; j-- > 0;)
        p.phi[j] = p.phi[j + 1] + 0.5 * (p.ubar[j] + p.ubar[j + 1]) * (p.r[j] - p.r[j + 1]);
    p.has_phi = true;
}

zoo::Desing desing_from_profile(const LevelProfile& p) {
    if (!p.has_phi) throw Error(Err::BadInput, "profile has no phi; run build_phi first");
    auto r = p.r;
    auto ubar = p.ubar;
    auto phi = p.phi;
    bool divergent = p.divergent_tail;
    std::string tail_model = p.tail_model;
    double rmin = r.back();

    auto locate = [r](double x) {
        // r is descending; find j with r[j] >= x >= r[j+1]
        size_t lo = 0, hi = r.size() - 1;
        while (hi - lo > 1) {
            size_t mid = (lo + hi) / 2;
            if (r[mid] >= x) lo = mid; else hi = mid;
        }
        return lo;
    };

    auto ub_at = [=](double x) {
        if (x >= r.front()) return ubar.front();
        if (x <= r.back()) return ubar.back();
        size_t j = locate(x);
        double t = (x - r[j + 1]) / (r[j] - r[j + 1]);
        return ubar[j + 1] + t * (ubar[j] - ubar[j + 1]);
    };

    auto value = [=](double x) {
        if (x <= 0) return 0.0;
        if (x <= rmin) {
            // inside the tail region: scale the analytic tail linearly in the
            // integrand when a model exists, else clamp at the relative origin
            if (divergent || phi.back() == 0.0) return 0.0;
            return phi.back() * (x / rmin); // mild model-free interpolation
        }
        if (x >= r.front()) return phi.front() + ubar.front() * (x - r.front());
        size_t j = locate(x);
        double um = ub_at(x);
        return phi[j + 1] + 0.5 * (ubar[j + 1] + um) * (x - r[j + 1]);
    };
    auto deriv = [=](double x) { return ub_at(std::max(x, 1e-300)); };

    zoo::Desing d;
    d.value = value;
    d.deriv = deriv;
    d.r0 = r.front();
    // ubar stored with r descending: concavity of phi means ubar nondecreasing
    d.concave = true;
    for (size_t j = 0; j + 1 < ubar.size(); ++j)
        if (ubar[j + 1] < ubar[j] - 1e-12 * std::abs(ubar[j])) { d.concave = false; break; }
    d.note = "profile (" + tail_model + " tail)";
    return d;
}

CheckReport check_kl(const zoo::ScalarField& f, const zoo::Desing& phi, double lo, double hi,
                     int n_samples, double tol, std::uint64_t seed) {
    if (!(lo > f.min_value() && hi > lo)) throw Error(Err::BadInput, "bad level band");
    Rng rng(seed);
    CheckReport rep;
    rep.name = "kl_inequality";
    rep.tol = tol;
    double worst = std::numeric_limits<double>::infinity(), best = -worst;
    for (int i = 0; i < n_samples; ++i) {
        double level = rng.log_uniform(lo, hi);
        double angle = rng.uniform(0.0, kTwoPi);
        Vec2 x = trace_level_point(f, level, angle);
        double fx = f.value(x);
        double prod = phi.deriv(fx - f.min_value()) * norm(f.grad(x));
        if (prod < worst) {
            worst = prod;
            rep.witness_x = x;
            rep.witness_r = fx;
        }
        best = std::max(best, prod);
    }
    rep.margin = worst - 1.0;
    rep.note = "min " + fmt(worst) + ", max " + fmt(best);
    rep.verdict = (worst >= 1.0 - tol) ? Verdict::Pass : Verdict::Fail;
    return rep;
}

namespace {

geom::ConvexBody level_body(const zoo::ScalarField& f, double r, int N) {
    if (const auto* c = cex::try_get_construction(f)) return cex::body_at_level(*c, r);
    return geom::ConvexBody::from_points(trace_level(f, r, N), N);
}

} // namespace

CheckReport check_sublevel_lipschitz(const zoo::ScalarField& f, const zoo::Desing& phi,
                                     const std::vector<std::pair<double, double>>& pairs,
                                     bool level_mode, double k, double tol, int N) {
    if (level_mode && !f.slope_regular())
        throw Error(Err::BadInput, "level mode requires a strongly slope-regular field");
    CheckReport rep;
    rep.name = level_mode ? "level_lipschitz" : "sublevel_lipschitz";
    rep.tol = tol;
    std::map<double, geom::ConvexBody> cache;
    auto body = [&](double r) -> const geom::ConvexBody& {
        auto it = cache.find(r);
        if (it == cache.end()) it = cache.emplace(r, level_body(f, r, N)).first;
        return it->second;
    };
    double worst = std::numeric_limits<double>::infinity();
    for (auto [r1, r2] : pairs) {
        double m0 = f.min_value();
        double d = (r1 == r2) ? 0.0 : geom::hausdorff_dist(body(r1), body(r2), N);
        double bound = k * std::abs(phi.value(r1 - m0) - phi.value(r2 - m0));
        double margin = bound + tol - d;
        if (margin < worst) {
            worst = margin;
            rep.witness_r = r1;
            rep.witness_x = {r1, r2};
            rep.note = "Dist " + fmt(d) + " vs bound " + fmt(bound);
        }
    }
    rep.margin = worst;
    rep.verdict = worst >= 0 ? Verdict::Pass : Verdict::Fail;
    return rep;
}

CheckReport check_error_bound(const zoo::ScalarField& f, double k, double r,
                              std::span<const Vec2> samples, double tol, int N) {
    CheckReport rep;
    rep.name = "error_bound";
    rep.tol = tol;
    geom::ConvexBody body = level_body(f, r, N);
    double worst = std::numeric_limits<double>::infinity();
    for (Vec2 x : samples) {
        double excess = std::max(f.value(x) - r, 0.0);
        double d = geom::dist_to_body(x, body, N);
        double margin = k * excess + tol - d;
        if (margin < worst) {
            worst = margin;
            rep.witness_x = x;
            rep.witness_r = r;
        }
    }
    rep.margin = worst;
    rep.verdict = worst >= 0 ? Verdict::Pass : Verdict::Fail;
    return rep;
}

namespace {

struct TalwegRun {
    std::vector<Vec2> points;
    double length = 0.0;
};

TalwegRun talweg_once(const zoo::ScalarField& f, double R, const std::vector<double>& rgrid,
                      int N) {
    TalwegRun out;
    Vec2 prev{};
    bool have_prev = false;
    for (double r : rgrid) {
        auto slope_at = [&](double angle) {
            return norm(f.grad(trace_level_point(f, r, angle)));
        };
        double smin = std::numeric_limits<double>::infinity();
        int arg = 0;
        std::vector<Vec2> pts(N);
        std::vector<double> sl(N);
        for (int i = 0; i < N; ++i) {
            pts[i] = trace_level_point(f, r, kTwoPi * i / N);
            sl[i] = norm(f.grad(pts[i]));
            if (sl[i] < smin) { smin = sl[i]; arg = i; }
        }
        double h = kTwoPi / N;
        double refined_angle = geom::golden_max([&](double a) { return -slope_at(a); },
                                                arg * h - h, arg * h + h, 40);
        Vec2 refined_pt = trace_level_point(f, r, refined_angle);
        smin = std::min(smin, norm(f.grad(refined_pt)));

        // valley candidates at this level
        std::vector<Vec2> valley{refined_pt};
        for (int i = 0; i < N; ++i)
            if (sl[i] <= R * smin * (1.0 + 1e-9)) valley.push_back(pts[i]);
        if (valley.empty()) throw Error(Err::EmptyValley, "no valley sample at r=" + fmt(r));

        Vec2 pick = valley.front();
        if (have_prev) {
            double bestd = std::numeric_limits<double>::infinity();
            for (const Vec2& cand : valley) {
                double d = norm(cand - prev);
                if (d < bestd - 1e-15) { bestd = d; pick = cand; }
            }
            out.length += norm(pick - prev);
        }
        out.points.push_back(pick);
        prev = pick;
        have_prev = true;
    }
    return out;
}

} // namespace

Talweg extract_talweg(const zoo::ScalarField& f, double R, const std::vector<double>& rgrid,
                      int N) {
    if (!(R > 1.0)) throw Error(Err::BadInput, "valley factor must exceed 1");
    TalwegRun base = talweg_once(f, R, rgrid, N);

    // refine the level grid x2 (geometric midpoints) and compare lengths
    std::vector<double> fine;
    for (size_t j = 0; j + 1 < rgrid.size(); ++j) {
        fine.push_back(rgrid[j]);
        fine.push_back(std::sqrt(rgrid[j] * rgrid[j + 1]));
    }
    fine.push_back(rgrid.back());
    TalwegRun ref = talweg_once(f, R, fine, N);

    Talweg out;
    out.points = base.points;
    out.length = base.length;
    out.report.name = "talweg_stability";
    out.report.tol = 0.01;
    double change = std::abs(ref.length - base.length) / std::max(base.length, 1e-12);
    out.report.margin = 0.01 - change;
    out.report.witness_r = rgrid.front();
    out.report.note = "length " + fmt(base.length) + ", refined " + fmt(ref.length);
    out.report.verdict = (std::isfinite(base.length) && change < 0.01) ? Verdict::Pass
                                                                       : Verdict::Fail;
    return out;
}

namespace {

template <class F>
double adaptive_simpson(F&& g, double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = g(lm), frm = g(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(g, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           adaptive_simpson(g, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

template <class F>
double integrate(F&& g, double a, double b, double tol) {
    if (b <= a) return 0.0;
    double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(g, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace

zoo::Desing growth_phi(double alpha, double rho) {
    if (!(alpha > 0)) throw Error(Err::BadInput, "growth exponent must be positive");
    if (alpha >= 1.0)
        throw Error(Err::Divergent, "integral of (-log s)^(-1/alpha)/s diverges for alpha >= 1");
    if (!(rho > 0 && rho < 1)) throw Error(Err::BadInput, "rho must be in (0,1)");
    auto integrand = [alpha](double s) { return std::pow(-std::log(s), -1.0 / alpha) / s; };
    auto tail_exact = [alpha](double s) {
        // integral_0^s of the integrand, by the substitution w = -log s
        double w = -std::log(s);
        return std::pow(w, 1.0 - 1.0 / alpha) / (1.0 / alpha - 1.0);
    };
    auto value = [=](double x) {
        if (x <= 0) return 0.0;
        x = std::min(x, rho);
        double cut = std::min(x * 0.5, 1e-8);
        return tail_exact(cut) + integrate(integrand, cut, x, 1e-14);
    };
    zoo::Desing d;
    d.value = value;
    d.deriv = [=](double x) { return integrand(std::clamp(x, 1e-300, rho)); };
    d.r0 = rho;
    d.concave = false;
    d.note = "growth quadrature, alpha=" + fmt(alpha);
    return d;
}

Integrability integrability_test(std::span<const double> u, std::span<const double> r) {
    if (u.size() != r.size() || u.size() < 12) return Integrability::Inconclusive;
    for (size_t j = 0; j + 1 < r.size(); ++j)
        if (!(r[j] > r[j + 1]) || r[j + 1] <= 0)
            throw Error(Err::BadInput, "grid must decrease toward 0");
    std::vector<double> contrib;
    for (size_t j = 0; j + 1 < r.size(); ++j)
        contrib.push_back(0.5 * (u[j] + u[j + 1]) * (r[j] - r[j + 1]));
    size_t n = contrib.size();
    bool all_decay = true, all_nondec = true;
    for (size_t j = n - 10; j < n; ++j) {
        double q = contrib[j] / contrib[j - 1];
        if (!(q < 0.95)) all_decay = false;
        if (q < 1.0 - 1e-12) all_nondec = false;
    }
    if (all_decay) return Integrability::Convergent;
    if (all_nondec) return Integrability::Divergent;
    return Integrability::Inconclusive;
}

std::string profile_csv(const LevelProfile& p) {
    std::ostringstream ss;
    ss << "r,s,u,ubar,phi\n";
    for (size_t j = 0; j < p.r.size(); ++j) {
        ss << fmt(p.r[j]) << "," << fmt(p.s[j]) << "," << fmt(p.u[j]) << ","
           << (j < p.ubar.size() ? fmt(p.ubar[j]) : "") << ","
           << (j < p.phi.size() ? fmt(p.phi[j]) : "") << "\n";
    }
    return ss.str();
}

} // namespace kl::analysis
