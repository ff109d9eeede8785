#include "kl/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kl/error.hpp"
#include "kl/geometry.hpp"
#include "kl/numfmt.hpp"

namespace kl::alg {

namespace {

// Exact 1-D minimization of the strictly convex section t -> F(y + t d):
// bracket a sign change of the directional derivative, then bisect it. The
// bisection resolves both smooth minima and kinks to machine precision,
// which a value-comparison search cannot (quadratic minima flatten out at
// sqrt(eps)).
template <class D1>
double line_min(D1&& dphi, double t_init) {
    if (dphi(0.0) >= 0.0) return 0.0;
    double hi = std::max(t_init, 1e-12);
    int expand = 0;
    while (dphi(hi) < 0.0) {
        hi *= 2.0;
        if (++expand > 200) return hi;
    }
    double lo = 0.0;
    for (int it = 0; it < 140; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (dphi(mid) < 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

Vec2 prox(const zoo::ScalarField& f, double lambda, Vec2 x, double tol) {
    if (!(lambda > 0)) throw Error(Err::BadInput, "prox step must be positive");
    double alpha = f.semiconvexity();
    if (alpha > 0 && lambda >= 1.0 / alpha)
        throw Error(Err::StepTooLarge, "lambda >= 1/alpha breaks subproblem convexity");

    auto G = [&](Vec2 y) { return f.grad(y) + (y - x) / lambda; };

    Vec2 y = x;
    int stalls = 0;
    for (int it = 0; it < 500; ++it) {
        Vec2 g = G(y);
        double gn = norm(g);
        if (gn <= tol) return y;
        Vec2 d = g / (-gn);
        double tstar = line_min([&](double t) { return dot(G(y + t * d), d); }, lambda * gn);
        Vec2 ynew = y + tstar * d;
        // two stalls in a row mean the iterate is pinned against a nonsmooth
        // minimizer of the subproblem
        if (norm(ynew - y) <= 1e-14 * (1.0 + norm(y))) {
            if (++stalls >= 2) return ynew;
        } else {
            stalls = 0;
        }
        y = ynew;
    }
    throw Error(Err::NoConvergence, "prox inner solver exceeded 500 iterations");
}

std::string run_csv(const IterateRun& run) {
    std::ostringstream ss;
    ss << "k,y1,y2,f,step,disp,cumlen,cert_margin\n";
    for (size_t k = 0; k < run.y.size(); ++k) {
        auto at = [&](const std::vector<double>& v) {
            return k < v.size() ? fmt(v[k]) : std::string("");
        };
        ss << k << "," << fmt(run.y[k].x) << "," << fmt(run.y[k].y) << "," << fmt(run.f[k]) << ","
           << at(run.step) << "," << at(run.disp) << "," << at(run.cumlen) << "," << at(run.cert)
           << "\n";
    }
    return ss.str();
}

namespace {

// geometric extrapolation of the remaining decrease from the last <=10 gaps
double geometric_tail(const std::vector<double>& gaps) {
    if (gaps.size() < 2) return 0.0;
    double last = gaps.back();
    double prev = gaps[gaps.size() - 2];
    if (last <= 0 || prev <= 0) return 0.0;
    double q = std::clamp(last / prev, 0.0, 0.999);
    return last * q / (1.0 - q);
}

} // namespace

ProxRunResult proximal_run(const zoo::ScalarField& f, Vec2 x0, const std::vector<double>& lambdas,
                           const zoo::Desing* phi, int K, double tol) {
    if (lambdas.empty() || K < 1) throw Error(Err::BadInput, "need steps and K >= 1");
    ProxRunResult res;
    IterateRun& run = res.run;
    run.y.push_back(x0);
    run.f.push_back(f.value(x0));
    run.cumlen.push_back(0.0);
    for (int k = 0; k < K; ++k) {
        double lam = lambdas[k % lambdas.size()];
        Vec2 ynext = prox(f, lam, run.y.back(), 1e-12);
        run.step.push_back(lam);
        run.disp.push_back(norm(ynext - run.y.back()));
        run.cumlen.push_back(run.cumlen.back() + run.disp.back());
        run.y.push_back(ynext);
        run.f.push_back(f.value(ynext));
    }

    // limit estimates
    std::vector<double> vgaps;
    for (size_t k = std::max<size_t>(run.f.size(), 11) - 11; k + 1 < run.f.size(); ++k)
        vgaps.push_back(run.f[k] - run.f[k + 1]);
    res.limit_value = run.f.back() - geometric_tail(vgaps);
    res.limit_point = run.y.back();
    if (run.disp.size() >= 2 && run.disp.back() > 0) {
        double q = std::clamp(run.disp.back() / run.disp[run.disp.size() - 2], 0.0, 0.999);
        Vec2 dir = (run.y.back() - run.y[run.y.size() - 2]) / run.disp.back();
        res.limit_point += (run.disp.back() * q / (1.0 - q)) * dir;
    }

    analysis::CheckReport rep;
    rep.name = "prox_certificates";
    rep.tol = tol;
    if (!phi) {
        rep.verdict = analysis::Verdict::Inconclusive;
        rep.note = "no desingularization supplied";
        res.certificate = rep;
        return res;
    }
    const double L = res.limit_value;
    auto phi_of = [&](double value) { return phi->value(std::max(value - L, 0.0)); };
    double worst = std::numeric_limits<double>::infinity();
    long worst_k = -1;
    std::string worst_kind;
    run.cert.assign(run.disp.size(), 0.0);
    for (size_t k = 0; k < run.disp.size(); ++k) {
        double m = (phi_of(run.f[k]) - phi_of(run.f[k + 1])) - run.disp[k];
        run.cert[k] = m;
        if (m < worst) { worst = m; worst_k = static_cast<long>(k); worst_kind = "step"; }
    }
    for (size_t k = 0; k + 1 < run.y.size(); ++k) {
        double m = phi_of(run.f[k]) - norm(res.limit_point - run.y[k]);
        if (m < worst) { worst = m; worst_k = static_cast<long>(k); worst_kind = "terminal"; }
    }
    rep.margin = worst;
    rep.witness_r = static_cast<double>(worst_k);
    rep.witness_x = run.y[static_cast<size_t>(worst_k)];
    rep.verdict = worst >= -tol ? analysis::Verdict::Pass : analysis::Verdict::Fail;
    rep.note = worst_kind + " certificate, worst at k=" + std::to_string(worst_k) +
               (rep.verdict == analysis::Verdict::Fail ? " (CERT_FAIL)" : "");
    res.certificate = rep;
    return res;
}

GradRunResult gradient_run(const zoo::ScalarField& f, Vec2 x0, const GradientRule& rule,
                           double beta, const zoo::Desing* phi, int K) {
    // descent iterates stay in the starting sublevel set, so a Lipschitz
    // constant on a ball of twice the starting radius is enough
    auto Lopt = f.grad_lipschitz(std::numeric_limits<double>::infinity());
    if (!Lopt) Lopt = f.grad_lipschitz(2.0 * std::max(1.0, norm(x0)));
    if (!Lopt) throw Error(Err::BadInput, "field does not report a gradient Lipschitz constant");
    const double L = *Lopt;
    if (rule.fixed_t && !(beta <= 1.0 - L * *rule.fixed_t / 2.0 + 1e-12))
        throw Error(Err::BadInput, "need beta <= 1 - L t / 2 for the fixed-step rule");

    GradRunResult res;
    IterateRun& run = res.run;
    run.y.push_back(x0);
    run.f.push_back(f.value(x0));
    run.cumlen.push_back(0.0);
    for (int k = 0; k < K; ++k) {
        Vec2 yk = run.y.back();
        Vec2 g = f.grad(yk);
        double t;
        if (rule.fixed_t) {
            t = *rule.fixed_t;
        } else {
            // halve from 1/L until the descent lemma decrease holds
            t = 1.0 / L;
            for (int bt = 0; bt < 60; ++bt) {
                Vec2 cand = yk - t * g;
                double need = run.f.back() - t * (1.0 - L * t / 2.0) * norm2(g);
                if (f.value(cand) <= need + 1e-15 * (1.0 + std::abs(need))) break;
                t *= 0.5;
            }
        }
        Vec2 ynext = yk - t * g;
        double fnext = f.value(ynext);
        double lhs = beta * norm(g) * norm(ynext - yk);
        double rhs = run.f.back() - fnext;
        if (lhs > rhs + 1e-12 * (1.0 + std::abs(rhs)))
            throw Error(Err::DescentViolation,
                        "descent condition violated at step " + std::to_string(k) +
                            " (beta too large or L wrong)",
                        k);
        run.step.push_back(t);
        run.disp.push_back(norm(ynext - yk));
        run.cert.push_back(rhs - lhs);
        run.cumlen.push_back(run.cumlen.back() + run.disp.back());
        run.y.push_back(ynext);
        run.f.push_back(fnext);
    }

    analysis::CheckReport rep;
    rep.name = "gradient_length_bound";
    rep.tol = 1e-6;
    if (phi) {
        double bound = (phi->value(run.f.front()) - phi->value(std::max(run.f.back(), 0.0))) / beta;
        rep.margin = bound + rep.tol - run.cumlen.back();
        rep.verdict = rep.margin >= 0 ? analysis::Verdict::Pass : analysis::Verdict::Fail;
        rep.note = "cumlen " + fmt(run.cumlen.back()) + " vs bound " + fmt(bound);
    } else {
        rep.verdict = analysis::Verdict::Inconclusive;
        rep.note = "no desingularization supplied";
    }
    res.certificate = rep;
    return res;
}

analysis::CheckReport step_estimates_check(const zoo::ScalarField& f, double L,
                                           std::span<const Vec2> xs, std::span<const double> ts,
                                           double tol) {
    analysis::CheckReport rep;
    rep.name = "step_estimates";
    rep.tol = tol;
    double worst = std::numeric_limits<double>::infinity();
    Vec2 worst_x{};
    double worst_t = 0;
    std::string worst_kind;
    for (Vec2 x : xs) {
        double fx = f.value(x);
        Vec2 g = f.grad(x);
        for (double t : ts) {
            Vec2 xp = x - t * g;
            double fxp = f.value(xp);
            double m1 = fx + dot(g, xp - x) + 0.5 * L * norm2(xp - x) - fxp; // descent lemma
            double m2 = (fx - fxp) - (1.0 - L * t / 2.0) * norm(xp - x) * norm(g);
            double m3 = (L * t + 1.0) * norm(g) - norm(f.grad(xp));
            for (auto [m, kind] : {std::pair{m1, "descent_lemma"}, {m2, "one_step_decrease"},
                                   {m3, "gradient_growth"}}) {
                if (m < worst) { worst = m; worst_x = x; worst_t = t; worst_kind = kind; }
            }
        }
    }
    rep.margin = worst;
    rep.witness_x = worst_x;
    rep.witness_r = worst_t;
    rep.note = worst_kind;
    rep.verdict = worst >= -tol ? analysis::Verdict::Pass : analysis::Verdict::Fail;
    return rep;
}

} // namespace kl::alg
