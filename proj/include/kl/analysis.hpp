#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kl/vec2.hpp"
#include "kl/zoo.hpp"

namespace kl::analysis {

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

/// Finite-sample verdict with a reproducible worst-case witness.
struct CheckReport {
    std::string name;
    Verdict verdict = Verdict::Inconclusive;
    Vec2 witness_x{0, 0};
    double witness_r = 0.0;
    double margin = 0.0; // worst margin; >= 0 on PASS
    double tol = 0.0;
    std::string note;
};

std::string to_json(const CheckReport& rep);

/// Level profile on a decreasing grid r[0] > r[1] > ... > 0: minimal slopes
/// s, u = 1/s, a continuous running-max majorant ubar >= u, and the
/// accumulated phi(r) = tail + integral of ubar from the smallest grid level.
struct LevelProfile {
    std::vector<double> r, s, u, ubar, phi;
    bool has_phi = false;
    bool divergent_tail = false;
    double tail_integral = 0.0;
    std::string tail_model; // "power", "log-power", "none"
};

std::vector<double> geometric_grid(double lo, double hi, int n); // descending

/// Radial level tracing about the field's anchor: one boundary point per
/// direction with |f - r| <= 1e-10 * max(1, r).
std::vector<Vec2> trace_level(const zoo::ScalarField& f, double r, int N);
Vec2 trace_level_point(const zoo::ScalarField& f, double r, double angle);

LevelProfile slope_profile(const zoo::ScalarField& f, const std::vector<double>& rgrid, int N);

enum class TailModel { Auto, Power, LogPower, None };

/// Fill ubar and phi. The tail below the smallest grid level is an analytic
/// fit (power or log-power in r, chosen by least residual); a non-integrable
/// fit sets divergent_tail and leaves phi relative to the smallest level.
void build_phi(LevelProfile& p, TailModel model = TailModel::Auto);

/// phi as a callable desingularization candidate (piecewise quadratic, with
/// derivative ubar); valid on (0, r_max of the profile].
zoo::Desing desing_from_profile(const LevelProfile& p);

/// min over sampled points of phi'(f(x)) |grad f(x)| >= 1 - tol. Samples are
/// drawn on levels log-uniform in [lo, hi], uniformly in angle.
CheckReport check_kl(const zoo::ScalarField& f, const zoo::Desing& phi, double lo, double hi,
                     int n_samples, double tol = 1e-3, std::uint64_t seed = 42);

/// Dist([f<=r1], [f<=r2]) <= k |phi(r1) - phi(r2)| + tol over the given level
/// pairs. level_mode checks [f=r] instead and requires slope regularity.
CheckReport check_sublevel_lipschitz(const zoo::ScalarField& f, const zoo::Desing& phi,
                                     const std::vector<std::pair<double, double>>& pairs,
                                     bool level_mode = false, double k = 1.0, double tol = 1e-6,
                                     int N = 512);

/// dist(x, [f<=r]) <= k (f(x)-r)^+ + tol over the samples.
CheckReport check_error_bound(const zoo::ScalarField& f, double k, double r,
                              std::span<const Vec2> samples, double tol = 1e-6, int N = 512);

struct Talweg {
    std::vector<Vec2> points;
    double length = 0.0;
    CheckReport report;
};

/// Selection through the R-valleys of the level grid, nearest point to the
/// previous pick; PASS iff the length is stable (< 1%) under 2x grid
/// refinement.
Talweg extract_talweg(const zoo::ScalarField& f, double R, const std::vector<double>& rgrid,
                      int N);

/// phi(r) = integral_0^r (-log s)^(-1/alpha) / s ds for alpha in (0,1) via
/// adaptive quadrature plus the analytic deep-tail term; DIVERGENT for
/// alpha >= 1.
zoo::Desing growth_phi(double alpha, double rho);

enum class Integrability { Convergent, Divergent, Inconclusive };

inline const char* to_string(Integrability v) {
    switch (v) {
        case Integrability::Convergent: return "CONVERGENT";
        case Integrability::Divergent: return "DIVERGENT";
        case Integrability::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

/// Dyadic-octave test of integrability of u near 0: contributions per octave
/// must decay with ratio < 0.95 over the last ten octaves (CONVERGENT) or be
/// non-decreasing over the last ten (DIVERGENT).
Integrability integrability_test(std::span<const double> u, std::span<const double> r);

std::string profile_csv(const LevelProfile& p);

} // namespace kl::analysis
