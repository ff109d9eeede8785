#pragma once

#include <limits>
#include <string>
#include <vector>

#include "kl/geometry.hpp"
#include "kl/vec2.hpp"
#include "kl/zoo.hpp"

namespace kl::cex {

/// Nested convex bodies T_0 (unit disk) > T_1 > ... built from rings C_{n,m}:
/// generation n >= 3 carries stages m = 1..n (polygon-arc rings of radius
/// mu_n^m R_n, mu_n = 1 - 1/n^3) and the closing circle of radius
/// R_{n+1} = mu_n^{n+1} R_n cos(pi/n) as stage m = n+1. Bodies are ordered
/// lexicographically in (n, m).
struct RingParams {
    int n;            // generation (2 for T_0)
    int m;            // stage within the generation
    double mu;        // 1 - 1/n^3
    double gen_radius; // R_n
    double rho;       // circumradius of the body
    bool is_disk;     // stage n+1 (and T_0)
};

struct NestedBodies {
    std::vector<geom::ConvexBody> body;
    std::vector<RingParams> param;
    std::vector<double> gen_radius; // R_n for n = 3..n_max+1, gen_radius[n-3]
    double limit_radius = 0.0;      // r = lim R_n
    int n_max = 0;

    int count() const { return static_cast<int>(body.size()); }
    /// Index of hull(C_{n,m}); T_0 is hull(C_{2,3}).
    int index_of(int n, int m) const;
    int generation_of(int k) const { return param[k].n; }
};

/// Build all bodies through generation n_max (4 <= n_max <= 200); the limit
/// radius is R_{n_max+1} adjusted by the analytic tail product.
NestedBodies build_rings(int n_max);

/// Closed-form per-generation distance sum
///   sum_{m=1}^{n+1} mu_n^{m-1} R_n (1 - mu_n cos(pi/n)),
/// written as R_n (1 - mu cos(pi/n)) (1 - mu^{n+1}) / (1 - mu).
double generation_sum_formula(int n, double R_n);

/// R_n for n >= 3 by direct recursion from R_3 = 1.
double generation_radius(int n);

/// Dist(C_{n,1},C_{n-1,n}) + sum_{m=2}^{n+1} Dist(C_{n,m},C_{n,m-1}) computed
/// with hausdorff_dist on the built bodies.
double generation_dist_sum(const NestedBodies& nb, int n, int N = 2048);

/// K_k = max_u (sigma_{k-1}(u) - sigma_k(u)) / (sigma_k(u) - sigma_{k+1}(u))
/// over the refined unit-direction grid; DEGENERATE if a denominator is
/// below 1e-14.
double torralba_K(const NestedBodies& nb, int k, int N = 2048);

/// Level values lambda_k with K_k (lambda_k - lambda_{k+1}) = (lambda_{k-1} -
/// lambda_k)/2. Gaps collapse by roughly two orders of magnitude per body, so
/// levels are kept as logarithmic offsets from lambda_inf; the plain double
/// lambda[] ties at lambda_inf beyond the first handful of bodies.
struct PrescribedLevels {
    double lambda0 = 1.0;
    double lambda1 = 0.5;
    double lambda_inf = 0.0;
    std::vector<double> K;         // K[k] for k = 1..B-2 (K[0] unused)
    std::vector<double> lambda;    // lambda[k], k = 0..B-1 (double, collapses)
    std::vector<double> log_gap;   // ln(lambda_k - lambda_{k+1}), k = 0..B-2
    std::vector<double> log_delta; // ln(lambda_k - lambda_inf),  k = 0..B-1
    int count() const { return static_cast<int>(lambda.size()); }
};

PrescribedLevels assign_levels(const NestedBodies& nb, double lambda0 = 1.0,
                               double lambda1 = 0.5, int N = 2048);

struct Construction {
    NestedBodies bodies;
    PrescribedLevels levels;
};

Construction build_construction(int n_max, double lambda0 = 1.0, double lambda1 = 0.5,
                                int N = 2048);

/// Result of evaluating the reconstructed convex function at a point.
/// bracket: -1        above lambda0 (affine extension f = lambda0 + dist(.,T_0))
///          0..B-2    between T_bracket and T_{bracket+1}
///          B-1       between the innermost built body and the limit disk
///          INT_MAX   inside the limit disk (f = lambda_inf)
struct CexValue {
    double log_delta; // ln(f(x) - lambda_inf), -inf at the minimum
    int bracket;
    double theta;     // maximizing direction angle
};

constexpr int kAtMin = std::numeric_limits<int>::max();

/// refine_iters controls the golden-section polish of the maximizing
/// direction; bisection probes that only need the value can set it low.
CexValue eval_cex(const Construction& c, Vec2 x, int M = 1024, int refine_iters = 80);
double eval_cex_value(const Construction& c, Vec2 x, int M = 1024);

struct CexGrad {
    double log_mag;
    UnitDir dir;
    Vec2 vec() const { return std::exp(log_mag) * dir.u; }
};

/// Minimal-norm subgradient; throws UNDEFINED_AT_MIN inside the limit disk.
CexGrad grad_cex_detail(const Construction& c, Vec2 x, int M = 1024);
Vec2 grad_cex(const Construction& c, Vec2 x, int M = 1024);

/// Gradient derived from an already computed evaluation (no direction sweep).
CexGrad grad_from_value(const Construction& c, const CexValue& val);

/// ln of max |grad f| over the level band (lambda_{k+1}, lambda_k], sampled at
/// blend points over a theta grid with one refinement. Stays meaningful far
/// below double range of the gradient itself.
double band_grad_log_max(const Construction& c, int k, int theta_grid = 128, int M = 512);

struct WitnessRow {
    int k;
    double dist;    // Dist(T_k, T_{k+1})
    double partial; // sum of dist over 0..k
};

/// Partial Hausdorff sums S_K = sum_{k<K} Dist(T_k, T_{k+1}); RANGE if K
/// exceeds the built range.
std::vector<WitnessRow> kl_failure_witness(const NestedBodies& nb, int K, int N = 2048);

void save_construction(const std::string& path, const Construction& c);
Construction load_construction(const std::string& path);

/// Exact sublevel body [f <= level] as a Minkowski blend of the bracketing
/// T_k per the support interpolation; level must lie in (lambda_inf, lambda0].
geom::ConvexBody body_at_level(const Construction& c, double level);

zoo::FieldPtr make_cex_field(Construction c, int eval_dirs = 512);

/// The construction behind a field created by make_cex_field, else nullptr.
const Construction* try_get_construction(const zoo::ScalarField& f);

} // namespace kl::cex
