#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kl/analysis.hpp"
#include "kl/vec2.hpp"
#include "kl/zoo.hpp"

namespace kl::alg {

/// prox_lambda(x) = argmin_y f(y) + |y-x|^2 / (2 lambda), lambda < 1/alpha.
/// Inner solver: steepest descent on the (strongly convex) subproblem with an
/// exact golden-section line search; stops when the subproblem gradient norm
/// falls below tol or the displacement underflows at a nonsmooth minimizer.
Vec2 prox(const zoo::ScalarField& f, double lambda, Vec2 x, double tol = 1e-10);

struct IterateRun {
    std::vector<Vec2> y;
    std::vector<double> f;
    std::vector<double> step;    // lambda_k or t_k
    std::vector<double> disp;    // |y_{k+1} - y_k|
    std::vector<double> cumlen;
    std::vector<double> cert;    // per-step certificate margin (nan without phi)
};

std::string run_csv(const IterateRun& run);

struct ProxRunResult {
    IterateRun run;
    analysis::CheckReport certificate;
    double limit_value = 0.0;      // estimated lim f(Y_k)
    Vec2 limit_point{0, 0};        // estimated strong limit
};

/// Proximal point iterations with the a posteriori certificates
///   |Y_{k+1} - Y_k|  <= phi(f_k - L) - phi(f_{k+1} - L)
///   |Y_inf  - Y_k|   <= phi(f_k - L)
/// where L is the run's limit value, estimated by a geometric tail on the
/// last value gaps. A violated certificate yields a FAIL report whose witness
/// carries the step index (CERT_FAIL).
ProxRunResult proximal_run(const zoo::ScalarField& f, Vec2 x0,
                           const std::vector<double>& lambdas, const zoo::Desing* phi, int K,
                           double tol = 1e-9);

struct GradientRule {
    std::optional<double> fixed_t; // t <= 1/L
    bool backtracking = false;     // halve from 1/L until the descent lemma holds
};

struct GradRunResult {
    IterateRun run;
    analysis::CheckReport certificate; // cumulative length vs (phi(f_0)-phi(f_K))/beta
};

/// Explicit gradient iterations Y_{k+1} = Y_k - t grad f(Y_k), checked
/// against beta |grad f(Y_k)| |Y_{k+1} - Y_k| <= f(Y_k) - f(Y_{k+1}) at every
/// step (DESCENT_VIOLATION with the step index otherwise).
GradRunResult gradient_run(const zoo::ScalarField& f, Vec2 x0, const GradientRule& rule,
                           double beta, const zoo::Desing* phi, int K);

/// Descent lemma and the two one-step estimates
///   (1 - Lt/2) |x+ - x| |grad f(x)| <= f(x) - f(x+)
///   |grad f(x+)| <= (Lt + 1) |grad f(x)|
/// at all (x, t) samples, within tol.
analysis::CheckReport step_estimates_check(const zoo::ScalarField& f, double L,
                                           std::span<const Vec2> xs, std::span<const double> ts,
                                           double tol = 1e-9);

} // namespace kl::alg
