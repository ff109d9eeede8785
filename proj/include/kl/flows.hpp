#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kl/vec2.hpp"
#include "kl/zoo.hpp"

namespace kl::flows {

/// Discrete record of a steepest-descent trajectory x' = -grad f(x).
/// Node speeds are |grad f(x_i)| (not finite differences); cumulative length
/// is the trapezoid of the speeds, and the energy identity
///   f(x_0) - f(x_K) = integral |x'|^2 dt
/// holds within tol_energy * (f_0 - f_K) on every accepted trajectory.
struct Trajectory {
    std::vector<double> t;
    std::vector<Vec2> x;
    std::vector<double> f;
    std::vector<double> v;
    std::vector<double> len;
    double tol_energy = 0.0;
    bool reached_stop = false;
    bool reached_critical = false;

    double length() const { return len.empty() ? 0.0 : len.back(); }
    double energy_residual() const;
};

struct FlowOptions {
    std::optional<double> horizon;    // integrate to t = T
    std::optional<double> stop_level; // or to f = r_stop (bisected in time)
    double tol = 1e-6;                // energy tolerance, in [1e-12, 1e-3]
    long max_nodes = 2000000;
};

/// Adaptive embedded Runge-Kutta with a proximal-Euler fallback when explicit
/// steps stall on nonsmooth ground. Terminates at the horizon, at the stop
/// level, or when |grad f| < 1e-10.
Trajectory integrate_flow(const zoo::ScalarField& f, Vec2 x0, const FlowOptions& opt);

double curve_length(const Trajectory& traj);

struct PiecewiseTrajectory {
    std::vector<Trajectory> segments;
    double total_length = 0.0;
};

/// Concatenation of flow arcs whose value intervals overlap in at most one
/// point; OVERLAP (with the offending pair) otherwise.
PiecewiseTrajectory compose_piecewise(std::vector<Trajectory> segments);

std::string to_csv(const Trajectory& traj);

} // namespace kl::flows
