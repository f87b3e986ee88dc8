#pragma once

#include "roughsew/algebra.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace roughsew {

// Super-additive time-scale mass omega_{s,t} >= 0 on 0 <= s <= t <= horizon.
struct Control {
    std::function<double(double, double)> omega;
    double horizon = 1.0;

    double operator()(double s, double t) const { return omega(s, t); }
};

// omega_{s,t} = c (t - s).
Control make_holder_control(double c, double horizon = 1.0);

// Power remainder varpi(delta) = delta^theta, theta > 1. It contracts under
// halving: 2 varpi(delta/2) = kappa varpi(delta) with kappa = 2^{1-theta}.
struct Remainder {
    double theta = 1.5;

    double operator()(double delta) const;
    double kappa() const;
};

// Regularity and horizon data shared by drivers, schemes and verifiers.
//
// The remainder exponent is theta = (2 + gamma) / p. delta_T is the tunable
// delta_scale * T^{min(gamma,1)/p}; eta(x) = delta_T x^{theta (1 - gamma)} is
// the largest eta compatible with eta(omega) varpi(omega)^gamma <= delta_T varpi(omega).
struct SewingParameters {
    double p = 2.0;
    double gamma = 1.0;
    double horizon = 1.0;
    double delta_scale = 1.0;

    double theta() const { return (2.0 + gamma) / p; }
    Remainder remainder() const { return Remainder{theta()}; }
    double delta_T() const;
    double eta(double x) const;

    // kappa (1 + delta_T)^2 + delta_T; the Davie recursion closes when < 1.
    double horizon_criterion() const;
    bool horizon_small_enough() const { return horizon_criterion() < 1.0; }

    // Throws StructuralError unless p in [2,3), gamma in (0,1], theta > 1, T > 0.
    void validate() const;
};

// A continuous, piecewise-C^1 path in R^dim on [0, horizon]. The velocity is
// optional; it is only needed for ODE reference solutions.
struct SmoothPath {
    std::size_t dim = 0;
    std::function<Vector(double)> position;
    std::function<Vector(double)> velocity;
    std::string name;
    std::vector<double> breakpoints;  // kinks, for piecewise-linear paths
};

SmoothPath circle_path(double radius = 1.0, double frequency = 1.0);
SmoothPath line_path(const Vector& velocity);
// x_k(t) = sin((k+1) t + k) / (k+1), k = 0..dim-1.
SmoothPath lissajous_path(std::size_t dim);
// Vertices visited at uniform times on [0, horizon].
SmoothPath polyline_path(std::vector<Vector> vertices, double horizon);

// Two-parameter family of depth-2 (or depth-3 for bounded-variation lifts)
// signatures together with its regularity data.
struct RoughDriver {
    std::size_t dim = 0;
    int depth = 2;
    SewingParameters params;
    Control control;
    std::string kind;
    std::function<TensorSeries(double, double)> increment;

    std::optional<SmoothPath> path;  // smooth and piecewise-linear drivers
    std::optional<Matrix> area;      // pure-area drivers

    TensorSeries operator()(double s, double t) const { return increment(s, t); }
    double horizon() const { return params.horizon; }
};

struct SmoothLiftOptions {
    int base_level = 12;         // 2^base_level cached dyadic cells on [0, T]
    int substeps_per_cell = 16;  // polyline resolution inside a cell
    int depth = 2;
};

// Lift of a smooth path. Each increment is the signature of the polyline
// through path(s), the fine nodes strictly inside (s, t), and path(t); on
// every segment the level-2 integrand is taken at its midpoint. Signatures of
// whole dyadic cells are cached in a tree built at construction, and coarse
// increments are Chen products of cached nodes, so Chen's relation holds up to
// rounding on the fine grid. Throws StructuralError if substeps < 1.
RoughDriver lift_smooth(const SmoothPath& path, const SewingParameters& params, const Control& control,
                        const SmoothLiftOptions& options = {});

// x^(1)_{s,t} = 0, x^(2)_{s,t} = (t - s) A for antisymmetric A.
RoughDriver pure_area_driver(const Matrix& area, const SewingParameters& params, const Control& control);

// Exact signatures of the polyline visiting `vertices` at uniform times.
RoughDriver piecewise_linear_driver(std::vector<Vector> vertices, const SewingParameters& params,
                                    const Control& control, int depth = 2);

// sup_k sup_{s<t in grid} |x^(k)_{s,t}|_max / omega_{s,t}^{k/p}.
double p_norm_estimate(const RoughDriver& driver, std::span<const double> grid);

struct ChenReport {
    double max_defect = 0.0;
    std::array<double, 3> worst{};  // (r, s, t)
    bool passed = true;
};

// max |x_{r,s} (x) x_{s,t} - x_{r,t}| over sampled grid triples.
ChenReport check_chen(const RoughDriver& driver, std::span<const double> grid, double tol,
                      std::size_t max_triples = 4096, std::uint64_t seed = 1);

// max weak-geometric defect over sampled grid pairs.
double check_weak_geometric(const RoughDriver& driver, std::span<const double> grid,
                            std::size_t max_pairs = 4096, std::uint64_t seed = 1);

// Sampled super-additivity violation max(omega_{r,s} + omega_{s,t} - omega_{r,t}, 0).
double control_superadditivity_defect(const Control& control, std::size_t triples, std::uint64_t seed);

// Uniform grid of n+1 times on [0, T].
std::vector<double> uniform_grid(double horizon, std::size_t intervals);

}  // namespace roughsew
