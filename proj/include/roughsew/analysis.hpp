#pragma once

#include "roughsew/driver.hpp"
#include "roughsew/flows.hpp"
#include "roughsew/sewing.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace roughsew {

enum class PerturbationClass { plain, lipschitz };

// epsilon_{t,s}(a) = eval(s, t, a); must vanish on the diagonal.
struct PerturbationFamily {
    std::size_t dim = 0;
    double horizon = 1.0;
    std::string name;
    PerturbationClass claimed = PerturbationClass::plain;
    std::function<Vector(double, double, const Vector&)> eval;
};

// Wraps a difference family such as bailleul_remainder.
PerturbationFamily perturbation_from_family(const FlowFamily& eps, PerturbationClass claimed);

// epsilon_{t,s}(a) = varpi(omega_{s,t}) u.
PerturbationFamily constant_perturbation(const Vector& u, const Remainder& varpi, const Control& omega, double horizon);

// epsilon_{t,s}(a) = scale(omega_{s,t}) g(a).
PerturbationFamily field_perturbation(std::function<Vector(const Vector&)> g, std::function<double(double)> scale,
                                      const Control& omega, std::size_t dim, double horizon);

// sup |y_t - phi_{t,s}(y_s)| / varpi(omega_{s,t}) over sampled pairs of trajectory times.
DefectReport davie_solution_check(const SolutionPath& y, const FlowFamily& phi, const Remainder& varpi,
                                  const Control& omega, std::size_t max_pairs = 4096, std::uint64_t seed = 1);

struct Certification {
    std::vector<int> levels;
    std::vector<double> constants;
    double drift = 0.0;
    bool certified = false;
};

// davie_solution_check on the sewn trajectory from a at levels k, k+1, k+2;
// certified when the constants are finite and drift by at most max_drift.
Certification certify_davie_solution(const FlowFamily& phi, const Vector& a, int level, const Remainder& varpi,
                                     const Control& omega, double max_drift = 0.1, std::size_t max_pairs = 4096,
                                     std::uint64_t seed = 1);

// Same check on a supplied trajectory builder, for paths not produced by sewing.
Certification certify_path(const std::function<SolutionPath(int)>& trajectory, const FlowFamily& phi,
                           std::span<const int> levels, const Remainder& varpi, const Control& omega,
                           double max_drift = 0.1, std::size_t max_pairs = 4096, std::uint64_t seed = 1);

struct CompareReport {
    double distance = 0.0;      // sup_t |y_t - z_t|
    double eps1 = 0.0;          // sup |alpha_{t,s,r}(z_r)| / varpi(omega_{r,t})
    double eps2 = 0.0;          // sampled Lipschitz constant of alpha_{t,s}
    double eps3 = 0.0;          // sup |alpha_{t,s}(z_s)|
    double initial_gap = 0.0;   // |a - b|
    double bound_sum = 0.0;     // eps1 + eps2 + eps3 + |a - b|
    double fitted_C = 0.0;      // distance / bound_sum, 0 when bound_sum = 0
    int level = 0;
};

// y sewn from (phi, a) and z from (zeta, b) on pi_level; alpha = zeta - phi.
CompareReport solution_compare(const FlowFamily& phi, const FlowFamily& zeta, const Vector& a, const Vector& b,
                               int level, const Remainder& varpi, const Control& omega, const SampleSpec& spec);

FlowFamily apply_perturbation(const FlowFamily& phi, const PerturbationFamily& eps);

struct PerturbationReport {
    double diagonal = 0.0;     // sup |epsilon_{t,t}(a)|
    DefectReport plain;        // sup |epsilon_{t,s}(a)| / varpi
    DefectReport lipschitz;    // sup |epsilon(a) - epsilon(b)| / (|a - b| varpi)
};

PerturbationReport perturbation_check(const PerturbationFamily& eps, std::span<const double> grid,
                                      const SampleSpec& spec, const Remainder& varpi, const Control& omega);

struct InvertResult {
    Vector point;
    int iterations = 0;
    double contraction = 0.0;  // sampled Lipschitz constant of phi_{t,s} - id on the ball
    double residual = 0.0;     // |phi_{t,s}(a) - b|
};

// Solves phi_{t,s}(a) = b by a <- b - chi(a), chi = phi_{t,s} - id, from a = b.
// The iterates must stay in the ball |a - b| <= radius, where radius defaults
// to 2 |chi(b)| plus a rounding margin. Throws HypothesisError when the sampled
// Lipschitz constant of chi on the ball is >= 1 or the iterates leave it, and
// ConvergenceError after max_iter iterations.
InvertResult invert_step(const FlowFamily& phi, double s, double t, const Vector& b, double tol = 1e-13,
                         int max_iter = 100, double radius = -1.0, std::uint64_t seed = 1);

// Reverse family zeta_{s,t} = (phi_{t,s})^{-1}, one step at a time.
FlowFamily inverse_step_family(const FlowFamily& phi, double tol = 1e-13);

// Reverse family whose value from t back to s is the iterated product of the
// per-step inverses on the reversed dyadic partition pi_level.
FlowFamily inverse_flow(const FlowFamily& phi, int level, double tol = 1e-13);

// max over start pairs of sup_t |y_t(a) - y_t(b)| / |a - b| for trajectories sewn on pi_level.
double manifold_lipschitz_estimate(const FlowFamily& phi, const std::vector<std::pair<Vector, Vector>>& starts,
                                   int level);

}  // namespace roughsew
