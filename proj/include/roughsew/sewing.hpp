#pragma once

#include "roughsew/driver.hpp"
#include "roughsew/errors.hpp"
#include "roughsew/flows.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace roughsew {

enum class SewStatus { converged, max_level_reached, non_cauchy };

std::string to_string(SewStatus s);

struct SewResult {
    Vector value;
    int level = 0;
    // increments[k] = |phi^{pi_{k+1}} - phi^{pi_k}| for consecutive evaluated levels.
    std::vector<double> increments;
    SewStatus status = SewStatus::converged;
};

// Iterated products of phi on the dyadic partitions pi_k of [0, T], k = 1, 2, ...,
// until two consecutive levels differ by less than tol or max_level is reached.
// A trace whose last increments grow is reported as non_cauchy.
SewResult sew(const FlowFamily& phi, double from, double to, const Vector& a, int max_level, double tol);

// Trajectory of the iterated product from time 0 along pi_level: y at every grid time.
struct SolutionPath {
    double start = 0.0;
    Vector initial;
    std::vector<double> times;
    std::vector<Vector> values;
    std::string scheme;
};

SolutionPath sew_trajectory(const FlowFamily& phi, const Vector& a, int level);

struct LevelRecord {
    int level = 0;
    double mesh = 0.0;
    double error = 0.0;
    double runtime_ms = 0.0;
    double cauchy_increment = 0.0;  // sup over probes of |phi^{pi_k} - phi^{pi_{k-1}}|; 0 at the first level
};

struct RateInfo {
    double value = 0.0;
    bool degenerate = false;  // n + gamma <= p
};

// (n + gamma) / p - 1.
RateInfo theoretical_rate(int n, double gamma, double p);

struct FitResult {
    std::optional<double> slope;
    std::size_t used_levels = 0;
};

// Least-squares slope of log(error) against log(mesh), ignoring errors below
// `floor`; empty when fewer than three levels remain.
FitResult fit_order(const std::vector<LevelRecord>& records, double floor = 1e-11);

struct ConvergenceReport {
    std::string scheme;
    std::string reference;
    int order = 2;
    std::vector<LevelRecord> records;
    FitResult fit;
    RateInfo theoretical;
    std::vector<Vector> probes;
    std::uint64_t seed = 0;
    double horizon = 1.0;

    // Fitted order >= theoretical - 0.2.
    bool meets_theory() const;
    // Largest ratio of successive Cauchy increments from `after` on.
    double cauchy_ratio(int after) const;
};

// Errors sup_probe |phi^{pi_k}_{T,0}(a) - reference(a)| for the requested levels.
// `order` is the scheme order n used for the theoretical rate.
ConvergenceReport convergence_study(const FlowFamily& phi, const std::function<Vector(const Vector&)>& reference,
                                    const std::vector<Vector>& probes, const std::vector<int>& levels,
                                    const SewingParameters& params, int order, bool timing = true);

// Reference at level max + 2 of the same family.
std::function<Vector(const Vector&)> self_reference(const FlowFamily& phi, int level);

// Davie constants, for double or exact rational T.
//   discrete:   A = [D (1 + alpha)(1 + alpha)^2 + B (2 + alpha)] / [1 - (kappa (1 + alpha)^2 + alpha)]
//   continuous: A = B (2 + alpha) / [1 - (kappa (1 + alpha)^2 + alpha)]
// Throws HypothesisError when the denominator is not positive.
template <class T>
T davie_denominator(const T& alpha, const T& kappa) {
    const T one(1);
    return one - (kappa * (one + alpha) * (one + alpha) + alpha);
}

template <class T>
T davie_constant_discrete(const T& D, const T& B, const T& alpha, const T& kappa) {
    const T den = davie_denominator(alpha, kappa);
    if (!(den > T(0))) throw HypothesisError("Davie constant: kappa (1 + alpha)^2 + alpha >= 1, horizon too large");
    const T one(1), two(2);
    return (D * (one + alpha) * (one + alpha) * (one + alpha) + B * (two + alpha)) / den;
}

template <class T>
T davie_constant_continuous(const T& B, const T& alpha, const T& kappa) {
    const T den = davie_denominator(alpha, kappa);
    if (!(den > T(0))) throw HypothesisError("Davie constant: kappa (1 + alpha)^2 + alpha >= 1, horizon too large");
    return B * (T(2) + alpha) / den;
}

struct DavieVerification {
    bool preconditions = true;
    bool holds = true;
    double A = 0.0;
    std::string failure;  // which precondition failed, if any
    std::size_t worst_r = 0, worst_t = 0;
    double worst_ratio = 0.0;  // max U_{r,t} / varpi(omega_{r,t})
};

// Checks the hypotheses of the discrete Davie lemma on a table U(i, j), i <= j,
// indexed by partition points, then whether U_{r,t} <= A varpi(omega_{r,t}) for every pair.
DavieVerification davie_recursion_verify(const Matrix& U, std::span<const double> times, double D, double B,
                                         double alpha, double kappa, const Remainder& varpi, const Control& omega,
                                         double tol = 1e-12);

}  // namespace roughsew
