#include "roughsew/analysis.hpp"

#include "roughsew/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace roughsew {

PerturbationFamily perturbation_from_family(const FlowFamily& eps, PerturbationClass claimed) {
    PerturbationFamily p;
    p.dim = eps.dim;
    p.horizon = eps.horizon;
    p.name = eps.name;
    p.claimed = claimed;
    p.eval = [eps](double from, double to, const Vector& a) -> Vector {
        if (from == to) return Vector::Zero(a.size());
        return eps.step(from, to, a);
    };
    return p;
}

PerturbationFamily constant_perturbation(const Vector& u, const Remainder& varpi, const Control& omega, double horizon) {
    PerturbationFamily p;
    p.dim = static_cast<std::size_t>(u.size());
    p.horizon = horizon;
    p.name = "constant";
    p.claimed = PerturbationClass::lipschitz;
    p.eval = [u, varpi, omega](double from, double to, const Vector&) -> Vector {
        return varpi(omega(std::min(from, to), std::max(from, to))) * u;
    };
    return p;
}

PerturbationFamily field_perturbation(std::function<Vector(const Vector&)> g, std::function<double(double)> scale,
                                      const Control& omega, std::size_t dim, double horizon) {
    PerturbationFamily p;
    p.dim = dim;
    p.horizon = horizon;
    p.name = "field";
    p.claimed = PerturbationClass::lipschitz;
    p.eval = [g = std::move(g), scale = std::move(scale), omega](double from, double to, const Vector& a) -> Vector {
        if (from == to) return Vector::Zero(a.size());
        return scale(omega(std::min(from, to), std::max(from, to))) * g(a);
    };
    return p;
}

DefectReport davie_solution_check(const SolutionPath& y, const FlowFamily& phi, const Remainder& varpi,
                                  const Control& omega, std::size_t max_pairs, std::uint64_t seed) {
    if (y.times.size() != y.values.size() || y.times.size() < 2)
        throw StructuralError("davie_solution_check: malformed trajectory");
    DefectReport rep;
    rep.quantity = "davie_solution_C";
    rep.spec.max_pairs = max_pairs;
    rep.spec.seed = seed;
    for (const auto& [i, j] : sample_pairs(y.times.size(), max_pairs, seed)) {
        const double s = y.times[i], t = y.times[j];
        const double ratio = (y.values[j] - phi(s, t, y.values[i])).norm() / varpi(omega(s, t));
        ++rep.samples;
        if (ratio > rep.value || rep.times.empty()) {
            rep.value = std::max(rep.value, ratio);
            rep.times = {s, t};
            rep.point = y.values[i];
        }
    }
    return rep;
}

Certification certify_path(const std::function<SolutionPath(int)>& trajectory, const FlowFamily& phi,
                           std::span<const int> levels, const Remainder& varpi, const Control& omega,
                           double max_drift, std::size_t max_pairs, std::uint64_t seed) {
    Certification c;
    bool finite = true;
    for (int k : levels) {
        const double v = davie_solution_check(trajectory(k), phi, varpi, omega, max_pairs, seed).value;
        c.levels.push_back(k);
        c.constants.push_back(v);
        finite = finite && std::isfinite(v);
    }
    c.drift = relative_drift(c.constants);
    c.certified = finite && c.drift <= max_drift;
    return c;
}

Certification certify_davie_solution(const FlowFamily& phi, const Vector& a, int level, const Remainder& varpi,
                                     const Control& omega, double max_drift, std::size_t max_pairs,
                                     std::uint64_t seed) {
    const std::array<int, 3> levels{level, level + 1, level + 2};
    return certify_path([&](int k) { return sew_trajectory(phi, a, k); }, phi, levels, varpi, omega, max_drift,
                        max_pairs, seed);
}

CompareReport solution_compare(const FlowFamily& phi, const FlowFamily& zeta, const Vector& a, const Vector& b,
                               int level, const Remainder& varpi, const Control& omega, const SampleSpec& spec) {
    CompareReport rep;
    rep.level = level;
    const SolutionPath y = sew_trajectory(phi, a, level);
    const SolutionPath z = sew_trajectory(zeta, b, level);
    for (std::size_t k = 0; k < y.times.size(); ++k) rep.distance = std::max(rep.distance, (y.values[k] - z.values[k]).norm());
    rep.initial_gap = (a - b).norm();

    const auto& t = z.times;
    auto alpha = [&](double from, double to, const Vector& x) -> Vector { return zeta(from, to, x) - phi(from, to, x); };
    for (const auto& tr : sample_triples(t.size(), spec.max_triples, spec.seed)) {
        const double r = t[tr[0]], s = t[tr[1]], u = t[tr[2]];
        const Vector& zr = z.values[tr[0]];
        const Vector zd = zeta(s, u, zeta(r, s, zr)) - zeta(r, u, zr);
        const Vector pd = phi(s, u, phi(r, s, zr)) - phi(r, u, zr);
        rep.eps1 = std::max(rep.eps1, (zd - pd).norm() / varpi(omega(r, u)));
    }
    const auto pts = sample_points(spec.box, 2 * spec.points, spec.seed);
    for (const auto& [i, j] : sample_pairs(t.size(), spec.max_pairs, spec.seed)) {
        rep.eps3 = std::max(rep.eps3, alpha(t[i], t[j], z.values[i]).norm());
        for (std::size_t k = 0; k + 1 < pts.size(); k += 2) {
            const double den = (pts[k] - pts[k + 1]).norm();
            if (den == 0.0) continue;
            rep.eps2 = std::max(rep.eps2, (alpha(t[i], t[j], pts[k]) - alpha(t[i], t[j], pts[k + 1])).norm() / den);
        }
    }
    rep.bound_sum = rep.eps1 + rep.eps2 + rep.eps3 + rep.initial_gap;
    rep.fitted_C = rep.bound_sum > 0.0 ? rep.distance / rep.bound_sum : 0.0;
    return rep;
}

FlowFamily apply_perturbation(const FlowFamily& phi, const PerturbationFamily& eps) {
    if (eps.dim != phi.dim) throw StructuralError("apply_perturbation: dimension mismatch");
    FlowFamily out = phi;
    out.name = phi.name + "+" + eps.name;
    out.step = [phi, e = eps.eval](double from, double to, const Vector& a) -> Vector {
        return phi(from, to, a) + e(from, to, a);
    };
    return out;
}

PerturbationReport perturbation_check(const PerturbationFamily& eps, std::span<const double> grid,
                                      const SampleSpec& spec, const Remainder& varpi, const Control& omega) {
    PerturbationReport rep;
    rep.plain.quantity = "perturbation_plain";
    rep.lipschitz.quantity = "perturbation_lipschitz";
    rep.plain.spec = rep.lipschitz.spec = spec;
    const auto pts = sample_points(spec.box, 2 * spec.points, spec.seed);
    for (double t : grid)
        for (const auto& a : pts) rep.diagonal = std::max(rep.diagonal, eps.eval(t, t, a).norm());
    for (const auto& [i, j] : sample_pairs(grid.size(), spec.max_pairs, spec.seed)) {
        const double s = grid[i], t = grid[j];
        const double scale = varpi(omega(s, t));
        for (std::size_t k = 0; k + 1 < pts.size(); k += 2) {
            const Vector ea = eps.eval(s, t, pts[k]);
            const Vector eb = eps.eval(s, t, pts[k + 1]);
            const double plain = ea.norm() / scale;
            const double lip = (ea - eb).norm() / ((pts[k] - pts[k + 1]).norm() * scale);
            ++rep.plain.samples;
            ++rep.lipschitz.samples;
            if (plain > rep.plain.value) rep.plain.value = plain, rep.plain.times = {s, t}, rep.plain.point = pts[k];
            if (lip > rep.lipschitz.value)
                rep.lipschitz.value = lip, rep.lipschitz.times = {s, t}, rep.lipschitz.point = pts[k];
        }
    }
    return rep;
}

InvertResult invert_step(const FlowFamily& phi, double s, double t, const Vector& b, double tol, int max_iter,
                         double radius, std::uint64_t seed) {
    InvertResult out;
    if (s == t) {
        out.point = b;
        return out;
    }
    auto chi = [&](const Vector& x) -> Vector { return phi(s, t, x) - x; };
    const double margin = 1e-12 * (1.0 + b.norm());
    if (radius < 0.0) radius = 2.0 * chi(b).norm() + margin;
    const auto dim = static_cast<std::size_t>(b.size());

    Rng rng(seed);
    for (int k = 0; k < 8; ++k) {
        const Vector x = b + rng.vector(dim, -radius, radius) / std::sqrt(static_cast<double>(dim));
        const Vector y = b + rng.vector(dim, -radius, radius) / std::sqrt(static_cast<double>(dim));
        const double den = (x - y).norm();
        if (den == 0.0) continue;
        out.contraction = std::max(out.contraction, (chi(x) - chi(y)).norm() / den);
    }
    if (!(out.contraction < 1.0))
        throw HypothesisError("invert_step: phi - id is not a contraction (Lipschitz estimate " +
                              std::to_string(out.contraction) + "); shrink the horizon");

    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + b.norm());
    Vector a = b;
    for (int k = 1; k <= max_iter; ++k) {
        Vector next = b - chi(a);
        const double step = (next - a).norm();
        a = std::move(next);
        out.iterations = k;
        if ((a - b).norm() > radius + margin)
            throw HypothesisError("invert_step: iterates left the ball of radius " + std::to_string(radius));
        if (step < tol || step <= floor) {
            out.point = a;
            out.residual = (phi(s, t, a) - b).norm();
            return out;
        }
    }
    throw ConvergenceError("invert_step: no convergence after " + std::to_string(max_iter) + " iterations");
}

FlowFamily inverse_step_family(const FlowFamily& phi, double tol) {
    FlowFamily z;
    z.dim = phi.dim;
    z.horizon = phi.horizon;
    z.name = phi.name + "^-1";
    z.orientation = Orientation::reverse;
    z.step = [phi, tol](double from, double to, const Vector& b) -> Vector {
        if (from < to) throw StructuralError("inverse family: reverse orientation requires from >= to");
        return invert_step(phi, to, from, b, tol).point;
    };
    return z;
}

FlowFamily inverse_flow(const FlowFamily& phi, int level, double tol) {
    const FlowFamily steps = inverse_step_family(phi, tol);
    const Partition pi = Partition::dyadic(phi.horizon, level);
    FlowFamily z = steps;
    z.name = phi.name + "^-1 (level " + std::to_string(level) + ")";
    z.step = [steps, pi](double from, double to, const Vector& b) -> Vector {
        if (from < to) throw StructuralError("inverse flow: reverse orientation requires from >= to");
        return iterated_product(steps, pi, from, to, b);
    };
    return z;
}

double manifold_lipschitz_estimate(const FlowFamily& phi, const std::vector<std::pair<Vector, Vector>>& starts,
                                   int level) {
    double worst = 0.0;
    for (const auto& [a, b] : starts) {
        const double den = (a - b).norm();
        if (den == 0.0) continue;
        const auto ya = sew_trajectory(phi, a, level);
        const auto yb = sew_trajectory(phi, b, level);
        double sup = 0.0;
        for (std::size_t k = 0; k < ya.values.size(); ++k) sup = std::max(sup, (ya.values[k] - yb.values[k]).norm());
        worst = std::max(worst, sup / den);
    }
    return worst;
}

}  // namespace roughsew
