#include "roughsew/sewing.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace roughsew {

std::string to_string(SewStatus s) {
    switch (s) {
        case SewStatus::converged: return "converged";
        case SewStatus::max_level_reached: return "max_level_reached";
        case SewStatus::non_cauchy: return "non_cauchy";
    }
    return "unknown";
}

SewResult sew(const FlowFamily& phi, double from, double to, const Vector& a, int max_level, double tol) {
    if (max_level < 2) throw StructuralError("sew: max_level must be >= 2");
    SewResult out;
    out.value = iterated_product(phi, Partition::dyadic(phi.horizon, 0), from, to, a);
    for (int k = 1; k <= max_level; ++k) {
        Vector next = iterated_product(phi, Partition::dyadic(phi.horizon, k), from, to, a);
        const double inc = (next - out.value).norm();
        out.value = std::move(next);
        out.level = k;
        out.increments.push_back(inc);
        if (!std::isfinite(inc)) {
            out.status = SewStatus::non_cauchy;
            return out;
        }
        if (inc < tol) {
            out.status = SewStatus::converged;
            return out;
        }
    }
    const auto& inc = out.increments;
    const std::size_t n = inc.size();
    out.status = (n >= 2 && inc[n - 1] >= inc[n - 2]) ? SewStatus::non_cauchy : SewStatus::max_level_reached;
    return out;
}

SolutionPath sew_trajectory(const FlowFamily& phi, const Vector& a, int level) {
    const Partition pi = Partition::dyadic(phi.horizon, level);
    SolutionPath y;
    y.start = 0.0;
    y.initial = a;
    y.scheme = phi.name;
    const auto t = pi.times();
    y.times.assign(t.begin(), t.end());
    y.values.reserve(t.size());
    y.values.push_back(a);
    for (std::size_t k = 1; k < t.size(); ++k) y.values.push_back(phi(t[k - 1], t[k], y.values.back()));
    return y;
}

RateInfo theoretical_rate(int n, double gamma, double p) {
    RateInfo r;
    r.value = (static_cast<double>(n) + gamma) / p - 1.0;
    r.degenerate = !(r.value > 0.0);
    return r;
}

FitResult fit_order(const std::vector<LevelRecord>& records, double floor) {
    std::vector<double> xs, ys;
    for (const auto& r : records) {
        if (!(r.error >= floor) || !(r.mesh > 0.0) || !std::isfinite(r.error)) continue;
        xs.push_back(std::log(r.mesh));
        ys.push_back(std::log(r.error));
    }
    FitResult fit;
    fit.used_levels = xs.size();
    if (xs.size() < 3) return fit;
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx > 0.0) fit.slope = sxy / sxx;
    return fit;
}

bool ConvergenceReport::meets_theory() const { return fit.slope && *fit.slope >= theoretical.value - 0.2; }

double ConvergenceReport::cauchy_ratio(int after) const {
    double worst = 0.0;
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].level <= after || records[i - 1].level != records[i].level - 1) continue;
        const double prev = records[i - 1].cauchy_increment;
        if (prev > 0.0) worst = std::max(worst, records[i].cauchy_increment / prev);
    }
    return worst;
}

ConvergenceReport convergence_study(const FlowFamily& phi, const std::function<Vector(const Vector&)>& reference,
                                    const std::vector<Vector>& probes, const std::vector<int>& levels,
                                    const SewingParameters& params, int order, bool timing) {
    if (probes.empty()) throw StructuralError("convergence_study: no probe points");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i] > levels[i - 1])) throw StructuralError("convergence_study: levels must increase strictly");
    ConvergenceReport rep;
    rep.scheme = phi.name;
    rep.order = order;
    rep.probes = probes;
    rep.horizon = phi.horizon;
    rep.theoretical = theoretical_rate(order, params.gamma, params.p);

    std::vector<Vector> refs;
    for (const auto& a : probes) refs.push_back(reference(a));
    std::vector<Vector> previous;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const int k = levels[li];
        const Partition pi = Partition::dyadic(phi.horizon, k);
        const auto start = std::chrono::steady_clock::now();
        std::vector<Vector> values;
        for (const auto& a : probes) values.push_back(iterated_product(phi, pi, 0.0, phi.horizon, a));
        const auto stop = std::chrono::steady_clock::now();
        LevelRecord r;
        r.level = k;
        r.mesh = pi.mesh();
        for (std::size_t p = 0; p < probes.size(); ++p) r.error = std::max(r.error, (values[p] - refs[p]).norm());
        if (timing) r.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        if (!previous.empty())
            for (std::size_t p = 0; p < probes.size(); ++p)
                r.cauchy_increment = std::max(r.cauchy_increment, (values[p] - previous[p]).norm());
        previous = std::move(values);
        rep.records.push_back(r);
    }
    rep.fit = fit_order(rep.records);
    return rep;
}

std::function<Vector(const Vector&)> self_reference(const FlowFamily& phi, int level) {
    const Partition pi = Partition::dyadic(phi.horizon, level);
    return [phi, pi](const Vector& a) { return iterated_product(phi, pi, 0.0, phi.horizon, a); };
}

DavieVerification davie_recursion_verify(const Matrix& U, std::span<const double> times, double D, double B,
                                         double alpha, double kappa, const Remainder& varpi, const Control& omega,
                                         double tol) {
    const auto n = times.size();
    if (U.rows() != static_cast<Eigen::Index>(n) || U.cols() != static_cast<Eigen::Index>(n))
        throw StructuralError("davie_recursion_verify: table shape does not match the partition");
    DavieVerification v;
    auto u = [&](std::size_t i, std::size_t j) { return U(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };
    auto w = [&](std::size_t i, std::size_t j) { return varpi(omega(times[i], times[j])); };
    auto fail = [&](std::string what, std::size_t i, std::size_t j) {
        v.preconditions = false;
        v.holds = false;
        v.failure = std::move(what);
        v.worst_r = i;
        v.worst_t = j;
        return v;
    };
    for (std::size_t i = 0; i < n; ++i)
        if (u(i, i) != 0.0) return fail("U_{r,r} != 0", i, i);
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (u(i, i + 1) > D * w(i, i + 1) * (1.0 + tol) + tol) return fail("successive bound U <= D varpi", i, i + 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 2; k < n; ++k)
            for (std::size_t j = i + 1; j < k; ++j) {
                const double rhs = (1.0 + alpha) * (u(i, j) + u(j, k)) + B * w(i, k);
                if (u(i, k) > rhs * (1.0 + tol) + tol) {
                    auto r = fail("recursion bound at (" + std::to_string(i) + "," + std::to_string(j) + "," +
                                      std::to_string(k) + ")",
                                  i, k);
                    return r;
                }
            }
    v.A = davie_constant_discrete(D, B, alpha, kappa);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double den = w(i, j);
            const double ratio = den > 0.0 ? u(i, j) / den : (u(i, j) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            if (ratio > v.worst_ratio) {
                v.worst_ratio = ratio;
                v.worst_r = i;
                v.worst_t = j;
            }
        }
    v.holds = v.worst_ratio <= v.A * (1.0 + tol);
    return v;
}

}  // namespace roughsew
