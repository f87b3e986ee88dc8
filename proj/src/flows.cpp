#include "roughsew/flows.hpp"

#include "roughsew/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace roughsew {

namespace {

struct PointPair {
    Vector a;
    Vector b;
};

// Pairs of nearby points: half at a log-uniform small separation, half drawn independently.
std::vector<PointPair> sample_point_pairs(const SampleSpec& spec) {
    const auto pts = sample_points(spec.box, 2 * spec.points, spec.seed);
    Rng rng(spec.seed ^ 0x51ed270b27a1e3c5ULL);
    std::vector<PointPair> out;
    const auto dim = static_cast<std::size_t>(spec.box.center.size());
    for (std::size_t k = 0; k < spec.points; ++k) {
        if (k % 2 == 0) {
            const double scale = spec.box.radius * std::pow(10.0, rng.uniform(-4.0, -1.0));
            out.push_back({pts[2 * k], pts[2 * k] + rng.vector(dim, -scale, scale)});
        } else {
            out.push_back({pts[2 * k], pts[2 * k + 1]});
        }
    }
    return out;
}

void record(DefectReport& rep, double value, std::vector<double> times, const Vector& point) {
    ++rep.samples;
    if (value > rep.value || rep.times.empty()) {
        if (value > rep.value) rep.value = value;
        rep.times = std::move(times);
        rep.point = point;
    }
}

void require_grid(std::span<const double> grid, std::size_t n, const char* what) {
    if (grid.size() < n) throw StructuralError(std::string(what) + ": grid too small");
}

}  // namespace

FlowFamily identity_family(std::size_t dim, double horizon) {
    return FlowFamily{dim, horizon, "identity", Orientation::forward, [](double, double, const Vector& a) { return a; }};
}

Partition::Partition(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw StructuralError("Partition: at least two times required");
    if (times_.front() != 0.0) throw StructuralError("Partition: must start at 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1])) throw StructuralError("Partition: times must increase strictly");
}

Partition Partition::dyadic(double horizon, int level) {
    if (level < 0 || level > 30) throw StructuralError("Partition::dyadic: level out of range");
    return Partition(uniform_grid(horizon, std::size_t{1} << level));
}

double Partition::mesh() const {
    double m = 0.0;
    for (std::size_t i = 1; i < times_.size(); ++i) m = std::max(m, times_[i] - times_[i - 1]);
    return m;
}

Vector iterated_product(const FlowFamily& phi, const Partition& pi, double from, double to, const Vector& a) {
    if (from == to) return a;
    const auto t = pi.times();
    Vector y = a;
    double cur = from;
    if (from < to) {
        auto it = std::upper_bound(t.begin(), t.end(), from);
        for (; it != t.end() && *it < to; ++it) {
            y = phi(cur, *it, y);
            cur = *it;
        }
    } else {
        auto it = std::lower_bound(t.begin(), t.end(), from);
        auto rit = std::make_reverse_iterator(it);
        for (; rit != t.rend() && *rit > to; ++rit) {
            y = phi(cur, *rit, y);
            cur = *rit;
        }
    }
    return phi(cur, to, y);
}

FlowFamily iterated_family(const FlowFamily& phi, const Partition& pi) {
    FlowFamily out = phi;
    out.name = phi.name + "^pi";
    out.step = [phi, pi](double from, double to, const Vector& a) { return iterated_product(phi, pi, from, to, a); };
    return out;
}

DefectReport almost_flow_defect(const FlowFamily& phi, std::span<const double> grid, const SampleSpec& spec,
                                const Remainder& varpi, const Control& omega) {
    require_grid(grid, 3, "almost_flow_defect");
    DefectReport rep{"almost_flow_M", 0.0, {}, {}, 0, spec};
    const auto pts = sample_points(spec.box, spec.points, spec.seed);
    for (const auto& tr : sample_triples(grid.size(), spec.max_triples, spec.seed)) {
        const double r = grid[tr[0]], s = grid[tr[1]], t = grid[tr[2]];
        const double scale = varpi(omega(r, t));
        for (const auto& a : pts) {
            const double d = (phi(s, t, phi(r, s, a)) - phi(r, t, a)).norm();
            record(rep, d / scale, {r, s, t}, a);
        }
    }
    return rep;
}

SewingGapReport sewing_gap(const FlowFamily& phi, const Partition& pi, std::span<const double> grid,
                           const SampleSpec& spec, const SewingParameters& params, const Control& omega,
                           std::optional<double> almost_flow_constant) {
    require_grid(grid, 2, "sewing_gap");
    SewingGapReport out;
    out.gap = DefectReport{"sewing_gap_L", 0.0, {}, {}, 0, spec};
    const auto varpi = params.remainder();
    const auto pts = sample_points(spec.box, spec.points, spec.seed);
    for (const auto& [i, j] : sample_pairs(grid.size(), spec.max_pairs, spec.seed)) {
        const double s = grid[i], t = grid[j];
        const double scale = varpi(omega(s, t));
        for (const auto& a : pts) {
            const double d = (iterated_product(phi, pi, s, t, a) - phi(s, t, a)).norm();
            record(out.gap, d / scale, {s, t}, a);
        }
    }
    const double delta = params.delta_T();
    out.denominator = 1.0 - (1.0 + delta) * varpi.kappa() - delta;
    out.bound_shape = (almost_flow_constant && out.denominator > 0.0)
                          ? 2.0 * *almost_flow_constant / out.denominator
                          : std::numeric_limits<double>::quiet_NaN();
    return out;
}

DefectReport ul_lipschitz_estimate(const FlowFamily& phi, const Partition& pi, const SampleSpec& spec) {
    DefectReport rep{"ul_lipschitz", 0.0, {}, {}, 0, spec};
    const auto pairs = sample_point_pairs(spec);
    const auto t = pi.times();
    for (const auto& [i, j] : sample_pairs(t.size(), spec.max_pairs, spec.seed)) {
        for (const auto& pp : pairs) {
            const double den = (pp.a - pp.b).norm();
            if (den == 0.0) continue;
            const double num =
                (iterated_product(phi, pi, t[i], t[j], pp.a) - iterated_product(phi, pi, t[i], t[j], pp.b)).norm();
            record(rep, num / den, {t[i], t[j]}, pp.a);
        }
    }
    return rep;
}

DefectReport flow_property_defect(const FlowFamily& psi, std::span<const double> grid, const SampleSpec& spec) {
    require_grid(grid, 3, "flow_property_defect");
    DefectReport rep{"flow_property", 0.0, {}, {}, 0, spec};
    const auto pts = sample_points(spec.box, spec.points, spec.seed);
    for (const auto& tr : sample_triples(grid.size(), spec.max_triples, spec.seed)) {
        const double r = grid[tr[0]], s = grid[tr[1]], t = grid[tr[2]];
        for (const auto& a : pts) record(rep, (psi(s, t, psi(r, s, a)) - psi(r, t, a)).norm(), {r, s, t}, a);
    }
    return rep;
}

DefectReport galaxy_distance(const FlowFamily& phi, const FlowFamily& psi, std::span<const double> grid,
                             const SampleSpec& spec, const Remainder& varpi, const Control& omega) {
    require_grid(grid, 2, "galaxy_distance");
    DefectReport rep{"galaxy_distance", 0.0, {}, {}, 0, spec};
    const auto pts = sample_points(spec.box, spec.points, spec.seed);
    for (const auto& [i, j] : sample_pairs(grid.size(), spec.max_pairs, spec.seed)) {
        const double s = grid[i], t = grid[j];
        const double scale = varpi(omega(s, t));
        for (const auto& a : pts) record(rep, (phi(s, t, a) - psi(s, t, a)).norm() / scale, {s, t}, a);
    }
    return rep;
}

DefectReport lipschitz_gap_estimate(const FlowFamily& phi, const Partition& pi, std::span<const double> grid,
                                    const SampleSpec& spec, const Remainder& varpi, const Control& omega) {
    require_grid(grid, 2, "lipschitz_gap_estimate");
    DefectReport rep{"lipschitz_gap", 0.0, {}, {}, 0, spec};
    const auto pairs = sample_point_pairs(spec);
    for (const auto& [i, j] : sample_pairs(grid.size(), spec.max_pairs, spec.seed)) {
        const double s = grid[i], t = grid[j];
        const double scale = varpi(omega(s, t));
        for (const auto& pp : pairs) {
            const double den = (pp.a - pp.b).norm();
            if (den == 0.0) continue;
            const Vector ga = iterated_product(phi, pi, s, t, pp.a) - phi(s, t, pp.a);
            const Vector gb = iterated_product(phi, pi, s, t, pp.b) - phi(s, t, pp.b);
            record(rep, (ga - gb).norm() / (den * scale), {s, t}, pp.a);
        }
    }
    return rep;
}

double relative_drift(std::span<const double> values) {
    if (values.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*hi == 0.0) return 0.0;
    if (!(*lo > 0.0)) return std::numeric_limits<double>::infinity();
    return *hi / *lo - 1.0;
}

RefinementStudy refinement_study(const std::function<double(std::span<const double>)>& quantity, double horizon,
                                 std::span<const int> levels) {
    RefinementStudy out;
    for (int k : levels) {
        const auto grid = uniform_grid(horizon, std::size_t{1} << k);
        const double v = quantity(grid);
        out.levels.push_back(k);
        out.values.push_back(v);
        if (!std::isfinite(v)) out.finite = false;
    }
    out.drift = relative_drift(out.values);
    return out;
}

}  // namespace roughsew
