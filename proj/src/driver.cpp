#include "roughsew/driver.hpp"

#include "roughsew/errors.hpp"
#include "roughsew/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace roughsew {

Control make_holder_control(double c, double horizon) {
    if (!(c > 0.0)) throw StructuralError("make_holder_control: c must be positive");
    return Control{[c](double s, double t) { return c * (t - s); }, horizon};
}

double Remainder::operator()(double delta) const { return std::pow(delta, theta); }

double Remainder::kappa() const { return std::pow(2.0, 1.0 - theta); }

double SewingParameters::delta_T() const {
    return delta_scale * std::pow(horizon, std::min(gamma, 1.0) / p);
}

double SewingParameters::eta(double x) const { return delta_T() * std::pow(x, theta() * (1.0 - gamma)); }

double SewingParameters::horizon_criterion() const {
    const double d = delta_T();
    return remainder().kappa() * (1.0 + d) * (1.0 + d) + d;
}

void SewingParameters::validate() const {
    if (!(p >= 2.0 && p < 3.0)) throw StructuralError("p must lie in [2, 3)");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw StructuralError("gamma must lie in (0, 1]");
    if (!(theta() > 1.0)) throw StructuralError("(2 + gamma) / p must exceed 1");
    if (!(horizon > 0.0)) throw StructuralError("horizon T must be positive");
    if (!(delta_scale >= 0.0)) throw StructuralError("delta_scale must be non-negative");
}

SmoothPath circle_path(double radius, double frequency) {
    SmoothPath p;
    p.dim = 2;
    p.name = "circle";
    p.position = [radius, frequency](double t) {
        Vector v(2);
        v << radius * std::cos(frequency * t), radius * std::sin(frequency * t);
        return v;
    };
    p.velocity = [radius, frequency](double t) {
        Vector v(2);
        v << -radius * frequency * std::sin(frequency * t), radius * frequency * std::cos(frequency * t);
        return v;
    };
    return p;
}

SmoothPath line_path(const Vector& velocity) {
    SmoothPath p;
    p.dim = static_cast<std::size_t>(velocity.size());
    p.name = "line";
    p.position = [velocity](double t) -> Vector { return t * velocity; };
    p.velocity = [velocity](double) -> Vector { return velocity; };
    return p;
}

SmoothPath lissajous_path(std::size_t dim) {
    SmoothPath p;
    p.dim = dim;
    p.name = "lissajous";
    p.position = [dim](double t) {
        Vector v(static_cast<Eigen::Index>(dim));
        for (std::size_t k = 0; k < dim; ++k) {
            const double w = static_cast<double>(k + 1);
            v[static_cast<Eigen::Index>(k)] = std::sin(w * t + static_cast<double>(k)) / w;
        }
        return v;
    };
    p.velocity = [dim](double t) {
        Vector v(static_cast<Eigen::Index>(dim));
        for (std::size_t k = 0; k < dim; ++k) {
            const double w = static_cast<double>(k + 1);
            v[static_cast<Eigen::Index>(k)] = std::cos(w * t + static_cast<double>(k));
        }
        return v;
    };
    return p;
}

SmoothPath polyline_path(std::vector<Vector> vertices, double horizon) {
    if (vertices.size() < 2) throw StructuralError("polyline_path: need at least 2 vertices");
    SmoothPath p;
    p.dim = static_cast<std::size_t>(vertices.front().size());
    p.name = "piecewise_linear";
    const std::size_t segments = vertices.size() - 1;
    const double h = horizon / static_cast<double>(segments);
    for (std::size_t k = 1; k < segments; ++k) p.breakpoints.push_back(horizon * k / segments);
    auto shared = std::make_shared<const std::vector<Vector>>(std::move(vertices));
    auto locate = [segments, h](double t) {
        auto k = static_cast<std::size_t>(std::clamp(std::floor(t / h), 0.0, static_cast<double>(segments - 1)));
        return k;
    };
    p.position = [shared, locate, h](double t) -> Vector {
        const auto k = locate(t);
        const double u = (t - h * static_cast<double>(k)) / h;
        return (*shared)[k] + u * ((*shared)[k + 1] - (*shared)[k]);
    };
    p.velocity = [shared, locate, h](double t) -> Vector {
        const auto k = locate(t);
        return ((*shared)[k + 1] - (*shared)[k]) / h;
    };
    return p;
}

namespace {

void check_interval(double s, double t, double horizon) {
    if (!(s <= t)) throw StructuralError("driver increment requires s <= t");
    const double slack = 1e-12 * std::max(1.0, horizon);
    if (s < -slack || t > horizon + slack) throw StructuralError("driver increment outside [0, T]");
}

// Dyadic cache of cell signatures for a smooth lift.
class SmoothLiftCache {
public:
    SmoothLiftCache(SmoothPath path, double horizon, const SmoothLiftOptions& opt)
        : path_(std::move(path)),
          horizon_(horizon),
          depth_(opt.depth),
          base_level_(opt.base_level),
          substeps_(static_cast<std::size_t>(opt.substeps_per_cell)),
          cells_(std::size_t{1} << opt.base_level) {
        const std::size_t nodes = cells_ * substeps_;
        positions_.reserve(nodes + 1);
        for (std::size_t j = 0; j <= nodes; ++j) positions_.push_back(path_.position(node_time(j)));

        tree_.resize(static_cast<std::size_t>(base_level_) + 1);
        auto& leaves = tree_.back();
        leaves.reserve(cells_);
        for (std::size_t c = 0; c < cells_; ++c) {
            std::span<const Vector> pts(positions_.data() + c * substeps_, substeps_ + 1);
            leaves.push_back(piecewise_linear_signature(pts, depth_));
        }
        for (int k = base_level_ - 1; k >= 0; --k) {
            auto& fine = tree_[static_cast<std::size_t>(k) + 1];
            auto& coarse = tree_[static_cast<std::size_t>(k)];
            coarse.reserve(fine.size() / 2);
            for (std::size_t i = 0; i < fine.size(); i += 2) coarse.push_back(tensor_product(fine[i], fine[i + 1]));
        }
    }

    TensorSeries operator()(double s, double t) const {
        check_interval(s, t, horizon_);
        s = std::clamp(s, 0.0, horizon_);
        t = std::clamp(t, 0.0, horizon_);
        const auto dim = path_.dim;
        if (s == t) return TensorSeries::identity(dim, depth_);

        const double cell = horizon_ / static_cast<double>(cells_);
        const auto c0 = static_cast<std::size_t>(std::ceil(s / cell));
        const auto c1 = static_cast<std::size_t>(std::floor(t / cell));
        if (c0 >= c1) return polyline(s, t);

        TensorSeries out = polyline(s, static_cast<double>(c0) * cell);
        std::size_t c = c0;
        while (c < c1) {
            int j = 0;
            while (j < base_level_ && (c % (std::size_t{2} << j)) == 0 && c + (std::size_t{2} << j) <= c1) ++j;
            const auto& node = tree_[static_cast<std::size_t>(base_level_ - j)][c >> j];
            out = tensor_product(out, node);
            c += std::size_t{1} << j;
        }
        return tensor_product(out, polyline(static_cast<double>(c1) * cell, t));
    }

private:
    double node_time(std::size_t j) const {
        return horizon_ * static_cast<double>(j) / static_cast<double>(cells_ * substeps_);
    }

    // Signature of the polyline path(s), fine nodes in (s, t), path(t).
    TensorSeries polyline(double s, double t) const {
        if (s >= t) return TensorSeries::identity(path_.dim, depth_);
        const double h = horizon_ / static_cast<double>(cells_ * substeps_);
        const std::size_t nodes = cells_ * substeps_;
        auto j0 = static_cast<std::size_t>(std::max(0.0, std::floor(s / h)));
        std::vector<Vector> pts;
        pts.push_back(vertex(s));
        for (std::size_t j = j0; j <= nodes; ++j) {
            const double u = node_time(j);
            if (u <= s) continue;
            if (u >= t) break;
            pts.push_back(positions_[j]);
        }
        pts.push_back(vertex(t));
        return piecewise_linear_signature(pts, depth_);
    }

    Vector vertex(double u) const {
        const double h = horizon_ / static_cast<double>(cells_ * substeps_);
        const double r = std::round(u / h);
        const auto j = static_cast<std::size_t>(r);
        if (j < positions_.size() && node_time(j) == u) return positions_[j];
        return path_.position(u);
    }

    SmoothPath path_;
    double horizon_;
    int depth_;
    int base_level_;
    std::size_t substeps_;
    std::size_t cells_;
    std::vector<Vector> positions_;
    std::vector<std::vector<TensorSeries>> tree_;
};

}  // namespace

RoughDriver lift_smooth(const SmoothPath& path, const SewingParameters& params, const Control& control,
                        const SmoothLiftOptions& options) {
    if (options.substeps_per_cell < 1) throw StructuralError("lift_smooth: substeps must be >= 1");
    if (options.base_level < 0 || options.base_level > 20) throw StructuralError("lift_smooth: base_level out of range");
    if (options.depth < 1) throw StructuralError("lift_smooth: depth must be >= 1");
    if (path.dim == 0 || !path.position) throw StructuralError("lift_smooth: empty path");
    auto cache = std::make_shared<const SmoothLiftCache>(path, params.horizon, options);
    RoughDriver d;
    d.dim = path.dim;
    d.depth = options.depth;
    d.params = params;
    d.control = control;
    d.kind = "smooth";
    d.increment = [cache](double s, double t) { return (*cache)(s, t); };
    d.path = path;
    return d;
}

RoughDriver pure_area_driver(const Matrix& area, const SewingParameters& params, const Control& control) {
    if (area.rows() != area.cols() || area.rows() == 0) throw StructuralError("pure_area_driver: area must be square");
    if ((area + area.transpose()).cwiseAbs().maxCoeff() > 0.0) {
        throw StructuralError("pure_area_driver: area matrix must be antisymmetric");
    }
    const auto dim = static_cast<std::size_t>(area.rows());
    const double horizon = params.horizon;
    RoughDriver d;
    d.dim = dim;
    d.depth = 2;
    d.params = params;
    d.control = control;
    d.kind = "pure_area";
    d.area = area;
    d.increment = [area, dim, horizon](double s, double t) {
        check_interval(s, t, horizon);
        TensorSeries x = TensorSeries::identity(dim, 2);
        auto l2 = x.level(2);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                l2[i * dim + j] = (t - s) * area(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        return x;
    };
    return d;
}

RoughDriver piecewise_linear_driver(std::vector<Vector> vertices, const SewingParameters& params,
                                    const Control& control, int depth) {
    if (vertices.size() < 2) throw StructuralError("piecewise_linear_driver: need at least 2 vertices");
    if (depth < 1) throw StructuralError("piecewise_linear_driver: depth must be >= 1");
    const double horizon = params.horizon;
    auto path = polyline_path(vertices, horizon);
    const std::size_t segments = vertices.size() - 1;
    auto shared = std::make_shared<const std::vector<Vector>>(std::move(vertices));
    RoughDriver d;
    d.dim = path.dim;
    d.depth = depth;
    d.params = params;
    d.control = control;
    d.kind = "piecewise_linear";
    d.path = path;
    d.increment = [shared, segments, horizon, depth, position = path.position](double s, double t) {
        check_interval(s, t, horizon);
        const std::size_t dim = static_cast<std::size_t>(shared->front().size());
        if (s >= t) return TensorSeries::identity(dim, depth);
        std::vector<Vector> pts;
        pts.push_back(position(s));
        for (std::size_t k = 1; k < segments; ++k) {
            const double u = horizon * static_cast<double>(k) / static_cast<double>(segments);
            if (u > s && u < t) pts.push_back((*shared)[k]);
        }
        pts.push_back(position(t));
        return piecewise_linear_signature(pts, depth);
    };
    return d;
}

double p_norm_estimate(const RoughDriver& driver, std::span<const double> grid) {
    if (grid.size() < 2) throw StructuralError("p_norm_estimate: grid needs at least 2 points");
    if (!std::is_sorted(grid.begin(), grid.end())) throw StructuralError("p_norm_estimate: grid must be sorted");
    const double p = driver.params.p;
    const int levels = std::min(driver.depth, 2);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            const double w = driver.control(grid[i], grid[j]);
            if (!(w > 0.0)) continue;
            const TensorSeries x = driver(grid[i], grid[j]);
            for (int k = 1; k <= levels; ++k) sup = std::max(sup, level_max_norm(x, k) / std::pow(w, k / p));
        }
    }
    return sup;
}

ChenReport check_chen(const RoughDriver& driver, std::span<const double> grid, double tol, std::size_t max_triples,
                      std::uint64_t seed) {
    ChenReport report;
    for (const auto& [i, j, k] : sample_triples(grid.size(), max_triples, seed)) {
        const double r = grid[i], s = grid[j], t = grid[k];
        const double defect = max_abs_difference(tensor_product(driver(r, s), driver(s, t)), driver(r, t));
        if (defect > report.max_defect) {
            report.max_defect = defect;
            report.worst = {r, s, t};
        }
    }
    report.passed = report.max_defect <= tol;
    return report;
}

double check_weak_geometric(const RoughDriver& driver, std::span<const double> grid, std::size_t max_pairs,
                            std::uint64_t seed) {
    double worst = 0.0;
    for (const auto& [i, j] : sample_pairs(grid.size(), max_pairs, seed)) {
        TensorSeries x = driver(grid[i], grid[j]);
        if (x.depth() > 2) x = x.truncated(2);
        worst = std::max(worst, weak_geometric_defect(x));
    }
    return worst;
}

double control_superadditivity_defect(const Control& control, std::size_t triples, std::uint64_t seed) {
    // Times on a dyadic lattice keep sums of differences exact in floating point.
    constexpr double lattice = 0x1.0p-20;
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t n = 0; n < triples; ++n) {
        std::array<double, 3> t{};
        for (auto& x : t) x = std::floor(rng.uniform() * control.horizon / lattice) * lattice;
        std::sort(t.begin(), t.end());
        const double v = control(t[0], t[1]) + control(t[1], t[2]) - control(t[0], t[2]);
        worst = std::max(worst, v);
    }
    return worst;
}

std::vector<double> uniform_grid(double horizon, std::size_t intervals) {
    std::vector<double> g(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) g[k] = horizon * static_cast<double>(k) / static_cast<double>(intervals);
    return g;
}

}  // namespace roughsew
