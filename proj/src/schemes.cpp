#include "roughsew/schemes.hpp"

#include "roughsew/errors.hpp"

#include <algorithm>
#include <cmath>

namespace roughsew {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_dims(const VectorFieldFamily& field, const RoughDriver& driver, const char* what) {
    if (field.driver_dim != driver.dim)
        throw StructuralError(std::string(what) + ": field has " + std::to_string(field.driver_dim) +
                              " channels but driver dimension is " + std::to_string(driver.dim));
    if (!field.eval) throw StructuralError(std::string(what) + ": field has no evaluator");
}

void require_jacobian(const VectorFieldFamily& field, const char* what) {
    if (!field.jacobian) throw CapabilityError(std::string(what) + ": field '" + field.name + "' has no jacobian");
}

void check_finite(const Vector& y, const char* what) {
    if (!y.allFinite()) throw IntegratorError(std::string(what) + ": non-finite state");
}

// sum_{i,j} grad f_j(y) f_i(y) w^{ij}.
Vector second_order_term(const Matrix& f, const std::vector<Matrix>& jac, const Matrix& w) {
    Vector out = Vector::Zero(f.rows());
    for (std::size_t j = 0; j < jac.size(); ++j) out += jac[j] * (f * w.col(idx(j)));
    return out;
}

}  // namespace

std::string SchemeSpec::name() const {
    switch (kind) {
        case SchemeKind::davie: return "davie";
        case SchemeKind::euler: return "euler" + std::to_string(n);
        case SchemeKind::bailleul: return "bailleul";
        case SchemeKind::friz_victoir: return "friz_victoir";
    }
    return "unknown";
}

SchemeSpec SchemeSpec::parse(const std::string& name) {
    SchemeSpec s;
    if (name == "davie") {
        s.kind = SchemeKind::davie;
    } else if (name.rfind("euler", 0) == 0 && name.size() == 6 && name[5] >= '0' && name[5] <= '9') {
        s.kind = SchemeKind::euler;
        s.n = name[5] - '0';
    } else if (name == "bailleul") {
        s.kind = SchemeKind::bailleul;
    } else if (name == "friz_victoir") {
        s.kind = SchemeKind::friz_victoir;
    } else {
        throw StructuralError("unknown scheme '" + name + "'");
    }
    s.validate();
    return s;
}

void SchemeSpec::validate() const {
    if (kind == SchemeKind::euler && (n < 1 || n > 3)) throw StructuralError("euler order must be 1, 2 or 3");
    if (ode_substeps < 1) throw StructuralError("ode_substeps must be >= 1");
}

const std::vector<std::string>& scheme_names() {
    static const std::vector<std::string> names{"davie", "euler1", "euler2", "euler3", "bailleul", "friz_victoir"};
    return names;
}

TensorSeries driver_increment(const RoughDriver& driver, double from, double to) {
    if (from <= to) return driver(from, to);
    return group_inverse(driver(to, from));
}

FlowFamily davie_almost_flow(const VectorFieldFamily& field, const RoughDriver& driver) {
    require_dims(field, driver, "davie_almost_flow");
    require_jacobian(field, "davie_almost_flow");
    if (driver.depth < 2) throw CapabilityError("davie_almost_flow: driver depth must be >= 2");
    FlowFamily phi;
    phi.dim = field.state_dim;
    phi.horizon = driver.horizon();
    phi.name = "davie";
    phi.step = [field, driver](double from, double to, const Vector& a) -> Vector {
        const TensorSeries x = driver_increment(driver, from, to);
        const Matrix f = field.eval(a);
        return a + f * x.level1() + second_order_term(f, field.jacobian(a), x.level2());
    };
    return phi;
}

FlowFamily step_n_euler(const VectorFieldFamily& field, const RoughDriver& driver, int n) {
    require_dims(field, driver, "step_n_euler");
    if (n < 1 || n > 3) throw StructuralError("step_n_euler: n must be 1, 2 or 3");
    if (driver.depth < n)
        throw CapabilityError("step_n_euler: order " + std::to_string(n) + " needs a depth-" + std::to_string(n) +
                              " driver, got depth " + std::to_string(driver.depth));
    if (n >= 2) require_jacobian(field, "step_n_euler");
    if (n == 3 && !field.hessian) throw CapabilityError("step_n_euler: order 3 needs a hessian");
    FlowFamily phi;
    phi.dim = field.state_dim;
    phi.horizon = driver.horizon();
    phi.name = "euler" + std::to_string(n);
    phi.step = [field, driver, n](double from, double to, const Vector& a) -> Vector {
        const TensorSeries x = driver_increment(driver, from, to);
        const Matrix f = field.eval(a);
        Vector out = a + f * x.level1();
        if (n == 1) return out;
        const auto jac = field.jacobian(a);
        out += second_order_term(f, jac, x.level2());
        if (n == 2) return out;
        const auto hes = field.hessian(a);
        const std::size_t l = field.driver_dim;
        const std::size_t d = field.state_dim;
        const auto x3 = x.level(3);
        for (std::size_t k = 0; k < l; ++k) {
            // w = sum_{i,j} x^{ijk} (f_i, f_j) terms, assembled per k.
            Vector first = Vector::Zero(idx(d));
            Vector hess = Vector::Zero(idx(d));
            for (std::size_t j = 0; j < l; ++j) {
                Vector fi_w = Vector::Zero(idx(d));
                for (std::size_t i = 0; i < l; ++i) fi_w += f.col(idx(i)) * x3[(i * l + j) * l + k];
                first += jac[j] * fi_w;
                for (std::size_t m = 0; m < d; ++m) hess[idx(m)] += fi_w.dot(hes[k].components[m] * f.col(idx(j)));
            }
            out += jac[k] * first + hess;
        }
        return out;
    };
    return phi;
}

Vector rk4_time_one(const std::function<Vector(const Vector&)>& drift, const Vector& a, int steps) {
    if (steps < 1) throw StructuralError("rk4_time_one: steps must be >= 1");
    const double h = 1.0 / steps;
    Vector y = a;
    for (int k = 0; k < steps; ++k) {
        const Vector k1 = drift(y);
        const Vector k2 = drift(y + 0.5 * h * k1);
        const Vector k3 = drift(y + 0.5 * h * k2);
        const Vector k4 = drift(y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(y, "rk4");
    }
    return y;
}

FlowFamily bailleul_almost_flow(const VectorFieldFamily& field, const RoughDriver& driver, int substeps) {
    require_dims(field, driver, "bailleul_almost_flow");
    require_jacobian(field, "bailleul_almost_flow");
    if (substeps < 1) throw StructuralError("bailleul_almost_flow: substeps must be >= 1");
    FlowFamily phi;
    phi.dim = field.state_dim;
    phi.horizon = driver.horizon();
    phi.name = "bailleul";
    phi.step = [field, driver, substeps](double from, double to, const Vector& a) -> Vector {
        const TensorSeries x = driver_increment(driver, from, to);
        const Vector x1 = x.level1();
        const Matrix x2 = x.level2();
        const Matrix anti = 0.5 * (x2 - x2.transpose());
        auto drift = [&](const Vector& y) -> Vector {
            const Matrix f = field.eval(y);
            return f * x1 + second_order_term(f, field.jacobian(y), anti);
        };
        return rk4_time_one(drift, a, substeps);
    };
    return phi;
}

std::vector<Vector> axis_loop_path(const Vector& increment, const Matrix& area) {
    const auto l = static_cast<std::size_t>(increment.size());
    if (area.rows() != idx(l) || area.cols() != idx(l)) throw StructuralError("axis_loop_path: area has wrong shape");
    const double scale = std::max(1.0, area.cwiseAbs().maxCoeff());
    if ((area + area.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw StructuralError("axis_loop_path: area must be antisymmetric");
    std::vector<Vector> v;
    v.push_back(Vector::Zero(idx(l)));
    v.push_back(increment);
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = i + 1; j < l; ++j) {
            const double a = area(idx(i), idx(j));
            if (a == 0.0) continue;
            const double side = std::sqrt(std::abs(a));
            // First leg along e_i for positive area, along e_j otherwise.
            const std::size_t p = a > 0.0 ? i : j;
            const std::size_t q = a > 0.0 ? j : i;
            Vector cur = v.back();
            cur[idx(p)] += side;
            v.push_back(cur);
            cur[idx(q)] += side;
            v.push_back(cur);
            cur[idx(p)] -= side;
            v.push_back(cur);
            // Close exactly on the loop's start.
            cur = v[v.size() - 4];
            v.push_back(cur);
        }
    }
    return v;
}

double axis_loop_length(const Vector& increment, const Matrix& area) {
    double len = increment.norm();
    for (Eigen::Index i = 0; i < area.rows(); ++i)
        for (Eigen::Index j = i + 1; j < area.cols(); ++j) len += 4.0 * std::sqrt(std::abs(area(i, j)));
    return len;
}

Vector solve_along_polyline(const VectorFieldFamily& field, std::span<const Vector> vertices, const Vector& a,
                            int substeps) {
    Vector y = a;
    for (std::size_t k = 1; k < vertices.size(); ++k) {
        const Vector dx = vertices[k] - vertices[k - 1];
        if (dx.squaredNorm() == 0.0) continue;
        y = rk4_time_one([&](const Vector& z) -> Vector { return field.eval(z) * dx; }, y, substeps);
    }
    return y;
}

FlowFamily friz_victoir_almost_flow(const VectorFieldFamily& field, const RoughDriver& driver, int substeps) {
    require_dims(field, driver, "friz_victoir_almost_flow");
    if (substeps < 1) throw StructuralError("friz_victoir_almost_flow: substeps must be >= 1");
    if (driver.depth < 2) throw CapabilityError("friz_victoir_almost_flow: driver depth must be >= 2");
    FlowFamily phi;
    phi.dim = field.state_dim;
    phi.horizon = driver.horizon();
    phi.name = "friz_victoir";
    phi.step = [field, driver, substeps](double from, double to, const Vector& a) -> Vector {
        const TensorSeries x = driver_increment(driver, from, to);
        const Matrix x2 = x.level2();
        const auto path = axis_loop_path(x.level1(), 0.5 * (x2 - x2.transpose()));
        return solve_along_polyline(field, path, a, substeps);
    };
    return phi;
}

FlowFamily bailleul_remainder(const VectorFieldFamily& field, const RoughDriver& driver, int substeps) {
    const FlowFamily chi = bailleul_almost_flow(field, driver, substeps);
    const FlowFamily phi = davie_almost_flow(field, driver);
    FlowFamily eps;
    eps.dim = field.state_dim;
    eps.horizon = driver.horizon();
    eps.name = "bailleul_remainder";
    // The remainder of a point, not a map near the identity: 0 on the diagonal.
    eps.step = [chi, phi](double from, double to, const Vector& a) -> Vector {
        if (from == to) return Vector::Zero(a.size());
        return chi(from, to, a) - phi(from, to, a);
    };
    return eps;
}

FlowFamily make_scheme(const SchemeSpec& spec, const VectorFieldFamily& field, const RoughDriver& driver) {
    spec.validate();
    switch (spec.kind) {
        case SchemeKind::davie: return davie_almost_flow(field, driver);
        case SchemeKind::euler: return step_n_euler(field, driver, spec.n);
        case SchemeKind::bailleul: return bailleul_almost_flow(field, driver, spec.ode_substeps);
        case SchemeKind::friz_victoir: return friz_victoir_almost_flow(field, driver, spec.ode_substeps);
    }
    throw StructuralError("make_scheme: unknown kind");
}

Vector ode_reference(const VectorFieldFamily& field, const SmoothPath& path, double s, double t, const Vector& a,
                     std::size_t steps) {
    if (!path.velocity) throw CapabilityError("ode_reference: path '" + path.name + "' has no velocity");
    if (steps == 0) throw StructuralError("ode_reference: steps must be >= 1");
    if (s == t) return a;
    if (!(s < t)) throw StructuralError("ode_reference: requires s < t");
    std::vector<double> knots{s};
    for (double b : path.breakpoints)
        if (b > s && b < t) knots.push_back(b);
    knots.push_back(t);
    Vector y = a;
    for (std::size_t k = 1; k < knots.size(); ++k) {
        const double lo = knots[k - 1], hi = knots[k];
        // Velocities are sampled inside [lo, hi) so a kink at hi is not seen early.
        const double last = std::nextafter(hi, lo);
        auto rhs = [&](double u, const Vector& z) -> Vector {
            return field.eval(z) * path.velocity(std::min(u, last));
        };
        const auto n = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(static_cast<double>(steps) * (hi - lo) / (t - s))));
        const double h = (hi - lo) / static_cast<double>(n);
        for (std::size_t m = 0; m < n; ++m) {
            const double u = lo + h * static_cast<double>(m);
            const Vector k1 = rhs(u, y);
            const Vector k2 = rhs(u + 0.5 * h, y + 0.5 * h * k1);
            const Vector k3 = rhs(u + 0.5 * h, y + 0.5 * h * k2);
            const Vector k4 = rhs(u + h, y + h * k3);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        check_finite(y, "ode_reference");
    }
    return y;
}

}  // namespace roughsew
