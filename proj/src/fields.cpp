#include "roughsew/fields.hpp"

#include "roughsew/errors.hpp"
#include "roughsew/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace roughsew {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Stack of the channel jacobians as one (d*l) x d matrix, whose spectral norm
// is the operator norm of h -> [grad f_i h]_i with the Frobenius norm on the target.
Matrix stacked(const std::vector<Matrix>& jac, std::size_t d) {
    Matrix m(idx(d * jac.size()), idx(d));
    for (std::size_t i = 0; i < jac.size(); ++i) m.block(idx(i * d), 0, idx(d), idx(d)) = jac[i];
    return m;
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double fd_step(const Vector& a) { return 1e-5 * (1.0 + a.norm()); }

std::vector<Matrix> fd_jacobian(const VectorFieldFamily& f, const Vector& a) {
    const std::size_t d = f.state_dim;
    const double h = fd_step(a);
    std::vector<Matrix> out(f.driver_dim, Matrix::Zero(idx(d), idx(d)));
    for (std::size_t p = 0; p < d; ++p) {
        Vector ap = a, am = a;
        ap[idx(p)] += h;
        am[idx(p)] -= h;
        const Matrix diff = (f.eval(ap) - f.eval(am)) / (2.0 * h);
        for (std::size_t i = 0; i < f.driver_dim; ++i) out[i].col(idx(p)) = diff.col(idx(i));
    }
    return out;
}

std::vector<ChannelHessian> fd_hessian(const VectorFieldFamily& f, const Vector& a) {
    const std::size_t d = f.state_dim;
    std::vector<ChannelHessian> out(f.driver_dim);
    for (auto& c : out) c.components.assign(d, Matrix::Zero(idx(d), idx(d)));
    if (f.jacobian_source == DerivativeSource::analytic) {
        const double h = fd_step(a);
        for (std::size_t q = 0; q < d; ++q) {
            Vector ap = a, am = a;
            ap[idx(q)] += h;
            am[idx(q)] -= h;
            const auto jp = f.jacobian(ap);
            const auto jm = f.jacobian(am);
            for (std::size_t i = 0; i < f.driver_dim; ++i) {
                const Matrix dj = (jp[i] - jm[i]) / (2.0 * h);
                for (std::size_t m = 0; m < d; ++m) out[i].components[m].col(idx(q)) = dj.row(idx(m)).transpose();
            }
        }
    } else {
        // Second differences of eval; a larger step balances truncation and rounding.
        const double h = 1e-4 * (1.0 + a.norm());
        const Matrix f0 = f.eval(a);
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p; q < d; ++q) {
                Matrix val;
                if (p == q) {
                    Vector ap = a, am = a;
                    ap[idx(p)] += h;
                    am[idx(p)] -= h;
                    val = (f.eval(ap) - 2.0 * f0 + f.eval(am)) / (h * h);
                } else {
                    Vector app = a, apm = a, amp = a, amm = a;
                    app[idx(p)] += h, app[idx(q)] += h;
                    apm[idx(p)] += h, apm[idx(q)] -= h;
                    amp[idx(p)] -= h, amp[idx(q)] += h;
                    amm[idx(p)] -= h, amm[idx(q)] -= h;
                    val = (f.eval(app) - f.eval(apm) - f.eval(amp) + f.eval(amm)) / (4.0 * h * h);
                }
                for (std::size_t i = 0; i < f.driver_dim; ++i)
                    for (std::size_t m = 0; m < d; ++m) {
                        out[i].components[m](idx(p), idx(q)) = val(idx(m), idx(i));
                        out[i].components[m](idx(q), idx(p)) = val(idx(m), idx(i));
                    }
            }
        }
    }
    return out;
}

void require_jacobian(const VectorFieldFamily& f) {
    if (!f.jacobian) throw CapabilityError("field '" + f.name + "' has no jacobian provider");
}

void require_hessian(const VectorFieldFamily& f) {
    if (!f.hessian) throw CapabilityError("field '" + f.name + "' has no hessian provider");
}

}  // namespace

double FieldNorms::grad_holder(double gamma) const {
    if (grad_holder_sampled && sampled_exponent == gamma) return *grad_holder_sampled;
    if (gamma >= 1.0) return grad_lip;
    if (grad_lip == 0.0) return 0.0;
    return std::pow(grad_lip, gamma) * std::pow(2.0 * grad_sup, 1.0 - gamma);
}

std::function<Vector(const Vector&)> VectorFieldFamily::channel(std::size_t i) const {
    if (i >= driver_dim) throw StructuralError("channel index out of range");
    auto e = eval;
    return [e, i](const Vector& a) -> Vector { return e(a).col(idx(i)); };
}

VectorFieldFamily with_finite_difference_fallback(VectorFieldFamily field) {
    if (!field.jacobian) {
        auto copy = field;
        field.jacobian = [copy](const Vector& a) { return fd_jacobian(copy, a); };
        field.jacobian_source = DerivativeSource::finite_difference;
    }
    if (!field.hessian) {
        auto copy = field;
        field.hessian = [copy](const Vector& a) { return fd_hessian(copy, a); };
        field.hessian_source = DerivativeSource::finite_difference;
    }
    return field;
}

VectorFieldFamily linear_field(std::vector<Matrix> matrices) {
    if (matrices.empty()) throw StructuralError("linear_field: no matrices");
    const auto d = static_cast<std::size_t>(matrices.front().rows());
    for (const auto& b : matrices)
        if (static_cast<std::size_t>(b.rows()) != d || static_cast<std::size_t>(b.cols()) != d)
            throw StructuralError("linear_field: matrices must be square of equal size");
    VectorFieldFamily f;
    f.state_dim = d;
    f.driver_dim = matrices.size();
    f.name = "linear";
    f.eval = [matrices, d](const Vector& a) {
        Matrix out(idx(d), idx(matrices.size()));
        for (std::size_t i = 0; i < matrices.size(); ++i) out.col(idx(i)) = matrices[i] * a;
        return out;
    };
    f.jacobian = [matrices](const Vector&) { return matrices; };
    f.hessian = [matrices, d](const Vector&) {
        ChannelHessian zero{std::vector<Matrix>(d, Matrix::Zero(idx(d), idx(d)))};
        return std::vector<ChannelHessian>(matrices.size(), zero);
    };
    f.jacobian_source = DerivativeSource::analytic;
    f.hessian_source = DerivativeSource::analytic;
    f.norms.grad_sup = spectral_norm(stacked(matrices, d));
    f.norms.grad_lip = 0.0;
    return f;
}

VectorFieldFamily trig_field(std::size_t d, std::size_t l, double scale) {
    if (d == 0 || l == 0) throw StructuralError("trig_field: empty dimensions");
    auto phase = [](std::size_t m, std::size_t i) { return 0.3 * static_cast<double>((m + 1) * (i + 1)); };
    VectorFieldFamily f;
    f.state_dim = d;
    f.driver_dim = l;
    f.name = "trig";
    f.eval = [=](const Vector& a) {
        Matrix out(idx(d), idx(l));
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t m = 0; m < d; ++m) out(idx(m), idx(i)) = scale * std::cos(a[idx((m + i) % d)] + phase(m, i));
        return out;
    };
    f.jacobian = [=](const Vector& a) {
        std::vector<Matrix> out(l, Matrix::Zero(idx(d), idx(d)));
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t m = 0; m < d; ++m) {
                const std::size_t q = (m + i) % d;
                out[i](idx(m), idx(q)) = -scale * std::sin(a[idx(q)] + phase(m, i));
            }
        return out;
    };
    f.hessian = [=](const Vector& a) {
        std::vector<ChannelHessian> out(l);
        for (std::size_t i = 0; i < l; ++i) {
            out[i].components.assign(d, Matrix::Zero(idx(d), idx(d)));
            for (std::size_t m = 0; m < d; ++m) {
                const std::size_t q = (m + i) % d;
                out[i].components[m](idx(q), idx(q)) = -scale * std::cos(a[idx(q)] + phase(m, i));
            }
        }
        return out;
    };
    f.jacobian_source = DerivativeSource::analytic;
    f.hessian_source = DerivativeSource::analytic;
    // For fixed i, m -> (m + i) mod d is a bijection, so each channel touches
    // every coordinate once.
    const double s = std::abs(scale);
    f.norms.sup = s * std::sqrt(static_cast<double>(d * l));
    f.norms.grad_sup = s * std::sqrt(static_cast<double>(l));
    f.norms.grad_lip = s * std::sqrt(static_cast<double>(l));
    return f;
}

VectorFieldFamily componentwise_trig_field(std::size_t d, std::size_t l, double scale) {
    if (d == 0 || l == 0) throw StructuralError("componentwise_trig_field: empty dimensions");
    auto phase = [](std::size_t i) { return static_cast<double>(i) * std::numbers::pi / 2.0; };
    VectorFieldFamily f;
    f.state_dim = d;
    f.driver_dim = l;
    f.name = "componentwise_trig";
    f.eval = [=](const Vector& a) {
        Matrix out(idx(d), idx(l));
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t m = 0; m < d; ++m) out(idx(m), idx(i)) = scale * std::sin(a[idx(m)] + phase(i));
        return out;
    };
    f.jacobian = [=](const Vector& a) {
        std::vector<Matrix> out(l, Matrix::Zero(idx(d), idx(d)));
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t m = 0; m < d; ++m) out[i](idx(m), idx(m)) = scale * std::cos(a[idx(m)] + phase(i));
        return out;
    };
    f.hessian = [=](const Vector& a) {
        std::vector<ChannelHessian> out(l);
        for (std::size_t i = 0; i < l; ++i) {
            out[i].components.assign(d, Matrix::Zero(idx(d), idx(d)));
            for (std::size_t m = 0; m < d; ++m)
                out[i].components[m](idx(m), idx(m)) = -scale * std::sin(a[idx(m)] + phase(i));
        }
        return out;
    };
    f.jacobian_source = DerivativeSource::analytic;
    f.hessian_source = DerivativeSource::analytic;
    // Channels alternate sin/cos of the same argument, so sums of squares over
    // channels are at most ceil(l/2).
    const double s = std::abs(scale);
    const double pairs = static_cast<double>((l + 1) / 2);
    f.norms.sup = s * std::sqrt(static_cast<double>(d) * pairs);
    f.norms.grad_sup = s * std::sqrt(pairs);
    f.norms.grad_lip = s * std::sqrt(pairs);
    return f;
}

VectorFieldFamily rotation_field(std::size_t d, std::size_t l, double scale) {
    if (d < 2 || l == 0) throw StructuralError("rotation_field: needs state_dim >= 2");
    auto gen = [d] {
        Matrix j = Matrix::Zero(idx(d), idx(d));
        j(0, 1) = -1.0;
        j(1, 0) = 1.0;
        return j;
    }();
    VectorFieldFamily f;
    f.state_dim = d;
    f.driver_dim = l;
    f.name = "rotation";
    f.eval = [=](const Vector& a) {
        const double h = std::exp(-0.5 * a.squaredNorm());
        Matrix out(idx(d), idx(l));
        for (std::size_t i = 0; i < l; ++i) {
            Vector g = gen * a;
            g[idx(i % d)] += 1.0;
            out.col(idx(i)) = scale * h * g;
        }
        return out;
    };
    f.jacobian = [=](const Vector& a) {
        const double h = std::exp(-0.5 * a.squaredNorm());
        std::vector<Matrix> out(l);
        for (std::size_t i = 0; i < l; ++i) {
            Vector g = gen * a;
            g[idx(i % d)] += 1.0;
            out[i] = scale * h * (gen - g * a.transpose());
        }
        return out;
    };
    f.hessian = [=](const Vector& a) {
        const double h = std::exp(-0.5 * a.squaredNorm());
        const Matrix hh = h * (a * a.transpose() - Matrix::Identity(idx(d), idx(d)));
        const Vector dh = -h * a;
        std::vector<ChannelHessian> out(l);
        for (std::size_t i = 0; i < l; ++i) {
            Vector g = gen * a;
            g[idx(i % d)] += 1.0;
            out[i].components.resize(d);
            for (std::size_t m = 0; m < d; ++m) {
                const Vector jm = gen.row(idx(m)).transpose();
                out[i].components[m] = scale * (hh * g[idx(m)] + dh * jm.transpose() + jm * dh.transpose());
            }
        }
        return out;
    };
    f.jacobian_source = DerivativeSource::analytic;
    f.hessian_source = DerivativeSource::analytic;
    // The Gaussian factor confines all variation to a few units around 0.
    f.norms = estimate_norms(f, Vector::Zero(idx(d)), 4.0, 1.0, 20000, 7);
    return f;
}

Vector f_I_identity(const VectorFieldFamily& field, std::span<const std::size_t> index, const Vector& a) {
    for (auto i : index)
        if (i >= field.driver_dim) throw StructuralError("f_I_identity: channel index out of range");
    switch (index.size()) {
        case 0:
            return a;
        case 1:
            return field.eval(a).col(idx(index[0]));
        case 2: {
            require_jacobian(field);
            const Matrix fa = field.eval(a);
            return field.jacobian(a)[index[1]] * fa.col(idx(index[0]));
        }
        case 3: {
            require_jacobian(field);
            require_hessian(field);
            const Matrix fa = field.eval(a);
            const auto jac = field.jacobian(a);
            const auto hes = field.hessian(a);
            const Vector fi = fa.col(idx(index[0]));
            const Vector fj = fa.col(idx(index[1]));
            const std::size_t k = index[2];
            Vector out = jac[k] * (jac[index[1]] * fi);
            for (std::size_t m = 0; m < field.state_dim; ++m) out[idx(m)] += fi.dot(hes[k].components[m] * fj);
            return out;
        }
        default:
            throw CapabilityError("f_I_identity: multi-index longer than 3");
    }
}

Vector lie_bracket(const VectorFieldFamily& field, std::size_t i, std::size_t j, const Vector& a) {
    const std::array<std::size_t, 2> ij{i, j};
    const std::array<std::size_t, 2> ji{j, i};
    return f_I_identity(field, ij, a) - f_I_identity(field, ji, a);
}

FourPointConstants analytic_four_point(const VectorFieldFamily& field, double gamma) {
    const double holder = field.norms.grad_holder(gamma);
    const double lip = field.norms.grad_sup;
    if (!std::isfinite(holder) || !std::isfinite(lip))
        throw CapabilityError("analytic_four_point: norm data of '" + field.name + "' unavailable");
    FourPointConstants c;
    c.hat = [holder, gamma](double x) { return 2.0 * holder * std::pow(x, gamma); };
    c.check = lip;
    c.provenance = field.norms.estimated ? "analytic formula, sampled norms" : "analytic";
    return c;
}

FourPointConstants four_point_sum(const FourPointConstants& f, double lambda, const FourPointConstants& g, double mu) {
    const double l = std::abs(lambda), m = std::abs(mu);
    FourPointConstants c;
    c.hat = [fh = f.hat, gh = g.hat, l, m](double x) { return l * fh(x) + m * gh(x); };
    c.check = l * f.check + m * g.check;
    c.provenance = "sum";
    return c;
}

FourPointConstants four_point_compose(const FourPointConstants& f, const FourPointConstants& g, double lip_g) {
    FourPointConstants c;
    c.hat = [fh = f.hat, gh = g.hat, fc = f.check, lip_g](double x) { return fh(lip_g * x) * lip_g + fc * gh(x); };
    c.check = f.check * g.check;
    c.provenance = "composition";
    return c;
}

FourPointConstants four_point_inverse(const FourPointConstants& g, double lip_g) {
    if (!(lip_g < 1.0)) throw HypothesisError("four_point_inverse: Lip(g) must be < 1");
    if (!(g.check < 1.0)) throw HypothesisError("four_point_inverse: check constant must be < 1");
    const double lip_k = 1.0 / (1.0 - lip_g);
    FourPointConstants c;
    c.hat = [gh = g.hat, lip_k](double x) { return gh(lip_k * x) * lip_k; };
    c.check = 1.0 / (1.0 - g.check);
    c.provenance = "derived bound, verify empirically";
    return c;
}

FourPointConstants four_point_scaled(const FourPointConstants& c, double factor) {
    FourPointConstants out;
    out.hat = [h = c.hat, factor](double x) { return factor * h(x); };
    out.check = factor * c.check;
    out.provenance = c.provenance + ", scaled";
    return out;
}

FourPointReport empirical_four_point_defect(const std::function<Vector(const Vector&)>& g, std::size_t dim,
                                            const FourPointConstants& c, std::size_t samples, double radius,
                                            std::uint64_t seed) {
    if (samples == 0) throw StructuralError("empirical_four_point_defect: samples must be >= 1");
    Rng rng(seed);
    FourPointReport rep;
    rep.samples = samples;
    for (std::size_t k = 0; k < samples; ++k) {
        Vector a, b, cc, d;
        if (k % 2 == 0) {
            a = rng.vector(dim, -radius, radius);
            b = rng.vector(dim, -radius, radius);
            cc = rng.vector(dim, -radius, radius);
            d = rng.vector(dim, -radius, radius);
        } else {
            // Near-parallelogram at a log-uniform scale.
            const double scale = radius * std::pow(10.0, rng.uniform(-4.0, 0.0));
            a = rng.vector(dim, -radius, radius);
            const Vector u = rng.vector(dim, -scale, scale);
            const Vector v = rng.vector(dim, -scale, scale);
            const Vector w = rng.vector(dim, -scale, scale) * rng.uniform(0.0, 0.1);
            b = a + u;
            cc = a + v;
            d = a + u + v + w;
        }
        const double lhs = (g(a) - g(b) - g(cc) + g(d)).norm();
        const double rhs = c.hat(std::max((a - b).norm(), (cc - d).norm())) * std::max((a - cc).norm(), (b - d).norm()) +
                           c.check * (a - b - cc + d).norm();
        const double v = lhs - rhs;
        if (v > rep.max_violation) {
            rep.max_violation = v;
            rep.witness = {a, b, cc, d};
        }
    }
    return rep;
}

FieldNorms estimate_norms(const VectorFieldFamily& field, const Vector& center, double radius, double gamma,
                          std::size_t samples, std::uint64_t seed) {
    require_jacobian(field);
    const auto pts = sample_points(SampleBox{center, radius}, samples, seed);
    FieldNorms n;
    n.sup = 0.0;
    n.grad_sup = 0.0;
    n.grad_lip = 0.0;
    double holder = 0.0;
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (const auto& a : pts) {
        n.sup = std::max(n.sup, field.eval(a).norm());
        const Matrix ja = stacked(field.jacobian(a), field.state_dim);
        n.grad_sup = std::max(n.grad_sup, spectral_norm(ja));
        // Pair each point with a nearby one; Holder quotients peak at small separation.
        const double scale = radius * std::pow(10.0, rng.uniform(-3.0, 0.0));
        const Vector b = a + rng.vector(field.state_dim, -scale, scale);
        const double dist = (a - b).norm();
        if (dist == 0.0) continue;
        const double diff = spectral_norm(ja - stacked(field.jacobian(b), field.state_dim));
        n.grad_lip = std::max(n.grad_lip, diff / dist);
        holder = std::max(holder, diff / std::pow(dist, gamma));
    }
    n.grad_holder_sampled = holder;
    n.sampled_exponent = gamma;
    n.estimated = true;
    return n;
}

double jacobian_consistency(const VectorFieldFamily& field, const Vector& center, double radius, std::size_t samples,
                            double h, std::uint64_t seed) {
    require_jacobian(field);
    double worst = 0.0;
    for (const auto& a : sample_points(SampleBox{center, radius}, samples, seed)) {
        const auto jac = field.jacobian(a);
        for (std::size_t p = 0; p < field.state_dim; ++p) {
            Vector ap = a, am = a;
            ap[idx(p)] += h;
            am[idx(p)] -= h;
            const Matrix diff = (field.eval(ap) - field.eval(am)) / (2.0 * h);
            for (std::size_t i = 0; i < field.driver_dim; ++i)
                worst = std::max(worst, (diff.col(idx(i)) - jac[i].col(idx(p))).lpNorm<Eigen::Infinity>());
        }
    }
    return worst;
}

double hessian_consistency(const VectorFieldFamily& field, const Vector& center, double radius, std::size_t samples,
                           double h, std::uint64_t seed) {
    require_jacobian(field);
    require_hessian(field);
    double worst = 0.0;
    for (const auto& a : sample_points(SampleBox{center, radius}, samples, seed)) {
        const auto hes = field.hessian(a);
        for (std::size_t q = 0; q < field.state_dim; ++q) {
            Vector ap = a, am = a;
            ap[idx(q)] += h;
            am[idx(q)] -= h;
            const auto jp = field.jacobian(ap);
            const auto jm = field.jacobian(am);
            for (std::size_t i = 0; i < field.driver_dim; ++i) {
                const Matrix dj = (jp[i] - jm[i]) / (2.0 * h);
                for (std::size_t m = 0; m < field.state_dim; ++m)
                    for (std::size_t p = 0; p < field.state_dim; ++p)
                        worst = std::max(worst, std::abs(dj(idx(m), idx(p)) - hes[i].components[m](idx(p), idx(q))));
            }
        }
    }
    return worst;
}

}  // namespace roughsew
