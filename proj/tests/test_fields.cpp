#include "roughsew/errors.hpp"
#include "roughsew/fields.hpp"
#include "roughsew/sampling.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace roughsew;

namespace {

std::vector<Matrix> two_matrices() {
    Matrix B1(2, 2), B2(2, 2);
    B1 << 0.3, -0.5, 0.2, 0.1;
    B2 << -0.4, 0.2, 0.6, 0.3;
    return {B1, B2};
}

// d/de g(a + e v) at e = 0 by a fourth-order central difference.
Vector directional(const std::function<Vector(const Vector&)>& g, const Vector& a, const Vector& v, double h) {
    return (-g(a + 2 * h * v) + 8 * g(a + h * v) - 8 * g(a - h * v) + g(a - 2 * h * v)) / (12 * h);
}

// The field with only eval set: derivative providers missing.
VectorFieldFamily eval_only(const VectorFieldFamily& f) {
    VectorFieldFamily g;
    g.state_dim = f.state_dim;
    g.driver_dim = f.driver_dim;
    g.name = f.name + "_eval_only";
    g.eval = f.eval;
    return g;
}

}  // namespace

TEST_SUITE("fields") {

TEST_CASE("linear fields: iterated actions are matrix products, earliest index applied first") {
    const auto B = two_matrices();
    const auto f = linear_field(B);
    Vector a(2);
    a << 0.7, -1.3;
    const std::array<std::size_t, 1> i0{0};
    const std::array<std::size_t, 2> i01{0, 1};
    const std::array<std::size_t, 3> i011{0, 1, 1};
    CHECK((f_I_identity(f, i0, a) - B[0] * a).norm() < 1e-15);
    CHECK((f_I_identity(f, i01, a) - B[1] * B[0] * a).norm() < 1e-15);
    CHECK((f_I_identity(f, i011, a) - B[1] * B[1] * B[0] * a).norm() < 1e-15);
    CHECK((lie_bracket(f, 0, 1, a) - (B[1] * B[0] - B[0] * B[1]) * a).norm() < 1e-15);
    CHECK((f_I_identity(f, {}, a) - a).norm() == 0.0);
}

TEST_CASE("trig field: jacobian and hessian agree with finite differences") {
    const auto f = trig_field(3, 2, 0.8);
    CHECK(f.jacobian_source == DerivativeSource::analytic);
    CHECK(jacobian_consistency(f, Vector::Zero(3), 2.0, 200, 1e-5, 3) < 1e-8);
    CHECK(hessian_consistency(f, Vector::Zero(3), 2.0, 200, 1e-5, 3) < 1e-7);
    Rng rng(4);
    const Vector a = rng.vector(3, -1, 1);
    const auto J = f.jacobian(a);
    for (std::size_t i = 0; i < 2; ++i)
        for (Eigen::Index q = 0; q < 3; ++q) {
            const Vector e = Vector::Unit(3, q);
            CHECK((J[i].col(q) - directional(f.channel(i), a, e, 1e-3)).norm() < 1e-9);
        }
}

TEST_CASE("second and third iterated actions are nested directional derivatives") {
    for (const auto& f : {trig_field(2, 2, 1.0), componentwise_trig_field(3, 2, 0.7), rotation_field(3, 2, 1.0)}) {
        Rng rng(8);
        const Vector a = rng.vector(f.state_dim, -1, 1);
        const std::size_t i = 0, j = 1, k = 0;
        // f_(j,k) = D f_k [f_j]
        auto fjk = [&](const Vector& b) { return directional(f.channel(k), b, f.channel(j)(b), 1e-3); };
        const std::array<std::size_t, 2> jk{j, k};
        CHECK((f_I_identity(f, jk, a) - fjk(a)).norm() < 1e-9);
        // f_(i,j,k) = D f_(j,k) [f_i]
        const std::array<std::size_t, 3> ijk{i, j, k};
        CHECK((f_I_identity(f, ijk, a) - directional(fjk, a, f.channel(i)(a), 1e-2)).norm() < 1e-6);
    }
}

TEST_CASE("missing derivative providers are a capability error unless the fallback is requested") {
    const auto f = eval_only(trig_field(2, 2));
    Vector a(2);
    a << 0.1, 0.2;
    const std::array<std::size_t, 1> i0{0};
    const std::array<std::size_t, 2> i01{0, 1};
    const std::array<std::size_t, 3> i010{0, 1, 0};
    const std::array<std::size_t, 4> i0101{0, 1, 0, 1};
    CHECK_NOTHROW(f_I_identity(f, i0, a));
    CHECK_THROWS_AS(f_I_identity(f, i01, a), CapabilityError);
    const auto g = with_finite_difference_fallback(f);
    CHECK(g.jacobian_source == DerivativeSource::finite_difference);
    CHECK((f_I_identity(g, i01, a) - f_I_identity(trig_field(2, 2), i01, a)).norm() < 1e-8);
    CHECK((f_I_identity(g, i010, a) - f_I_identity(trig_field(2, 2), i010, a)).norm() < 1e-5);
    CHECK_THROWS_AS(f_I_identity(g, i0101, a), CapabilityError);
}

TEST_CASE("analytic norms bound sampled norms") {
    for (const auto& f : {trig_field(2, 2, 1.3), componentwise_trig_field(2, 2, 1.0), componentwise_trig_field(3, 3, 0.5)}) {
        const auto est = estimate_norms(f, Vector::Zero(static_cast<Eigen::Index>(f.state_dim)), 4.0, 1.0, 4000, 2);
        CHECK(est.sup <= f.norms.sup * (1 + 1e-12));
        CHECK(est.grad_sup <= f.norms.grad_sup * (1 + 1e-12));
        CHECK(est.grad_lip <= f.norms.grad_lip * (1 + 1e-6));
        // the bounds are not loose by more than the sqrt(d) Frobenius factor
        CHECK(est.grad_sup >= 0.3 * f.norms.grad_sup);
    }
}

TEST_CASE("Holder constant of the gradient from Lipschitz and sup bounds") {
    FieldNorms n;
    n.grad_sup = 2.0;
    n.grad_lip = 8.0;
    CHECK(n.grad_holder(1.0) == 8.0);
    CHECK(n.grad_holder(0.5) == doctest::Approx(std::sqrt(8.0 * 4.0)));
    n.grad_holder_sampled = 3.0;
    n.sampled_exponent = 0.5;
    CHECK(n.grad_holder(0.5) == 3.0);
}

TEST_CASE("4-points control: linear maps satisfy it with the operator norm") {
    const auto f = linear_field(two_matrices());
    const auto c = analytic_four_point(f);
    CHECK(c.hat(0.7) == 0.0);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto rep = empirical_four_point_defect(f.channel(i), 2, c, 10000, 3.0, 5 + i);
        CHECK(rep.max_violation <= 1e-15);
        CHECK(rep.samples == 10000);
    }
}

TEST_CASE("4-points control: a map with a large mixed difference violates small constants") {
    const auto f = trig_field(2, 2, 1.0);
    FourPointConstants tiny;
    tiny.hat = [](double x) { return 1e-3 * x; };
    tiny.check = 1e-3;
    CHECK(empirical_four_point_defect(f.channel(0), 2, tiny, 2000, 2.0, 1).max_violation > 0.0);
    const auto c = four_point_scaled(analytic_four_point(f), 1.1);
    CHECK(empirical_four_point_defect(f.channel(0), 2, c, 10000, 2.0, 1).max_violation <= 0.0);
}

TEST_CASE("4-points closure rules") {
    const auto f = trig_field(2, 2, 1.0);
    const auto g = componentwise_trig_field(2, 2, 0.5);
    const auto cf = analytic_four_point(f), cg = analytic_four_point(g);

    const auto sum = four_point_sum(cf, 2.0, cg, -3.0);
    for (double x : {0.0, 0.1, 1.7}) CHECK(sum.hat(x) == doctest::Approx(2 * cf.hat(x) + 3 * cg.hat(x)));
    CHECK(sum.check == doctest::Approx(2 * cf.check + 3 * cg.check));
    auto fs = f.channel(0), gs = g.channel(1);
    auto combo = [&](const Vector& y) -> Vector { return 2.0 * fs(y) - 3.0 * gs(y); };
    CHECK(empirical_four_point_defect(combo, 2, sum, 10000, 2.0, 3).max_violation <= 0.0);

    const double lip_g = g.norms.grad_sup;
    const auto comp = four_point_compose(cf, cg, lip_g);
    for (double x : {0.0, 0.1, 1.7}) CHECK(comp.hat(x) == doctest::Approx(cf.hat(lip_g * x) * lip_g + cf.check * cg.hat(x)));
    CHECK(comp.check == doctest::Approx(cf.check * cg.check));
    auto composed = [&](const Vector& y) -> Vector { return fs(gs(y)); };
    CHECK(empirical_four_point_defect(composed, 2, comp, 10000, 2.0, 4).max_violation <= 0.0);
}

TEST_CASE("4-points inverse of a near-identity map") {
    const auto g = componentwise_trig_field(2, 2, 0.3);
    const auto cg = analytic_four_point(g);
    const auto inv = four_point_inverse(cg, g.norms.grad_sup);
    CHECK(inv.check == doctest::Approx(1.0 / (1.0 - cg.check)));
    CHECK(inv.provenance.find("verify") != std::string::npos);
    CHECK_THROWS_AS(four_point_inverse(cg, 1.0), HypothesisError);
}

TEST_CASE("non-finite norms give a capability error") {
    const auto f = eval_only(trig_field(2, 2));
    CHECK_THROWS_AS(analytic_four_point(f), CapabilityError);
}

TEST_CASE("rotation field needs two state dimensions") {
    CHECK_THROWS_AS(rotation_field(1, 1), StructuralError);
    const auto f = rotation_field(2, 2);
    CHECK(f.norms.estimated);
    CHECK(std::isfinite(f.norms.grad_sup));
}

}
