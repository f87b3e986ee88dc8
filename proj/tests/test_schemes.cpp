#include "roughsew/errors.hpp"
#include "roughsew/schemes.hpp"
#include "roughsew/sampling.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

using namespace roughsew;

namespace {

std::vector<Matrix> two_matrices() {
    Matrix B1(2, 2), B2(2, 2);
    B1 << 0.3, -0.5, 0.2, 0.1;
    B2 << -0.4, 0.2, 0.6, 0.3;
    return {B1, B2};
}

Matrix area_generator() {
    Matrix A(2, 2);
    A << 0, 1, -1, 0;
    return A;
}

SewingParameters params(double p, double T = 1.0) {
    SewingParameters P;
    P.p = p;
    P.gamma = 1.0;
    P.horizon = T;
    return P;
}

Vector start() {
    Vector a(2);
    a << 0.8, -0.3;
    return a;
}

}  // namespace

TEST_SUITE("schemes") {

TEST_CASE("scheme names round-trip") {
    for (const auto& n : scheme_names()) CHECK(SchemeSpec::parse(n).name() == n);
    CHECK_THROWS_AS(SchemeSpec::parse("rk45"), StructuralError);
    CHECK_THROWS_AS(SchemeSpec::parse("euler7").validate(), StructuralError);
}

TEST_CASE("Davie step on a pure-area driver with linear fields") {
    const auto B = two_matrices();
    const auto f = linear_field(B);
    const auto x = pure_area_driver(area_generator(), params(2.5), make_holder_control(1.0));
    const auto phi = davie_almost_flow(f, x);
    const Vector a = start();
    // x^{01} = (t-s), x^{10} = -(t-s): a + (t-s)(B_1 B_0 - B_0 B_1) a
    const Vector expected = a + 0.4 * (B[1] * B[0] - B[0] * B[1]) * a;
    CHECK((phi(0.1, 0.5, a) - expected).norm() < 1e-15);
    CHECK(phi(0.3, 0.3, a) == a);
}

TEST_CASE("Euler schemes along a straight segment are Taylor polynomials of exp") {
    const auto B = two_matrices();
    const auto f = linear_field(B);
    Vector v0(2), v1(2);
    v0 << 0.0, 0.0;
    v1 << 0.6, -0.9;
    const auto x = piecewise_linear_driver({v0, v1}, params(2.0), make_holder_control(1.0), 3);
    const Matrix M = 0.6 * B[0] - 0.9 * B[1];
    const Vector a = start();
    const Matrix I = Matrix::Identity(2, 2);
    CHECK((step_n_euler(f, x, 1)(0.0, 1.0, a) - (I + M) * a).norm() < 1e-14);
    CHECK((step_n_euler(f, x, 2)(0.0, 1.0, a) - (I + M + M * M / 2) * a).norm() < 1e-14);
    CHECK((step_n_euler(f, x, 3)(0.0, 1.0, a) - (I + M + M * M / 2 + M * M * M / 6) * a).norm() < 1e-14);
    CHECK((davie_almost_flow(f, x)(0.0, 1.0, a) - (I + M + M * M / 2) * a).norm() < 1e-14);
}

TEST_CASE("Euler order above the driver depth is a capability error") {
    const auto f = linear_field(two_matrices());
    const auto x = pure_area_driver(area_generator(), params(2.5), make_holder_control(1.0));
    CHECK_THROWS_AS(step_n_euler(f, x, 3), CapabilityError);
}

TEST_CASE("reverse-time steps use the inverse increment") {
    Rng rng(2);
    std::vector<Vector> v;
    for (int k = 0; k < 4; ++k) v.push_back(rng.vector(2, -1, 1));
    const auto x = piecewise_linear_driver(v, params(2.0), make_holder_control(1.0), 3);
    CHECK(max_abs_difference(driver_increment(x, 0.7, 0.2), group_inverse(x(0.2, 0.7))) < 1e-15);
    CHECK(max_abs_difference(driver_increment(x, 0.2, 0.7), x(0.2, 0.7)) == 0.0);
}

TEST_CASE("RK4 on a linear ODE matches the matrix exponential") {
    Matrix M(2, 2);
    M << -0.5, 1.2, -0.7, 0.1;
    const Vector a = start();
    const Vector y = rk4_time_one([&](const Vector& z) -> Vector { return M * z; }, a, 64);
    const Vector oracle = M.exp() * a;
    // global RK4 error ~ |M|^5 h^4 / 120 per unit time
    const double bound = std::pow(M.norm(), 5) * std::pow(1.0 / 64, 4) / 120 * a.norm() * std::exp(M.norm());
    CHECK((y - oracle).norm() < bound);
    CHECK_THROWS_AS(rk4_time_one([](const Vector& z) -> Vector { return z * 1e300; }, a, 4), IntegratorError);
}

TEST_CASE("log-ODE step on a pure-area driver is exp of the bracket term") {
    const auto B = two_matrices();
    const auto f = linear_field(B);
    const auto x = pure_area_driver(area_generator(), params(2.5), make_holder_control(1.0));
    const auto chi = bailleul_almost_flow(f, x, 32);
    const Matrix C = B[1] * B[0] - B[0] * B[1];
    const Vector a = start();
    CHECK((chi(0.0, 1.0, a) - C.exp() * a).norm() < 1e-8);
    CHECK((chi(1.0, 0.0, a) - (-C).exp() * a).norm() < 1e-8);
    // a difference of maps: evaluated through step, which vanishes on the diagonal
    const auto eps = bailleul_remainder(f, x, 32);
    CHECK(eps.step(0.4, 0.4, a).norm() == 0.0);
    CHECK((eps.step(0.0, 1.0, a) - (chi(0.0, 1.0, a) - davie_almost_flow(f, x)(0.0, 1.0, a))).norm() < 1e-15);
}

TEST_CASE("axis loop path reproduces level 1 and the area, with the stated length") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector v = rng.vector(3, -1, 1);
        Matrix G = Matrix::Zero(3, 3);
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = i + 1; j < 3; ++j) {
                G(i, j) = rng.uniform(-1, 1);
                G(j, i) = -G(i, j);
            }
        const auto pts = axis_loop_path(v, G);
        const auto sig = piecewise_linear_signature(pts, 2);
        CHECK((sig.level1() - v).norm() < 1e-14);
        const Matrix anti = (sig.level2() - sig.level2().transpose()) / 2;
        CHECK((anti - G).norm() < 1e-13);
        double len = 0.0;
        for (std::size_t k = 1; k < pts.size(); ++k) len += (pts[k] - pts[k - 1]).norm();
        double bound = v.norm();
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = i + 1; j < 3; ++j) bound += 4 * std::sqrt(std::abs(G(i, j)));
        CHECK(len <= bound * (1 + 1e-12));
        CHECK(axis_loop_length(v, G) == doctest::Approx(bound));
    }
    Matrix S = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(axis_loop_path(Vector::Zero(2), S), StructuralError);
}

TEST_CASE("solving along a polyline with linear fields is a product of exponentials") {
    const auto B = two_matrices();
    const auto f = linear_field(B);
    std::vector<Vector> pts(3, Vector::Zero(2));
    pts[1] << 0.5, 0.2;
    pts[2] << -0.1, 0.7;
    Matrix E = Matrix::Identity(2, 2);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const Vector d = pts[k] - pts[k - 1];
        E = Matrix(d[0] * B[0] + d[1] * B[1]).exp() * E;
    }
    const Vector a = start();
    CHECK((solve_along_polyline(f, pts, a, 32) - E * a).norm() < 1e-8);
}

TEST_CASE("Friz-Victoir step on a pure-area driver approximates exp of the bracket") {
    const auto B = two_matrices();
    const auto f = linear_field(B);
    const auto x = pure_area_driver(area_generator(), params(2.5), make_holder_control(1.0));
    const auto fv = friz_victoir_almost_flow(f, x, 32);
    const Matrix C = B[1] * B[0] - B[0] * B[1];
    const Vector a = start();
    // local error is third order in the loop side sqrt(h)
    for (double h : {1e-2, 1e-4}) {
        const double err = (fv(0.0, h, a) - Matrix(h * C).exp() * a).norm();
        CHECK(err < 5.0 * std::pow(h, 1.5));
    }
}

TEST_CASE("driven ODE reference: straight line and kinked polyline") {
    const auto B = two_matrices();
    const auto f = linear_field(B);
    Vector vel(2);
    vel << 0.4, -0.8;
    const Vector a = start();
    const Vector oracle = Matrix(2.0 * (0.4 * B[0] - 0.8 * B[1])).exp() * a;
    CHECK((ode_reference(f, line_path(vel), 0.0, 2.0, a, 1000) - oracle).norm() < 1e-12);

    std::vector<Vector> pts(4, Vector::Zero(2));
    pts[1] << 1.0, 0.0;
    pts[2] << 1.0, 1.0;
    pts[3] << 0.0, 1.0;
    const auto path = polyline_path(pts, 1.0);
    const Matrix E = Matrix(-B[0]).exp() * Matrix(B[1]).exp() * Matrix(B[0]).exp();
    CHECK((ode_reference(f, path, 0.0, 1.0, a, 3000) - E * a).norm() < 1e-12);
    CHECK_THROWS_AS(ode_reference(f, path, 0.5, 0.1, a, 10), StructuralError);
}

TEST_CASE("make_scheme dispatches on the scheme kind") {
    const auto f = linear_field(two_matrices());
    const auto x = pure_area_driver(area_generator(), params(2.5), make_holder_control(1.0));
    for (const char* n : {"davie", "euler1", "euler2", "bailleul", "friz_victoir"}) {
        const auto phi = make_scheme(SchemeSpec::parse(n), f, x);
        CHECK(phi.dim == 2);
        CHECK(phi(0.0, 0.0, start()) == start());
    }
    CHECK_THROWS_AS(make_scheme(SchemeSpec::parse("euler3"), f, x), CapabilityError);
}

}
