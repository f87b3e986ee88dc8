#include "roughsew/errors.hpp"
#include "roughsew/flows.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace roughsew;

namespace {

// psi_{t,s}(a) = exp(lambda (t - s)) a: a flow.
FlowFamily exponential_flow(double lambda) {
    return FlowFamily{1, 1.0, "exp", Orientation::forward,
                      [lambda](double s, double t, const Vector& a) -> Vector { return std::exp(lambda * (t - s)) * a; }};
}

// phi_{t,s}(a) = (1 + (t - s)) a: an almost flow that is not a flow.
FlowFamily euler_growth() {
    return FlowFamily{1, 1.0, "euler", Orientation::forward,
                      [](double s, double t, const Vector& a) -> Vector { return (1.0 + (t - s)) * a; }};
}

Vector scalar(double x) { return Vector::Constant(1, x); }

SampleSpec one_dim_spec() {
    SampleSpec spec;
    spec.box.center = Vector::Zero(1);
    spec.box.radius = 1.0;
    spec.points = 4;
    return spec;
}

}  // namespace

TEST_SUITE("flows") {

TEST_CASE("partition validation") {
    CHECK_THROWS_AS(Partition({0.0}), StructuralError);
    CHECK_THROWS_AS(Partition({0.1, 0.5}), StructuralError);
    CHECK_THROWS_AS(Partition({0.0, 0.5, 0.5}), StructuralError);
    const auto pi = Partition::dyadic(2.0, 3);
    CHECK(pi.intervals() == 8);
    CHECK(pi.mesh() == 0.25);
    CHECK(pi.horizon() == 2.0);
}

TEST_CASE("iterated product uses from, the interior partition points and to") {
    const auto pi = Partition::dyadic(1.0, 2);
    const auto phi = euler_growth();
    const double fwd = iterated_product(phi, pi, 0.1, 0.8, scalar(1.0))[0];
    CHECK(fwd == doctest::Approx(1.15 * 1.25 * 1.25 * 1.05).epsilon(1e-15));
    const double back = iterated_product(phi, pi, 0.8, 0.1, scalar(1.0))[0];
    CHECK(back == doctest::Approx(0.95 * 0.75 * 0.75 * 0.85).epsilon(1e-15));
    CHECK(iterated_product(phi, pi, 0.3, 0.3, scalar(2.0))[0] == 2.0);
    // endpoints on partition points
    CHECK(iterated_product(phi, pi, 0.0, 1.0, scalar(1.0))[0] == doctest::Approx(std::pow(1.25, 4)));
}

TEST_CASE("a flow is its own iterated product and has zero defects") {
    const auto psi = exponential_flow(0.7);
    const auto pi = Partition::dyadic(1.0, 5);
    CHECK(iterated_product(psi, pi, 0.0, 1.0, scalar(1.0))[0] == doctest::Approx(std::exp(0.7)).epsilon(1e-14));
    const auto grid = uniform_grid(1.0, 16);
    const Remainder w{1.5};
    const auto omega = make_holder_control(1.0);
    CHECK(almost_flow_defect(psi, grid, one_dim_spec(), w, omega).value < 1e-12);
    CHECK(flow_property_defect(psi, grid, one_dim_spec()).value < 1e-14);
    CHECK(galaxy_distance(psi, iterated_family(psi, pi), grid, one_dim_spec(), w, omega).value < 1e-12);
}

TEST_CASE("almost-flow defect of the Euler family matches its closed form") {
    // (1 + (t-s))(1 + (s-r)) - (1 + (t-r)) = (t-s)(s-r); divided by (t-r)^theta.
    const auto phi = euler_growth();
    const auto grid = uniform_grid(1.0, 4);
    const Remainder w{1.5};
    const auto rep = almost_flow_defect(phi, grid, one_dim_spec(), w, make_holder_control(1.0));
    double oracle = 0.0;
    const double radius = 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j)
            for (std::size_t k = j + 1; k < grid.size(); ++k)
                oracle = std::max(oracle, (grid[k] - grid[j]) * (grid[j] - grid[i]) / std::pow(grid[k] - grid[i], 1.5));
    CHECK(rep.value <= oracle * radius * (1 + 1e-12));
    CHECK(rep.value >= 0.5 * oracle);  // sampled points have |a| <= 1
    CHECK(rep.times.size() == 3);
    CHECK(rep.quantity == "almost_flow_M");
}

TEST_CASE("uniform Lipschitz estimate of a linear flow") {
    const auto psi = exponential_flow(0.5);
    const auto pi = Partition::dyadic(1.0, 4);
    const auto rep = ul_lipschitz_estimate(psi, pi, one_dim_spec());
    CHECK(rep.value == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
}

TEST_CASE("sewing gap vanishes for a flow and the bound shape needs a positive denominator") {
    const auto psi = exponential_flow(0.3);
    SewingParameters P;
    P.p = 2.0;
    P.gamma = 1.0;
    P.horizon = 1e-3;
    const auto pi = Partition::dyadic(1.0, 3);
    const auto gap = sewing_gap(psi, pi, uniform_grid(1.0, 8), one_dim_spec(), P, make_holder_control(1.0), 2.0);
    CHECK(gap.gap.value < 1e-12);
    CHECK(gap.denominator == doctest::Approx(1 - (1 + P.delta_T()) * P.remainder().kappa() - P.delta_T()));
    CHECK(gap.bound_shape == doctest::Approx(4.0 / gap.denominator));
    P.horizon = 1.0;
    const auto wide = sewing_gap(psi, pi, uniform_grid(1.0, 8), one_dim_spec(), P, make_holder_control(1.0), 2.0);
    CHECK(std::isnan(wide.bound_shape));
}

TEST_CASE("Lipschitz gap of a linear almost flow") {
    const auto phi = euler_growth();
    const auto pi = Partition::dyadic(1.0, 4);
    const auto rep = lipschitz_gap_estimate(phi, pi, uniform_grid(1.0, 4), one_dim_spec(), Remainder{1.5},
                                            make_holder_control(1.0));
    CHECK(std::isfinite(rep.value));
    CHECK(rep.value > 0.0);
}

TEST_CASE("relative drift and refinement studies") {
    const std::vector<double> a{1.0, 1.1, 1.05};
    CHECK(relative_drift(a) == doctest::Approx(0.1));
    const std::vector<double> b{0.0, 1.0};
    CHECK(relative_drift(b) == std::numeric_limits<double>::infinity());
    const std::vector<double> c{0.0, 0.0};
    CHECK(relative_drift(c) == 0.0);
    const std::vector<int> levels{2, 3, 4};
    const auto study = refinement_study([](std::span<const double> g) { return static_cast<double>(g.size()); }, 1.0, levels);
    CHECK(study.values == std::vector<double>{5, 9, 17});
    CHECK(study.drift == doctest::Approx(17.0 / 5.0 - 1.0));
    CHECK(study.finite);
}

TEST_CASE("identity family") {
    const auto id = identity_family(2, 1.0);
    Vector a(2);
    a << 1, 2;
    CHECK(id(0.1, 0.9, a) == a);
}

}
