#include "roughsew/algebra.hpp"
#include "roughsew/errors.hpp"
#include "roughsew/sampling.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace roughsew;

namespace {

// Iterated integrals of a polyline by a fine left-point/midpoint recursion,
// independent of the tensor product code: S2 += (S1 + dX/2) (x) dX and
// S3 += (S2 + ...) (x) dX with each segment cut into `sub` pieces.
struct Quadrature {
    Vector s1;
    Matrix s2;
    std::vector<Matrix> s3;  // s3[i](j, k)
};

Quadrature quadrature(const std::vector<Vector>& pts, int sub) {
    const auto d = pts[0].size();
    Quadrature q{Vector::Zero(d), Matrix::Zero(d, d), std::vector<Matrix>(static_cast<std::size_t>(d), Matrix::Zero(d, d))};
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
        const Vector dx = (pts[s + 1] - pts[s]) / sub;
        for (int k = 0; k < sub; ++k) {
            // exact update of levels 1-2 for a straight piece; level 3 uses the
            // piece's exact level-3 contribution s2 (x) dx + s1 (x) dx(x)dx/2 + dx^3/6
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j)
                    for (Eigen::Index l = 0; l < d; ++l)
                        q.s3[static_cast<std::size_t>(i)](j, l) += q.s2(i, j) * dx[l] + q.s1[i] * dx[j] * dx[l] / 2.0 +
                                                                  dx[i] * dx[j] * dx[l] / 6.0;
            q.s2 += (q.s1 + dx / 2.0) * dx.transpose();
            q.s1 += dx;
        }
    }
    return q;
}

std::vector<Vector> random_polyline(Rng& rng, std::size_t dim, std::size_t n) {
    std::vector<Vector> pts;
    for (std::size_t k = 0; k < n; ++k) pts.push_back(rng.vector(dim, -1.0, 1.0));
    return pts;
}

TensorSeries random_series(Rng& rng, std::size_t dim, int depth) {
    TensorSeries t(dim, depth);
    for (int k = 0; k <= depth; ++k)
        for (auto& c : t.level(k)) c = rng.uniform(-1.0, 1.0);
    return t;
}

}  // namespace

TEST_SUITE("algebra") {

TEST_CASE("identity is neutral and levels have dim^k coordinates") {
    Rng rng(3);
    const auto x = random_series(rng, 3, 3);
    const auto e = TensorSeries::identity(3, 3);
    CHECK(max_abs_difference(x * e, x) == 0.0);
    CHECK(max_abs_difference(e * x, x) == 0.0);
    CHECK(x.level(2).size() == 9);
    CHECK(x.level(3).size() == 27);
}

TEST_CASE("coordinate indexing is row-major with the earliest index first") {
    TensorSeries t(2, 2);
    t({0, 1}) = 5.0;
    CHECK(t.level(2)[1] == 5.0);
    CHECK(t.level2()(0, 1) == 5.0);
    t({1, 0}) = -1.0;
    CHECK(t.level(2)[2] == -1.0);
}

TEST_CASE("segment signature is v^k / k!") {
    Vector v(2);
    v << 0.3, -1.2;
    const auto s = segment_signature(v, 3);
    CHECK(s({0}) == doctest::Approx(0.3));
    CHECK(s({0, 1}) == doctest::Approx(0.3 * -1.2 / 2.0));
    CHECK(s({1, 1, 0}) == doctest::Approx(-1.2 * -1.2 * 0.3 / 6.0));
}

TEST_CASE("two-segment signature matches the closed-form expansion") {
    Vector v(2), w(2);
    v << 0.7, -0.4;
    w << -0.2, 1.1;
    std::vector<Vector> pts{Vector::Zero(2), v, v + w};
    const auto s = piecewise_linear_signature(pts, 3);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
            const double expected2 = v[I] * v[J] / 2 + v[I] * w[J] + w[I] * w[J] / 2;
            CHECK(s({i, j}) == doctest::Approx(expected2).epsilon(1e-14));
            for (std::size_t k = 0; k < 2; ++k) {
                const auto K = static_cast<Eigen::Index>(k);
                const double expected3 = v[I] * v[J] * v[K] / 6 + v[I] * v[J] * w[K] / 2 + v[I] * w[J] * w[K] / 2 +
                                         w[I] * w[J] * w[K] / 6;
                CHECK(s({i, j, k}) == doctest::Approx(expected3).epsilon(1e-14));
            }
        }
}

TEST_CASE("polyline signature agrees with fine-grid quadrature") {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const auto pts = random_polyline(rng, 3, 6);
        const auto q = quadrature(pts, 50);
        const auto s = piecewise_linear_signature(pts, 3);
        CHECK((s.level1() - q.s1).norm() < 1e-12);
        CHECK((s.level2() - q.s2).norm() < 1e-12);
        double err = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t k = 0; k < 3; ++k)
                    err = std::max(err, std::abs(s({i, j, k}) - q.s3[i](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k))));
        CHECK(err < 1e-12);
    }
}

TEST_CASE("counter-clockwise regular polygon: x12 - x21 is twice the enclosed area") {
    const int n = 360;
    std::vector<Vector> pts;
    for (int k = 0; k <= n; ++k) {
        Vector p(2);
        p << std::cos(2 * std::numbers::pi * k / n), std::sin(2 * std::numbers::pi * k / n);
        pts.push_back(p);
    }
    const auto s = piecewise_linear_signature(pts, 2);
    const double area = 0.5 * n * std::sin(2 * std::numbers::pi / n);
    CHECK(s({0, 1}) - s({1, 0}) == doctest::Approx(2 * area).epsilon(1e-12));
    CHECK(s({0, 1}) == doctest::Approx(area).epsilon(1e-12));
}

TEST_CASE("Chen: signature of a concatenation is the product") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = 2 + rng.index(2);
        const int depth = 2 + static_cast<int>(rng.index(2));
        auto pts = random_polyline(rng, dim, 7);
        const std::size_t cut = 1 + rng.index(5);
        const std::vector<Vector> left(pts.begin(), pts.begin() + static_cast<long>(cut) + 1);
        const std::vector<Vector> right(pts.begin() + static_cast<long>(cut), pts.end());
        const auto whole = piecewise_linear_signature(pts, depth);
        CHECK(max_abs_difference(whole, piecewise_linear_signature(left, depth) * piecewise_linear_signature(right, depth)) < 1e-13);
    }
}

TEST_CASE("product is associative") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_series(rng, 3, 3), b = random_series(rng, 3, 3), c = random_series(rng, 3, 3);
        CHECK(max_abs_difference((a * b) * c, a * (b * c)) < 1e-13);
    }
}

TEST_CASE("group inverse is the signature of the reversed path") {
    Rng rng(13);
    auto pts = random_polyline(rng, 3, 5);
    const auto s = piecewise_linear_signature(pts, 3);
    const auto inv = group_inverse(s);
    CHECK(max_abs_difference(s * inv, TensorSeries::identity(3, 3)) < 1e-13);
    CHECK(max_abs_difference(inv * s, TensorSeries::identity(3, 3)) < 1e-13);
    std::vector<Vector> rev(pts.rbegin(), pts.rend());
    CHECK(max_abs_difference(inv, piecewise_linear_signature(rev, 3)) < 1e-13);
}

TEST_CASE("group inverse rejects elements with level 0 different from 1") {
    TensorSeries t(2, 2);
    CHECK_THROWS_AS(group_inverse(t), StructuralError);
}

TEST_CASE("signatures are weakly geometric; perturbed symmetric parts are not") {
    Rng rng(17);
    auto s = piecewise_linear_signature(random_polyline(rng, 3, 4), 2);
    CHECK(weak_geometric_defect(s) < 1e-14);
    s({1, 2}) += 0.25;
    CHECK(weak_geometric_defect(s) == doctest::Approx(0.25));
    s({2, 1}) -= 0.25;  // antisymmetric change keeps the defect zero
    CHECK(weak_geometric_defect(s) < 1e-14);
}

TEST_CASE("mismatched dimension or depth is a structural error") {
    CHECK_THROWS_AS(tensor_product(TensorSeries(2, 2), TensorSeries(3, 2)), StructuralError);
    CHECK_THROWS_AS(tensor_product(TensorSeries(2, 2), TensorSeries(2, 3)), StructuralError);
}

TEST_CASE("truncation keeps lower levels") {
    Rng rng(19);
    const auto x = random_series(rng, 2, 3);
    const auto t = x.truncated(2);
    CHECK(t.depth() == 2);
    CHECK(max_abs_difference(t, x) == 0.0);
    CHECK(level_max_norm(x, 1) == std::max(std::abs(x({0})), std::abs(x({1}))));
}

}
