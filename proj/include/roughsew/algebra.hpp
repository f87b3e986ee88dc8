#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace roughsew {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Element of the truncated tensor algebra T^N(R^dim), levels 0..N.
//
// Level k holds dim^k coordinates x^I for multi-indices I = (i_1, ..., i_k),
// stored row-major: offset(I) = ((i_1 * dim + i_2) * dim + ...) * dim + i_k.
// For the signature of a path the first index is the earliest increment:
//
//     x^{(i_1,...,i_k)}_{s,t} = int_{s < u_1 < ... < u_k < t} dx^{i_1}_{u_1} ... dx^{i_k}_{u_k},
//
// so x^{(1,2)} of a counter-clockwise loop in the (1,2)-plane is its
// enclosed area. Chen's relation then reads x_{r,t} = x_{r,s} (x) x_{s,t}.
class TensorSeries {
public:
    TensorSeries(std::size_t dim, int depth);

    static TensorSeries identity(std::size_t dim, int depth);

    std::size_t dim() const noexcept { return dim_; }
    int depth() const noexcept { return depth_; }

    std::span<const double> level(int k) const;
    std::span<double> level(int k);

    // Coordinate for a multi-index of length <= depth (empty index is level 0).
    double coordinate(std::span<const std::size_t> index) const;
    double& coordinate(std::span<const std::size_t> index);
    double operator()(std::initializer_list<std::size_t> index) const;
    double& operator()(std::initializer_list<std::size_t> index);

    // Level 1 as a vector, level 2 as a dim x dim matrix (row i, column j = x^{ij}).
    Vector level1() const;
    Matrix level2() const;

    TensorSeries truncated(int depth) const;

    std::span<const double> data() const noexcept { return coeffs_; }

private:
    std::size_t offset(int k) const { return offsets_[static_cast<std::size_t>(k)]; }

    std::size_t dim_;
    int depth_;
    std::vector<std::size_t> offsets_;
    std::vector<double> coeffs_;
};

// Truncated product c^I = sum over splittings I = (J, K) of a^J b^K.
// Throws StructuralError when dimension or depth differ.
TensorSeries tensor_product(const TensorSeries& a, const TensorSeries& b);
TensorSeries operator*(const TensorSeries& a, const TensorSeries& b);

// Inverse of a group-like element (level 0 = 1): sum_k (1 - g)^{(x)k}.
// For a path signature this is the signature of the reversed path.
TensorSeries group_inverse(const TensorSeries& g);

// Signature of a straight segment: level k is v^{(x)k} / k!.
TensorSeries segment_signature(const Vector& increment, int depth);

// Chen product of the per-segment signatures of a polyline.
TensorSeries piecewise_linear_signature(std::span<const Vector> points, int depth);

// max_{i,j} |x^{ij} + x^{ji} - x^i x^j| for a depth-2 element with level 0 = 1.
double weak_geometric_defect(const TensorSeries& x);

// Coordinate-wise maximum absolute difference over all shared levels.
double max_abs_difference(const TensorSeries& a, const TensorSeries& b);

// Largest absolute coordinate of level k.
double level_max_norm(const TensorSeries& x, int k);

}  // namespace roughsew
