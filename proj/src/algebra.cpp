#include "roughsew/algebra.hpp"

#include "roughsew/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace roughsew {

TensorSeries::TensorSeries(std::size_t dim, int depth) : dim_(dim), depth_(depth) {
    if (dim == 0) throw StructuralError("TensorSeries: dimension must be positive");
    if (depth < 0) throw StructuralError("TensorSeries: depth must be non-negative");
    offsets_.resize(static_cast<std::size_t>(depth) + 2);
    std::size_t size = 0;
    std::size_t block = 1;
    for (int k = 0; k <= depth; ++k) {
        offsets_[static_cast<std::size_t>(k)] = size;
        size += block;
        block *= dim;
    }
    offsets_.back() = size;
    coeffs_.assign(size, 0.0);
}

TensorSeries TensorSeries::identity(std::size_t dim, int depth) {
    TensorSeries out(dim, depth);
    out.coeffs_[0] = 1.0;
    return out;
}

std::span<const double> TensorSeries::level(int k) const {
    if (k < 0 || k > depth_) throw StructuralError("TensorSeries: level out of range");
    const auto b = offset(k);
    return {coeffs_.data() + b, offset(k + 1) - b};
}

std::span<double> TensorSeries::level(int k) {
    if (k < 0 || k > depth_) throw StructuralError("TensorSeries: level out of range");
    const auto b = offset(k);
    return {coeffs_.data() + b, offset(k + 1) - b};
}

double TensorSeries::coordinate(std::span<const std::size_t> index) const {
    return const_cast<TensorSeries*>(this)->coordinate(index);
}

double& TensorSeries::coordinate(std::span<const std::size_t> index) {
    const int k = static_cast<int>(index.size());
    if (k > depth_) throw StructuralError("TensorSeries: multi-index longer than depth");
    std::size_t flat = 0;
    for (auto i : index) {
        if (i >= dim_) throw StructuralError("TensorSeries: letter out of range");
        flat = flat * dim_ + i;
    }
    return coeffs_[offset(k) + flat];
}

double TensorSeries::operator()(std::initializer_list<std::size_t> index) const {
    return coordinate(std::span<const std::size_t>(index.begin(), index.size()));
}

double& TensorSeries::operator()(std::initializer_list<std::size_t> index) {
    return coordinate(std::span<const std::size_t>(index.begin(), index.size()));
}

Vector TensorSeries::level1() const {
    auto l = level(1);
    return Eigen::Map<const Vector>(l.data(), static_cast<Eigen::Index>(l.size()));
}

Matrix TensorSeries::level2() const {
    auto l = level(2);
    const auto n = static_cast<Eigen::Index>(dim_);
    // Row-major storage maps onto the transpose of Eigen's default layout.
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        l.data(), n, n);
}

TensorSeries TensorSeries::truncated(int depth) const {
    if (depth > depth_) throw CapabilityError("TensorSeries: cannot extend depth by truncation");
    TensorSeries out(dim_, depth);
    std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
    return out;
}

TensorSeries tensor_product(const TensorSeries& a, const TensorSeries& b) {
    if (a.dim() != b.dim() || a.depth() != b.depth()) {
        throw StructuralError("tensor_product: dimension/depth mismatch (" +
                              std::to_string(a.dim()) + "," + std::to_string(a.depth()) + ") vs (" +
                              std::to_string(b.dim()) + "," + std::to_string(b.depth()) + ")");
    }
    TensorSeries c(a.dim(), a.depth());
    for (int k = 0; k <= a.depth(); ++k) {
        auto ck = c.level(k);
        for (int m = 0; m <= k; ++m) {
            auto am = a.level(m);
            auto bn = b.level(k - m);
            const std::size_t nb = bn.size();
            for (std::size_t i = 0; i < am.size(); ++i) {
                const double ai = am[i];
                if (ai == 0.0) continue;
                double* dst = ck.data() + i * nb;
                for (std::size_t j = 0; j < nb; ++j) dst[j] += ai * bn[j];
            }
        }
    }
    return c;
}

TensorSeries operator*(const TensorSeries& a, const TensorSeries& b) { return tensor_product(a, b); }

TensorSeries group_inverse(const TensorSeries& g) {
    if (g.level(0)[0] != 1.0) throw StructuralError("group_inverse: level 0 must be 1");
    TensorSeries y(g.dim(), g.depth());
    for (int k = 1; k <= g.depth(); ++k) {
        auto src = g.level(k);
        auto dst = y.level(k);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = -src[i];
    }
    TensorSeries result = TensorSeries::identity(g.dim(), g.depth());
    TensorSeries term = result;
    for (int n = 1; n <= g.depth(); ++n) {
        term = term * y;
        for (int k = n; k <= g.depth(); ++k) {
            auto src = term.level(k);
            auto dst = result.level(k);
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
        }
    }
    return result;
}

TensorSeries segment_signature(const Vector& increment, int depth) {
    if (depth < 1) throw StructuralError("segment_signature: depth must be >= 1");
    const auto dim = static_cast<std::size_t>(increment.size());
    TensorSeries out = TensorSeries::identity(dim, depth);
    for (int k = 1; k <= depth; ++k) {
        auto prev = out.level(k - 1);
        auto cur = out.level(k);
        const double inv_k = 1.0 / k;
        for (std::size_t i = 0; i < prev.size(); ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                cur[i * dim + j] = prev[i] * increment[static_cast<Eigen::Index>(j)] * inv_k;
            }
        }
    }
    return out;
}

TensorSeries piecewise_linear_signature(std::span<const Vector> points, int depth) {
    if (points.size() < 2) throw StructuralError("piecewise_linear_signature: need at least 2 vertices");
    TensorSeries sig = segment_signature(points[1] - points[0], depth);
    for (std::size_t k = 2; k < points.size(); ++k) {
        sig = tensor_product(sig, segment_signature(points[k] - points[k - 1], depth));
    }
    return sig;
}

double weak_geometric_defect(const TensorSeries& x) {
    if (x.depth() < 2) throw StructuralError("weak_geometric_defect: depth must be >= 2");
    const std::size_t n = x.dim();
    auto l1 = x.level(1);
    auto l2 = x.level(2);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            worst = std::max(worst, std::abs(l2[i * n + j] + l2[j * n + i] - l1[i] * l1[j]));
        }
    }
    return worst;
}

double max_abs_difference(const TensorSeries& a, const TensorSeries& b) {
    if (a.dim() != b.dim()) throw StructuralError("max_abs_difference: dimension mismatch");
    const int depth = std::min(a.depth(), b.depth());
    double worst = 0.0;
    for (int k = 0; k <= depth; ++k) {
        auto la = a.level(k);
        auto lb = b.level(k);
        for (std::size_t i = 0; i < la.size(); ++i) worst = std::max(worst, std::abs(la[i] - lb[i]));
    }
    return worst;
}

double level_max_norm(const TensorSeries& x, int k) {
    double m = 0.0;
    for (double v : x.level(k)) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace roughsew
