#include "roughsew/sampling.hpp"

#include <algorithm>
#include <set>

namespace roughsew {

Vector Rng::vector(std::size_t dim, double lo, double hi) {
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(lo, hi);
    return v;
}

std::vector<Vector> sample_points(const SampleBox& box, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vector> out;
    out.reserve(n);
    const auto dim = static_cast<std::size_t>(box.center.size());
    for (std::size_t k = 0; k < n; ++k) out.push_back(box.center + rng.vector(dim, -box.radius, box.radius));
    return out;
}

namespace {

// Indices of a subgrid of at most m+1 evenly spread points, always including both ends.
std::vector<std::size_t> coarse_subgrid(std::size_t n, std::size_t m) {
    std::vector<std::size_t> idx;
    if (n == 0) return idx;
    if (n <= m + 1) {
        for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
        return idx;
    }
    for (std::size_t k = 0; k <= m; ++k) idx.push_back((k * (n - 1)) / m);
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n, std::size_t max_pairs,
                                                              std::uint64_t seed) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (n < 2) return out;
    const std::size_t total = n * (n - 1) / 2;
    if (total <= max_pairs) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) out.emplace_back(i, j);
        return out;
    }
    std::set<std::pair<std::size_t, std::size_t>> chosen;
    for (std::size_t i = 0; i + 1 < n; ++i) chosen.emplace(i, i + 1);
    auto sub = coarse_subgrid(n, 32);
    for (std::size_t a = 0; a < sub.size(); ++a)
        for (std::size_t b = a + 1; b < sub.size(); ++b) chosen.emplace(sub[a], sub[b]);
    Rng rng(seed);
    std::size_t attempts = 0;
    while (chosen.size() < max_pairs && attempts < 20 * max_pairs) {
        ++attempts;
        std::size_t i = rng.index(n);
        std::size_t j = rng.index(n);
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        chosen.emplace(i, j);
    }
    out.assign(chosen.begin(), chosen.end());
    return out;
}

std::vector<std::array<std::size_t, 3>> sample_triples(std::size_t n, std::size_t max_triples,
                                                       std::uint64_t seed) {
    std::vector<std::array<std::size_t, 3>> out;
    if (n < 3) return out;
    const std::size_t total = n * (n - 1) * (n - 2) / 6;
    if (total <= max_triples) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                for (std::size_t k = j + 1; k < n; ++k) out.push_back({i, j, k});
        return out;
    }
    std::set<std::array<std::size_t, 3>> chosen;
    for (std::size_t i = 0; i + 2 < n; ++i) chosen.insert({i, i + 1, i + 2});
    auto sub = coarse_subgrid(n, 12);
    for (std::size_t a = 0; a < sub.size(); ++a)
        for (std::size_t b = a + 1; b < sub.size(); ++b)
            for (std::size_t c = b + 1; c < sub.size(); ++c) chosen.insert({sub[a], sub[b], sub[c]});
    Rng rng(seed);
    std::size_t attempts = 0;
    while (chosen.size() < max_triples && attempts < 20 * max_triples) {
        ++attempts;
        std::array<std::size_t, 3> t{rng.index(n), rng.index(n), rng.index(n)};
        std::sort(t.begin(), t.end());
        if (t[0] == t[1] || t[1] == t[2]) continue;
        chosen.insert(t);
    }
    out.assign(chosen.begin(), chosen.end());
    return out;
}

}  // namespace roughsew
