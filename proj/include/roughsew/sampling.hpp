#pragma once

#include "roughsew/algebra.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace roughsew {

// Seeded generator with a platform-independent mapping to [0, 1), so that
// sampled reports are bit-reproducible for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
    Vector vector(std::size_t dim, double lo, double hi);

private:
    std::mt19937_64 engine_;
};

// Axis-aligned box center +/- radius in which sample points are drawn.
struct SampleBox {
    Vector center;
    double radius = 1.0;
};

// n points drawn uniformly in the box.
std::vector<Vector> sample_points(const SampleBox& box, std::size_t n, std::uint64_t seed);

// Index pairs i < j into a grid of n times. All pairs when they fit in
// max_pairs; otherwise all successive pairs, all pairs of a coarse subgrid
// (which always contains the widest pair) and a seeded random fill.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n, std::size_t max_pairs,
                                                              std::uint64_t seed);

// Index triples i < j < k, same policy as sample_pairs.
std::vector<std::array<std::size_t, 3>> sample_triples(std::size_t n, std::size_t max_triples,
                                                       std::uint64_t seed);

}  // namespace roughsew
