#pragma once

#include "roughsew/algebra.hpp"
#include "roughsew/driver.hpp"
#include "roughsew/sampling.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace roughsew {

// Forward families move a point from an earlier time to a later one; reverse
// families move it backwards.
enum class Orientation { forward, reverse };

// Two-time family phi. flow(from, to, a) is phi_{to,from}(a), the image at
// time `to` of a point sitting at time `from`.
struct FlowFamily {
    std::size_t dim = 0;
    double horizon = 1.0;
    std::string name;
    Orientation orientation = Orientation::forward;
    std::function<Vector(double, double, const Vector&)> step;

    Vector operator()(double from, double to, const Vector& a) const {
        if (from == to) return a;
        return step(from, to, a);
    }
};

FlowFamily identity_family(std::size_t dim, double horizon);

// Sorted times 0 = t_0 < ... < t_n = T.
class Partition {
public:
    explicit Partition(std::vector<double> times);

    // 2^level intervals of equal length.
    static Partition dyadic(double horizon, int level);

    std::span<const double> times() const noexcept { return times_; }
    std::size_t intervals() const noexcept { return times_.size() - 1; }
    double horizon() const noexcept { return times_.back(); }
    double mesh() const;

private:
    std::vector<double> times_;
};

// Composition of phi over `from`, the partition points strictly between
// `from` and `to`, and `to`. The boundary stubs are the partial steps
// phi_{t_i, from} and phi_{to, t_j}; with no interior point this is
// phi(from, to). Either direction is accepted.
Vector iterated_product(const FlowFamily& phi, const Partition& pi, double from, double to, const Vector& a);

// phi^pi as a family.
FlowFamily iterated_family(const FlowFamily& phi, const Partition& pi);

// How sup-norm constants are sampled: grid pairs or triples, times points in a box.
struct SampleSpec {
    SampleBox box;
    std::size_t points = 8;
    std::size_t max_pairs = 512;
    std::size_t max_triples = 512;
    std::uint64_t seed = 1;
};

// A sampled lower bound for a sup, with the witness where it was attained.
struct DefectReport {
    std::string quantity;
    double value = 0.0;
    std::vector<double> times;
    Vector point;
    std::size_t samples = 0;
    SampleSpec spec;
};

// sup |phi_{t,s}(phi_{s,r}(a)) - phi_{t,r}(a)| / varpi(omega_{r,t}) over grid triples.
DefectReport almost_flow_defect(const FlowFamily& phi, std::span<const double> grid, const SampleSpec& spec,
                                const Remainder& varpi, const Control& omega);

struct SewingGapReport {
    DefectReport gap;
    // 2M / (1 - (1 + delta_T) kappa - delta_T); NaN when M was not given or
    // the denominator is not positive.
    double bound_shape = 0.0;
    double denominator = 0.0;
};

// sup |phi^pi_{t,s}(a) - phi_{t,s}(a)| / varpi(omega_{s,t}) over grid pairs.
SewingGapReport sewing_gap(const FlowFamily& phi, const Partition& pi, std::span<const double> grid,
                           const SampleSpec& spec, const SewingParameters& params, const Control& omega,
                           std::optional<double> almost_flow_constant = std::nullopt);

// max |phi^pi_{t,s}(a) - phi^pi_{t,s}(b)| / |a - b| over (s,t) in pi and sampled point pairs.
DefectReport ul_lipschitz_estimate(const FlowFamily& phi, const Partition& pi, const SampleSpec& spec);

// sup |psi_{t,s}(psi_{s,r}(a)) - psi_{t,r}(a)| over grid triples.
DefectReport flow_property_defect(const FlowFamily& psi, std::span<const double> grid, const SampleSpec& spec);

// sup |phi_{t,s}(a) - psi_{t,s}(a)| / varpi(omega_{s,t}) over grid pairs.
DefectReport galaxy_distance(const FlowFamily& phi, const FlowFamily& psi, std::span<const double> grid,
                             const SampleSpec& spec, const Remainder& varpi, const Control& omega);

// sup |(phi^pi - phi)_{t,s}(a) - (phi^pi - phi)_{t,s}(b)| / (|a - b| varpi(omega_{s,t})).
DefectReport lipschitz_gap_estimate(const FlowFamily& phi, const Partition& pi, std::span<const double> grid,
                                    const SampleSpec& spec, const Remainder& varpi, const Control& omega);

// A quantity evaluated on the dyadic grids of several levels.
struct RefinementStudy {
    std::vector<int> levels;
    std::vector<double> values;
    // max / min - 1 over the levels; infinite when some value is 0 and another is not.
    double drift = 0.0;
    bool finite = true;
};

RefinementStudy refinement_study(const std::function<double(std::span<const double>)>& quantity, double horizon,
                                 std::span<const int> levels);

// Relative spread max/min - 1 of positive values.
double relative_drift(std::span<const double> values);

}  // namespace roughsew
