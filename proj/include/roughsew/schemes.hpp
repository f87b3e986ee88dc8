#pragma once

#include "roughsew/driver.hpp"
#include "roughsew/fields.hpp"
#include "roughsew/flows.hpp"

#include <functional>
#include <string>
#include <vector>

namespace roughsew {

enum class SchemeKind { davie, euler, bailleul, friz_victoir };

struct SchemeSpec {
    SchemeKind kind = SchemeKind::davie;
    int n = 2;              // order, euler only
    int ode_substeps = 16;  // bailleul: per evaluation; friz_victoir: per path segment

    // "davie", "euler1".."euler3", "bailleul", "friz_victoir".
    std::string name() const;
    static SchemeSpec parse(const std::string& name);
    void validate() const;
};

// Names accepted by SchemeSpec::parse.
const std::vector<std::string>& scheme_names();

// Driver increment x_{from,to}; for from > to this is the group inverse of x_{to,from}.
TensorSeries driver_increment(const RoughDriver& driver, double from, double to);

// phi_{t,s}(a) = a + sum_i f_i(a) x^i + sum_{i,j} grad f_j(a) f_i(a) x^{ij}.
FlowFamily davie_almost_flow(const VectorFieldFamily& field, const RoughDriver& driver);

// sum_{|I| <= n} f_I i(a) x^I. n = 3 needs a depth-3 driver and a hessian.
FlowFamily step_n_euler(const VectorFieldFamily& field, const RoughDriver& driver, int n);

// Time-one map of y' = sum_i f_i(y) x^i + sum_{i,j} grad f_j(y) f_i(y) (x^{ij} - x^{ji}) / 2,
// i.e. the level-one drift plus half the Lie brackets weighted by level two.
FlowFamily bailleul_almost_flow(const VectorFieldFamily& field, const RoughDriver& driver, int substeps = 16);

// Chord realising the increment, then for each pair i < j with A^{ij} != 0 a
// square loop of side sqrt|A^{ij}| in the (i,j)-plane: counter-clockwise for
// A^{ij} > 0. A is the antisymmetric part of level 2.
std::vector<Vector> axis_loop_path(const Vector& increment, const Matrix& area);

// Length of axis_loop_path: |v| + sum_{i<j} 4 sqrt|A^{ij}|.
double axis_loop_length(const Vector& increment, const Matrix& area);

// Solution of dy = f(y) dx along axis_loop_path(x_{s,t}).
FlowFamily friz_victoir_almost_flow(const VectorFieldFamily& field, const RoughDriver& driver, int substeps = 16);

// bailleul - davie pointwise.
FlowFamily bailleul_remainder(const VectorFieldFamily& field, const RoughDriver& driver, int substeps = 16);

FlowFamily make_scheme(const SchemeSpec& spec, const VectorFieldFamily& field, const RoughDriver& driver);

// Classical RK4 for y' = drift(y) on [0, 1] with `steps` steps. Throws
// IntegratorError on non-finite values.
Vector rk4_time_one(const std::function<Vector(const Vector&)>& drift, const Vector& a, int steps);

// Solution of dy = f(y) dx along the polyline through `vertices`, RK4 with
// `substeps` steps per segment.
Vector solve_along_polyline(const VectorFieldFamily& field, std::span<const Vector> vertices, const Vector& a,
                            int substeps);

// Reference solution of dy = f(y) x'(t) dt for a path with a velocity, RK4
// with about `steps` steps on [s, t], aligned to the path's breakpoints.
Vector ode_reference(const VectorFieldFamily& field, const SmoothPath& path, double s, double t, const Vector& a,
                     std::size_t steps);

}  // namespace roughsew
