#pragma once

#include "roughsew/algebra.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace roughsew {

// Second derivative of one channel: components[m](p, q) = d^2 f^m / dy_p dy_q.
struct ChannelHessian {
    std::vector<Matrix> components;
};

enum class DerivativeSource { analytic, finite_difference, none };

// Norm data of a vector field f : R^d -> L(R^l, R^d). Norms of f(a) are
// Frobenius norms of the d x l matrix; derivative norms are operator norms
// from R^d into those matrices. Values estimated by sampling are lower bounds.
struct FieldNorms {
    double sup = std::numeric_limits<double>::infinity();
    double grad_sup = std::numeric_limits<double>::infinity();
    double grad_lip = std::numeric_limits<double>::infinity();
    // Sampled gamma-Holder constant of grad f, when estimated directly.
    std::optional<double> grad_holder_sampled;
    double sampled_exponent = 1.0;
    bool estimated = false;

    // gamma-Holder constant of grad f. From Lipschitz and sup bounds:
    // |grad f(a) - grad f(b)| <= min(L |a-b|, 2G) <= L^gamma (2G)^{1-gamma} |a-b|^gamma.
    double grad_holder(double gamma) const;
};

// Vector fields f_1..f_l on R^d given as the columns of eval(a) (d x l).
// jacobian(a)[i] = grad f_i(a) (d x d); hessian(a)[i] per channel.
struct VectorFieldFamily {
    std::size_t state_dim = 0;
    std::size_t driver_dim = 0;
    std::string name;

    std::function<Matrix(const Vector&)> eval;
    std::function<std::vector<Matrix>(const Vector&)> jacobian;
    std::function<std::vector<ChannelHessian>(const Vector&)> hessian;

    DerivativeSource jacobian_source = DerivativeSource::none;
    DerivativeSource hessian_source = DerivativeSource::none;

    FieldNorms norms;

    // Channel i as a map R^d -> R^d.
    std::function<Vector(const Vector&)> channel(std::size_t i) const;
};

// Fills missing jacobian/hessian providers with central differences of step
// 1e-5 (1 + |a|); the sources are flagged finite_difference.
VectorFieldFamily with_finite_difference_fallback(VectorFieldFamily field);

// f_i(y) = B_i y.
VectorFieldFamily linear_field(std::vector<Matrix> matrices);
// f_i^m(y) = scale cos(y_{(m+i) mod d} + 0.3 (m+1)(i+1)).
VectorFieldFamily trig_field(std::size_t state_dim, std::size_t driver_dim, double scale = 1.0);
// f_i^m(y) = scale sin(y_m + phase_i), phase_i = i pi/2: componentwise sin for
// channel 0, cos for channel 1, ...
VectorFieldFamily componentwise_trig_field(std::size_t state_dim, std::size_t driver_dim, double scale = 1.0);
// f_i(y) = exp(-|y|^2/2) (J y + e_{i mod d}) with J the rotation generator of
// the first coordinate plane (d >= 2).
VectorFieldFamily rotation_field(std::size_t state_dim, std::size_t driver_dim, double scale = 1.0);

// Iterated action of the fields on the identity, f_I i(a), for |I| <= 3:
//   |I| = 1: f_i(a)
//   |I| = 2: grad f_j(a) f_i(a)                          for I = (i, j)
//   |I| = 3: hess f_k(a)[f_i, f_j] + grad f_k grad f_j f_i  for I = (i, j, k)
// paired with x^I where i is the earliest increment. Empty I gives a.
Vector f_I_identity(const VectorFieldFamily& field, std::span<const std::size_t> index, const Vector& a);

// [f_i, f_j] i(a) = grad f_j(a) f_i(a) - grad f_i(a) f_j(a).
Vector lie_bracket(const VectorFieldFamily& field, std::size_t i, std::size_t j, const Vector& a);

// 4-points control: |g(a)-g(b)-g(c)+g(d)| <= hat(|a-b| v |c-d|) (|a-c| v |b-d|) + check |a-b-c+d|.
struct FourPointConstants {
    std::function<double(double)> hat;
    double check = 0.0;
    std::string provenance;
};

// hat(x) = 2 ||grad f||_gamma x^gamma, check = ||grad f||_inf.
FourPointConstants analytic_four_point(const VectorFieldFamily& field, double gamma = 1.0);

// Closure rules: sum |lambda| f + |mu| g, composition f o g with Lip(g),
// and the inverse of i + g (marked for empirical verification).
FourPointConstants four_point_sum(const FourPointConstants& f, double lambda, const FourPointConstants& g, double mu);
FourPointConstants four_point_compose(const FourPointConstants& f, const FourPointConstants& g, double lip_g);
FourPointConstants four_point_inverse(const FourPointConstants& g, double lip_g);
FourPointConstants four_point_scaled(const FourPointConstants& c, double factor);

struct FourPointReport {
    double max_violation = -std::numeric_limits<double>::infinity();
    std::array<Vector, 4> witness;
    std::size_t samples = 0;
};

// Largest sampled value of lhs - rhs over quadruples in the box |y|_inf <= radius.
// Half of the quadruples are drawn as nearby parallelograms, where the bound is tight.
FourPointReport empirical_four_point_defect(const std::function<Vector(const Vector&)>& g, std::size_t dim,
                                            const FourPointConstants& c, std::size_t samples, double radius,
                                            std::uint64_t seed);

// Sampling estimate of sup |f|, sup |grad f| and the gamma-Holder constant of grad f.
FieldNorms estimate_norms(const VectorFieldFamily& field, const Vector& center, double radius, double gamma,
                          std::size_t samples = 10000, std::uint64_t seed = 1);

// Max deviation of the jacobian from central differences (step h) at sampled points.
double jacobian_consistency(const VectorFieldFamily& field, const Vector& center, double radius,
                            std::size_t samples, double h, std::uint64_t seed);
double hessian_consistency(const VectorFieldFamily& field, const Vector& center, double radius,
                           std::size_t samples, double h, std::uint64_t seed);

}  // namespace roughsew
