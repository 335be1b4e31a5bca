#pragma once

#include <augconex/types.hpp>

#include <cmath>
#include <concepts>
#include <string>
#include <vector>

namespace augconex {

/// Constants of the objective part f: smooth modulus, nonsmooth modulus,
/// strong convexity modulus and the standard deviation of the stochastic
/// gradient oracle.
struct SmoothnessProfile {
    double smooth = 0;           // L_f
    double nonsmooth = 0;        // H_f
    double strong_convexity = 0; // mu_f
    double noise = 0;            // sigma

    void validate() const {
        for (double v : {smooth, nonsmooth, strong_convexity, noise})
            if (!std::isfinite(v) || v < 0)
                throw InvalidInput("smoothness profile entries must be finite and >= 0");
    }
};

/// Per-constraint constants, one entry per constraint.
struct ConstraintProfile {
    std::vector<double> smooth;              // L_gi
    std::vector<double> nonsmooth;           // H_gi
    std::vector<double> lipschitz;           // M_gi
    std::vector<double> composite_lipschitz; // M_chi_i

    std::size_t size() const { return lipschitz.size(); }

    void validate() const {
        const auto m = size();
        if (smooth.size() != m || nonsmooth.size() != m || composite_lipschitz.size() != m)
            throw InvalidInput("constraint profile sequences must share one length");
        for (const auto *seq : {&smooth, &nonsmooth, &lipschitz, &composite_lipschitz})
            for (double v : *seq)
                if (!std::isfinite(v) || v < 0)
                    throw InvalidInput("constraint profile entries must be finite and >= 0");
    }

    static ConstraintProfile zeros(std::size_t m) {
        return {std::vector<double>(m, 0.0), std::vector<double>(m, 0.0),
                std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    }
};

/// Root-sum-square aggregates of a ConstraintProfile.
struct AggregateConstants {
    double smooth = 0;              // L_g
    double nonsmooth = 0;           // H_g
    double lipschitz = 0;           // M_g
    double composite_lipschitz = 0; // M_chi

    /// M_g + M_chi, the constant that couples the penalty to the primal step.
    double coupling() const { return lipschitz + composite_lipschitz; }
};

namespace detail {
inline double root_sum_square(const std::vector<double> &v) {
    double acc = 0;
    for (double e : v)
        acc += e * e;
    return std::sqrt(acc);
}
} // namespace detail

inline AggregateConstants aggregate_constants(const ConstraintProfile &profile) {
    return {detail::root_sum_square(profile.smooth), detail::root_sum_square(profile.nonsmooth),
            detail::root_sum_square(profile.lipschitz),
            detail::root_sum_square(profile.composite_lipschitz)};
}

/// Euclidean ball of radius `radius` centred at the origin.
struct BallDomain {
    double radius = 1;

    // Slack accepted after projection.
    static constexpr double membership_tol = 1e-9;

    Vec project(const Vec &x) const {
        const double nrm = x.norm();
        if (nrm <= radius)
            return x;
        return x * (radius / nrm);
    }

    bool contains(const Vec &x) const { return x.norm() <= radius * (1 + membership_tol); }
};

/// Which composite terms chi_0 and chi the problem carries. chi_0 is either
/// absent or a weighted l1 norm; `constraint_terms_zero` says chi == 0.
struct CompositeTerms {
    double l1_weight = 0;
    bool constraint_terms_zero = true;

    double objective_value(const Vec &x) const {
        return l1_weight == 0 ? 0.0 : l1_weight * x.lpNorm<1>();
    }
};

/// min f(x) + chi_0(x)  s.t.  g(x) + chi(x) <= 0,  x in a ball.
///
/// `objective_gradient` is a (sub)gradient of f, `sample_gradient` one draw of
/// the stochastic oracle; it must equal `objective_gradient` when the noise
/// level is zero. `constraint_jacobian` returns the n x m matrix whose columns
/// are the constraint gradients.
template <class P>
concept ConstrainedProblem = requires(const P &p, const Vec &x, Rng &rng) {
    { p.dim() } -> std::convertible_to<Index>;
    { p.num_constraints() } -> std::convertible_to<Index>;
    { p.objective_value(x) } -> std::convertible_to<double>;
    { p.objective_gradient(x) } -> std::convertible_to<Vec>;
    { p.sample_gradient(x, rng) } -> std::convertible_to<Vec>;
    { p.constraint_values(x) } -> std::convertible_to<Vec>;
    { p.constraint_jacobian(x) } -> std::convertible_to<Mat>;
    { p.composite_constraint_values(x) } -> std::convertible_to<Vec>;
    { p.composite() } -> std::convertible_to<CompositeTerms>;
    { p.smoothness() } -> std::convertible_to<SmoothnessProfile>;
    { p.constraint_profile() } -> std::convertible_to<ConstraintProfile>;
    { p.domain() } -> std::convertible_to<BallDomain>;
};

/// (x, s, y) with s <= 0 the slack and y >= 0 the multiplier.
struct PrimalDualPoint {
    Vec x;
    Vec s;
    Vec y;
};

/// psi(x) = g(x) + chi(x).
template <ConstrainedProblem P>
Vec constraint_residual(const P &p, const Vec &x) {
    return p.constraint_values(x) + p.composite_constraint_values(x);
}

/// psi_0(x) = f(x) + chi_0(x). Throws InvalidInput outside the domain.
template <ConstrainedProblem P>
double eval_objective(const P &p, const Vec &x) {
    if (x.size() != p.dim())
        throw InvalidInput("point has wrong dimension");
    if (!p.domain().contains(x))
        throw InvalidInput("point lies outside the domain: |x| = " + std::to_string(x.norm()));
    return p.objective_value(x) + p.composite().objective_value(x);
}

/// |[psi(x)]_+|
template <ConstrainedProblem P>
double feasibility_gap(const P &p, const Vec &x) {
    if (p.num_constraints() == 0)
        return 0.0;
    return constraint_residual(p, x).cwiseMax(0.0).norm();
}

/// psi_0(x) + <y, psi(x) - s>
template <ConstrainedProblem P>
double lagrangian(const P &p, const PrimalDualPoint &pt) {
    const double obj = p.objective_value(pt.x) + p.composite().objective_value(pt.x);
    if (p.num_constraints() == 0)
        return obj;
    return obj + pt.y.dot(constraint_residual(p, pt.x) - pt.s);
}

/// Signed objective excess over a trusted optimal value.
template <ConstrainedProblem P>
double optimality_gap(const P &p, const Vec &x, double ref_value) {
    return eval_objective(p, x) - ref_value;
}

} // namespace augconex
